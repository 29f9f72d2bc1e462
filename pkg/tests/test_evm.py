import pytest
from hypothesis import given, settings, strategies as st

from bytedoc.evm import (
    EmptyBytecode,
    decode_hex,
    disassemble,
    format_listing,
    jumpdest_set,
    opcode,
    serialize,
)


@settings(max_examples=10_000, deadline=None)
@given(st.binary(min_size=1, max_size=96))
def test_disassembly_roundtrip(data):
    assert serialize(disassemble(data)) == data


@given(st.binary(min_size=1, max_size=96))
def test_pcs_are_contiguous(data):
    ins = disassemble(data)
    assert ins[0].pc == 0
    for a, b in zip(ins, ins[1:]):
        assert b.pc == a.pc + a.size


@given(st.binary(min_size=1, max_size=96))
def test_jumpdests_are_instruction_starts(data):
    starts = {i.pc for i in disassemble(data) if i.mnemonic == "JUMPDEST"}
    assert jumpdest_set(data) == starts


def test_jumpdest_inside_push_data_is_shadowed():
    assert jumpdest_set(bytes.fromhex("605b5b")) == {2}
    assert jumpdest_set(bytes.fromhex("7f" + "5b" * 32 + "5b")) == {33}
    assert jumpdest_set(bytes.fromhex("5b615b5b5b")) == {0, 4}


def test_truncated_push():
    ins = disassemble(bytes.fromhex("6300ff"))
    assert len(ins) == 1
    assert ins[0].truncated
    assert ins[0].immediate == b"\x00\xff"
    assert ins[0].push_value == 0x00FF0000


def test_unknown_byte_is_invalid_class():
    (ins,) = disassemble(b"\x0c")
    assert ins.opcode.byte == 0x0C
    assert ins.size == 1


def test_push0_and_table_entries():
    assert opcode("PUSH0").byte == 0x5F
    assert opcode(0x60).immediate_len == 1
    assert opcode("PUSH32").immediate_len == 32
    assert opcode("CALL").stack_pops == 7
    assert opcode("REVERT").is_terminator


def test_empty_bytecode():
    with pytest.raises(EmptyBytecode):
        disassemble(b"")


@pytest.mark.parametrize(
    "text, expected",
    [("0x6001", b"\x60\x01"), ("6001\n", b"\x60\x01"), ("0X60aB", b"\x60\xab"), ("  60ab  ", b"\x60\xab")],
)
def test_decode_hex(text, expected):
    assert decode_hex(text) == expected


@pytest.mark.parametrize("bad", ["0x600", "zz", "0x6 0"])
def test_decode_hex_rejects(bad):
    with pytest.raises(ValueError):
        decode_hex(bad)


def test_listing():
    assert format_listing(disassemble(bytes.fromhex("6080604052"))).splitlines() == [
        "0x0000 PUSH1 0x80",
        "0x0002 PUSH1 0x40",
        "0x0004 MSTORE",
    ]
