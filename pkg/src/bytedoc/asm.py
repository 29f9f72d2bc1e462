"""A tiny two-pass EVM assembler for hand-written fixtures.

Source is one item per line (``;`` starts a comment)::

    PUSH1 0x80
    PUSH2 @body        ; label reference, encoded in the PUSH width
    JUMPI
    body:              ; label definition (does not emit a JUMPDEST)
    JUMPDEST
    .org 0x149         ; pad with STOP bytes up to an absolute offset
    .byte 0xfe 0x00    ; raw bytes

``PUSH @label`` without a width picks PUSH2.  Several items may share a line
separated by ``|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .evm import opcode


class AsmError(ValueError):
    pass


@dataclass
class Program:
    code: bytes
    labels: dict[str, int] = field(default_factory=dict)

    @property
    def hex(self) -> str:
        return "0x" + self.code.hex()


def _parse_int(tok: str) -> int:
    try:
        return int(tok, 0)
    except ValueError:
        raise AsmError(f"bad number {tok!r}") from None


def _items(source: str) -> list[list[str]]:
    items = []
    for raw in source.splitlines():
        line = raw.split(";", 1)[0]
        for part in line.split("|"):
            toks = part.split()
            if toks:
                items.append(toks)
    return items


def assemble(source: str) -> Program:
    items = _items(source)

    def width_of(toks: list[str]) -> int:
        head = toks[0].upper()
        if head.startswith("."):
            return 0
        if head == "PUSH":
            return 3
        return 1 + opcode(head).immediate_len

    # pass 1: label offsets
    labels: dict[str, int] = {}
    pc = 0
    for toks in items:
        head = toks[0]
        if head.endswith(":"):
            name = head[:-1]
            if name in labels:
                raise AsmError(f"duplicate label {name}")
            labels[name] = pc
            continue
        if head == ".org":
            target = _parse_int(toks[1])
            if target < pc:
                raise AsmError(f".org {target:#x} is behind pc {pc:#x}")
            pc = target
        elif head == ".byte":
            pc += len(toks) - 1
        else:
            try:
                pc += width_of(toks)
            except KeyError:
                raise AsmError(f"unknown mnemonic {head!r}") from None

    # pass 2: emit
    out = bytearray()
    for toks in items:
        head = toks[0]
        if head.endswith(":"):
            continue
        if head == ".org":
            out.extend(b"\x00" * (_parse_int(toks[1]) - len(out)))
            continue
        if head == ".byte":
            out.extend(_parse_int(t) & 0xFF for t in toks[1:])
            continue
        name = head.upper()
        if name == "PUSH":
            name = "PUSH2"
        info = opcode(name)
        out.append(info.byte)
        if info.immediate_len:
            if len(toks) != 2:
                raise AsmError(f"{name} needs one operand")
            arg = toks[1]
            if arg.startswith("@"):
                if arg[1:] not in labels:
                    raise AsmError(f"undefined label {arg[1:]}")
                value = labels[arg[1:]]
            else:
                value = _parse_int(arg)
            if value >= 1 << (8 * info.immediate_len):
                raise AsmError(f"{value:#x} does not fit in {name}")
            out.extend(value.to_bytes(info.immediate_len, "big"))
        elif len(toks) > 1:
            raise AsmError(f"{name} takes no operand")
    return Program(bytes(out), labels)
