"""Opcode metadata, disassembly and jump-destination scanning for EVM runtime code."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class EmptyBytecode(ValueError):
    """Raised when an analysis is asked to work on zero bytes of code."""


@dataclass(frozen=True)
class OpcodeInfo:
    byte: int
    mnemonic: str
    immediate_len: int = 0
    stack_pops: int = 0
    stack_pushes: int = 0
    is_terminator: bool = False

    @property
    def is_push(self) -> bool:
        return 0x5F <= self.byte <= 0x7F

    @property
    def is_assigned(self) -> bool:
        return self.mnemonic != "INVALID" or self.byte == 0xFE


# (mnemonic, pops, pushes) for the fixed-arity opcodes.
_BASE = {
    0x00: ("STOP", 0, 0),
    0x01: ("ADD", 2, 1),
    0x02: ("MUL", 2, 1),
    0x03: ("SUB", 2, 1),
    0x04: ("DIV", 2, 1),
    0x05: ("SDIV", 2, 1),
    0x06: ("MOD", 2, 1),
    0x07: ("SMOD", 2, 1),
    0x08: ("ADDMOD", 3, 1),
    0x09: ("MULMOD", 3, 1),
    0x0A: ("EXP", 2, 1),
    0x0B: ("SIGNEXTEND", 2, 1),
    0x10: ("LT", 2, 1),
    0x11: ("GT", 2, 1),
    0x12: ("SLT", 2, 1),
    0x13: ("SGT", 2, 1),
    0x14: ("EQ", 2, 1),
    0x15: ("ISZERO", 1, 1),
    0x16: ("AND", 2, 1),
    0x17: ("OR", 2, 1),
    0x18: ("XOR", 2, 1),
    0x19: ("NOT", 1, 1),
    0x1A: ("BYTE", 2, 1),
    0x1B: ("SHL", 2, 1),
    0x1C: ("SHR", 2, 1),
    0x1D: ("SAR", 2, 1),
    0x20: ("SHA3", 2, 1),
    0x30: ("ADDRESS", 0, 1),
    0x31: ("BALANCE", 1, 1),
    0x32: ("ORIGIN", 0, 1),
    0x33: ("CALLER", 0, 1),
    0x34: ("CALLVALUE", 0, 1),
    0x35: ("CALLDATALOAD", 1, 1),
    0x36: ("CALLDATASIZE", 0, 1),
    0x37: ("CALLDATACOPY", 3, 0),
    0x38: ("CODESIZE", 0, 1),
    0x39: ("CODECOPY", 3, 0),
    0x3A: ("GASPRICE", 0, 1),
    0x3B: ("EXTCODESIZE", 1, 1),
    0x3C: ("EXTCODECOPY", 4, 0),
    0x3D: ("RETURNDATASIZE", 0, 1),
    0x3E: ("RETURNDATACOPY", 3, 0),
    0x3F: ("EXTCODEHASH", 1, 1),
    0x40: ("BLOCKHASH", 1, 1),
    0x41: ("COINBASE", 0, 1),
    0x42: ("TIMESTAMP", 0, 1),
    0x43: ("NUMBER", 0, 1),
    0x44: ("DIFFICULTY", 0, 1),
    0x45: ("GASLIMIT", 0, 1),
    0x46: ("CHAINID", 0, 1),
    0x47: ("SELFBALANCE", 0, 1),
    0x48: ("BASEFEE", 0, 1),
    0x49: ("BLOBHASH", 1, 1),
    0x4A: ("BLOBBASEFEE", 0, 1),
    0x50: ("POP", 1, 0),
    0x51: ("MLOAD", 1, 1),
    0x52: ("MSTORE", 2, 0),
    0x53: ("MSTORE8", 2, 0),
    0x54: ("SLOAD", 1, 1),
    0x55: ("SSTORE", 2, 0),
    0x56: ("JUMP", 1, 0),
    0x57: ("JUMPI", 2, 0),
    0x58: ("PC", 0, 1),
    0x59: ("MSIZE", 0, 1),
    0x5A: ("GAS", 0, 1),
    0x5B: ("JUMPDEST", 0, 0),
    0x5C: ("TLOAD", 1, 1),
    0x5D: ("TSTORE", 2, 0),
    0x5E: ("MCOPY", 3, 0),
    0x5F: ("PUSH0", 0, 1),
    0xF0: ("CREATE", 3, 1),
    0xF1: ("CALL", 7, 1),
    0xF2: ("CALLCODE", 7, 1),
    0xF3: ("RETURN", 2, 0),
    0xF4: ("DELEGATECALL", 6, 1),
    0xF5: ("CREATE2", 4, 1),
    0xFA: ("STATICCALL", 6, 1),
    0xFD: ("REVERT", 2, 0),
    0xFE: ("INVALID", 0, 0),
    0xFF: ("SELFDESTRUCT", 1, 0),
}

TERMINATORS = frozenset({"STOP", "RETURN", "REVERT", "INVALID", "SELFDESTRUCT", "JUMP"})

# Opcodes whose execution changes persistent state or talks to other accounts.
STATE_CHANGING = frozenset(
    {
        "SSTORE",
        "TSTORE",
        "CALL",
        "CALLCODE",
        "DELEGATECALL",
        "STATICCALL",
        "CREATE",
        "CREATE2",
        "SELFDESTRUCT",
        "LOG0",
        "LOG1",
        "LOG2",
        "LOG3",
        "LOG4",
    }
)


def _build_table() -> tuple[OpcodeInfo, ...]:
    entries: dict[int, OpcodeInfo] = {}
    for byte, (name, pops, pushes) in _BASE.items():
        entries[byte] = OpcodeInfo(byte, name, 0, pops, pushes, name in TERMINATORS)
    for n in range(1, 33):
        entries[0x5F + n] = OpcodeInfo(0x5F + n, f"PUSH{n}", n, 0, 1)
    for n in range(1, 17):
        entries[0x7F + n] = OpcodeInfo(0x7F + n, f"DUP{n}", 0, n, n + 1)
        entries[0x8F + n] = OpcodeInfo(0x8F + n, f"SWAP{n}", 0, n + 1, n + 1)
    for n in range(5):
        entries[0xA0 + n] = OpcodeInfo(0xA0 + n, f"LOG{n}", 0, n + 2, 0)
    # Unassigned bytes behave like INVALID when executed.
    return tuple(
        entries.get(b, OpcodeInfo(b, "INVALID", 0, 0, 0, True)) for b in range(256)
    )


OPCODES: tuple[OpcodeInfo, ...] = _build_table()
BY_NAME: dict[str, OpcodeInfo] = {
    op.mnemonic: op for op in OPCODES if op.is_assigned
}


def opcode(byte_or_name: int | str) -> OpcodeInfo:
    """Look up an opcode by byte value or mnemonic (``"PUSH1"``, ``"SHA3"``...)."""
    if isinstance(byte_or_name, int):
        return OPCODES[byte_or_name & 0xFF]
    name = byte_or_name.upper()
    if name == "KECCAK256":
        name = "SHA3"
    if name == "PREVRANDAO":
        name = "DIFFICULTY"
    return BY_NAME[name]


@dataclass(frozen=True)
class Instruction:
    pc: int
    opcode: OpcodeInfo
    immediate: bytes | None = None
    truncated: bool = False

    @property
    def mnemonic(self) -> str:
        return self.opcode.mnemonic

    @property
    def size(self) -> int:
        return 1 + (len(self.immediate) if self.immediate is not None else 0)

    @property
    def next_pc(self) -> int:
        return self.pc + 1 + self.opcode.immediate_len

    @property
    def push_value(self) -> int | None:
        """Value a PUSH places on the stack (code past the end reads as zero)."""
        if not self.opcode.is_push:
            return None
        if self.opcode.immediate_len == 0:
            return 0
        data = (self.immediate or b"").ljust(self.opcode.immediate_len, b"\x00")
        return int.from_bytes(data, "big")

    def to_bytes(self) -> bytes:
        return bytes([self.opcode.byte]) + (self.immediate or b"")

    def __str__(self) -> str:
        if self.opcode.is_push and self.opcode.immediate_len:
            return f"{self.pc:#06x} {self.mnemonic} 0x{(self.immediate or b'').hex()}"
        return f"{self.pc:#06x} {self.mnemonic}"


def disassemble(code: bytes) -> list[Instruction]:
    """Split runtime bytecode into instructions.

    Total over any byte string: unknown bytes become INVALID-class entries and
    a PUSH cut short by the end of code keeps its partial immediate with
    ``truncated`` set.
    """
    if not code:
        raise EmptyBytecode("bytecode is empty")
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        info = OPCODES[code[pc]]
        if info.immediate_len:
            imm = bytes(code[pc + 1 : pc + 1 + info.immediate_len])
            out.append(Instruction(pc, info, imm, len(imm) < info.immediate_len))
        else:
            out.append(Instruction(pc, info))
        pc += 1 + info.immediate_len
    return out


def serialize(instructions: Iterable[Instruction]) -> bytes:
    return b"".join(ins.to_bytes() for ins in instructions)


def jumpdest_set(code: bytes) -> set[int]:
    """Offsets of JUMPDEST bytes that are real instructions, not PUSH data."""
    dests = set()
    pc = 0
    n = len(code)
    while pc < n:
        b = code[pc]
        if b == 0x5B:
            dests.add(pc)
        elif 0x60 <= b <= 0x7F:
            pc += b - 0x5F
        pc += 1
    return dests


def decode_hex(text: str) -> bytes:
    """Decode a hex string with optional 0x prefix; whitespace at the ends is ignored."""
    s = text.strip()
    if s[:2].lower() == "0x":
        s = s[2:]
    if len(s) % 2:
        raise ValueError(f"odd-length hex string ({len(s)} digits)")
    try:
        return bytes.fromhex(s)
    except ValueError as exc:
        raise ValueError(f"invalid hex: {exc}") from None


def format_listing(instructions: Sequence[Instruction]) -> str:
    return "\n".join(str(ins) for ins in instructions)
