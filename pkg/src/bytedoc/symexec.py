"""Bounded symbolic execution of function bodies over a CFG.

Values are either concrete 256-bit integers or symbolic terms.  Symbolic
terms remember where they came from (calldata, callvalue, storage, ...) and,
for operation results, the operator and its arguments, so later analyses can
pattern-match on how a branch condition was computed.  There is no solver:
a JUMPI on a symbolic condition explores both sides.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

from .cfg import CFG
from .evm import Instruction

WORD = 1 << 256
MASK = WORD - 1
MAX_STACK = 1024

CALL_OPS = ("CALL", "CALLCODE", "STATICCALL", "DELEGATECALL", "CREATE", "SELFDESTRUCT")


@dataclass(frozen=True, eq=False)
class SymValue:
    """Concrete word (``value`` set) or symbolic term (``origin`` set)."""

    value: int | None = None
    origin: str | None = None  # calldata | callvalue | caller | storage | env | op
    detail: Any = None  # offset, storage key, env name or (op, args)
    uid: int = 0
    pc: int | None = None  # where a symbolic value was produced

    @property
    def is_concrete(self) -> bool:
        return self.value is not None

    @property
    def op(self) -> str | None:
        return self.detail[0] if self.origin == "op" else None

    @property
    def args(self) -> tuple["SymValue", ...]:
        return self.detail[1] if self.origin == "op" else ()

    def __eq__(self, other):
        if not isinstance(other, SymValue):
            return NotImplemented
        if self.is_concrete or other.is_concrete:
            return self.value == other.value
        return self.uid == other.uid

    def __hash__(self):
        return hash(("c", self.value)) if self.is_concrete else hash(("s", self.uid))

    def leaves(self) -> set[str]:
        """Origins of all non-operation symbolic inputs this value depends on."""
        out: set[str] = set()
        todo = [self]
        while todo:
            v = todo.pop()
            if v.is_concrete:
                continue
            if v.origin == "op":
                todo.extend(v.args)
            else:
                out.add(v.origin)
        return out

    def __repr__(self) -> str:
        if self.is_concrete:
            return f"concrete({self.value:#x})"
        if self.origin == "op":
            return f"{self.op}({', '.join(map(repr, self.args))})"
        return f"{self.origin}({self.detail!r})#{self.uid}"


def concrete(n: int) -> SymValue:
    return SymValue(value=n & MASK)


def as_constant(v: SymValue) -> int | None:
    return v.value


@dataclass(frozen=True)
class ExecLimits:
    max_paths: int = 256
    max_steps: int = 20_000
    timeout: float = 60.0
    loop_bound: int = 3


@dataclass(frozen=True)
class CallEvent:
    opcode: str
    pc: int
    value: SymValue | None = None  # P_v
    address: SymValue | None = None  # P_a


@dataclass(frozen=True)
class Branch:
    pc: int
    condition: SymValue
    taken: bool
    block_index: int  # position in the path's block list


@dataclass
class PathTrace:
    blocks: list[int]
    call_events: list[CallEvent]
    outcome: str  # stop | return | revert | invalid | selfdestruct | bad_jump | bound_exceeded
    branches: list[Branch] = field(default_factory=list)
    jumps: list[tuple[int, int]] = field(default_factory=list)
    stack: list[SymValue] = field(default_factory=list)
    state_changes: list[tuple[int, str]] = field(default_factory=list)
    steps: int = 0
    diagnostic: str = ""


class ExecutionError(Exception):
    """Raised by ``step`` when an instruction cannot execute; ends the path."""

    outcome = "invalid"


class StackUnderflow(ExecutionError):
    pass


class StackOverflow(ExecutionError):
    pass


class BadJump(ExecutionError):
    outcome = "bad_jump"


class Unresolvable(ExecutionError):
    outcome = "bound_exceeded"


class Halt(Exception):
    def __init__(self, outcome: str):
        self.outcome = outcome


class Context:
    """Per-execution bookkeeping shared by all forks of one analysis."""

    def __init__(self, cfg: CFG | None = None, code: bytes = b"", first_uid: int = 1):
        self.cfg = cfg
        self.code = code
        self._ids = itertools.count(first_uid)

    def fresh(self, origin: str, detail: Any = None, pc: int | None = None) -> SymValue:
        return SymValue(origin=origin, detail=detail, uid=next(self._ids), pc=pc)


@dataclass
class MachineState:
    ctx: Context
    pc: int = 0
    stack: list[SymValue] = field(default_factory=list)
    memory: dict[int, SymValue] = field(default_factory=dict)  # symbolic words
    mem_bytes: dict[int, int] = field(default_factory=dict)  # concrete bytes
    mem_tainted: set[int] = field(default_factory=set)  # bytes of unknown content
    storage: dict[Any, SymValue] = field(default_factory=dict)
    calldata: dict[int, SymValue] = field(default_factory=dict)
    env: dict[str, SymValue] = field(default_factory=dict)
    path: list[int] = field(default_factory=list)
    visits: dict[int, int] = field(default_factory=dict)
    events: list[CallEvent] = field(default_factory=list)
    branches: list[Branch] = field(default_factory=list)
    jumps: list[tuple[int, int]] = field(default_factory=list)
    state_changes: list[tuple[int, str]] = field(default_factory=list)
    step_count: int = 0
    error: ExecutionError | None = None  # set on a dead fork, reported on the next run

    def fork(self) -> "MachineState":
        return MachineState(
            self.ctx,
            self.pc,
            list(self.stack),
            dict(self.memory),
            dict(self.mem_bytes),
            set(self.mem_tainted),
            dict(self.storage),
            dict(self.calldata),
            dict(self.env),
            list(self.path),
            dict(self.visits),
            list(self.events),
            list(self.branches),
            list(self.jumps),
            list(self.state_changes),
            self.step_count,
        )

    # stack helpers
    def pop(self) -> SymValue:
        if not self.stack:
            raise StackUnderflow(f"stack underflow at {self.pc:#x}")
        return self.stack.pop()

    def push(self, v: SymValue) -> None:
        if len(self.stack) >= MAX_STACK:
            raise StackOverflow(f"stack overflow at {self.pc:#x}")
        self.stack.append(v)

    def env_value(self, name: str, origin: str = "env") -> SymValue:
        if name not in self.env:
            self.env[name] = self.ctx.fresh(origin, name, self.pc)
        return self.env[name]


# ---------------------------------------------------------------------------
# concrete semantics


def _signed(x: int) -> int:
    return x - WORD if x >> 255 else x


def fold(op: str, a: Sequence[int]) -> int:
    """Concrete result of a pure stack operation (arguments top-of-stack first)."""
    if op == "ADD":
        return (a[0] + a[1]) & MASK
    if op == "MUL":
        return (a[0] * a[1]) & MASK
    if op == "SUB":
        return (a[0] - a[1]) & MASK
    if op == "DIV":
        return 0 if a[1] == 0 else a[0] // a[1]
    if op == "SDIV":
        x, y = _signed(a[0]), _signed(a[1])
        if y == 0:
            return 0
        q = abs(x) // abs(y)
        return (-q if (x < 0) != (y < 0) else q) & MASK
    if op == "MOD":
        return 0 if a[1] == 0 else a[0] % a[1]
    if op == "SMOD":
        x, y = _signed(a[0]), _signed(a[1])
        if y == 0:
            return 0
        r = abs(x) % abs(y)
        return (-r if x < 0 else r) & MASK
    if op == "ADDMOD":
        return 0 if a[2] == 0 else (a[0] + a[1]) % a[2]
    if op == "MULMOD":
        return 0 if a[2] == 0 else (a[0] * a[1]) % a[2]
    if op == "EXP":
        return pow(a[0], a[1], WORD)
    if op == "SIGNEXTEND":
        b, x = a[0], a[1]
        if b >= 31:
            return x
        bits = 8 * (b + 1)
        x &= (1 << bits) - 1
        if x >> (bits - 1):
            x |= MASK ^ ((1 << bits) - 1)
        return x
    if op == "LT":
        return int(a[0] < a[1])
    if op == "GT":
        return int(a[0] > a[1])
    if op == "SLT":
        return int(_signed(a[0]) < _signed(a[1]))
    if op == "SGT":
        return int(_signed(a[0]) > _signed(a[1]))
    if op == "EQ":
        return int(a[0] == a[1])
    if op == "ISZERO":
        return int(a[0] == 0)
    if op == "AND":
        return a[0] & a[1]
    if op == "OR":
        return a[0] | a[1]
    if op == "XOR":
        return a[0] ^ a[1]
    if op == "NOT":
        return MASK ^ a[0]
    if op == "BYTE":
        i, x = a[0], a[1]
        return 0 if i >= 32 else (x >> (8 * (31 - i))) & 0xFF
    if op == "SHL":
        return 0 if a[0] >= 256 else (a[1] << a[0]) & MASK
    if op == "SHR":
        return 0 if a[0] >= 256 else a[1] >> a[0]
    if op == "SAR":
        x = _signed(a[1])
        if a[0] >= 256:
            return MASK if x < 0 else 0
        return (x >> a[0]) & MASK
    raise KeyError(op)


PURE_OPS = frozenset(
    "ADD MUL SUB DIV SDIV MOD SMOD ADDMOD MULMOD EXP SIGNEXTEND LT GT SLT SGT EQ "
    "ISZERO AND OR XOR NOT BYTE SHL SHR SAR".split()
)

ENV_OPS = {
    "ADDRESS": "address",
    "ORIGIN": "origin",
    "CALLER": "caller",
    "CALLVALUE": "callvalue",
    "CALLDATASIZE": "calldatasize",
    "GASPRICE": "gasprice",
    "RETURNDATASIZE": "returndatasize",
    "COINBASE": "coinbase",
    "TIMESTAMP": "timestamp",
    "NUMBER": "number",
    "DIFFICULTY": "difficulty",
    "GASLIMIT": "gaslimit",
    "CHAINID": "chainid",
    "SELFBALANCE": "selfbalance",
    "BASEFEE": "basefee",
    "BLOBBASEFEE": "blobbasefee",
    "MSIZE": "msize",
    "GAS": "gas",
}
# env values that get their own origin tag rather than "env"
_OWN_ORIGIN = {"caller", "callvalue"}


def evaluate(v: SymValue, assignment: dict[str, int]) -> int | None:
    """Evaluate a term with some leaf origins fixed to concrete values.

    Returns None if the term depends on anything not in ``assignment``.
    """
    if v.is_concrete:
        return v.value
    if v.origin == "op":
        args = [evaluate(a, assignment) for a in v.args]
        if any(a is None for a in args):
            return None
        return fold(v.op, args)
    return assignment.get(v.origin)


# ---------------------------------------------------------------------------
# memory


def _mem_read(state: MachineState, off: int, pc: int) -> SymValue:
    exact = state.memory.get(off)
    lo, hi = off, off + 32
    overlapping = [s for s in state.memory if s < hi and s + 32 > lo and s != off]
    tainted = any(lo <= t < hi for t in state.mem_tainted)
    if exact is not None and not overlapping and not tainted:
        return exact
    if exact is not None or overlapping or tainted:
        return state.ctx.fresh("op", ("MLOAD", ()), pc)
    data = bytes(state.mem_bytes.get(i, 0) for i in range(lo, hi))
    return concrete(int.from_bytes(data, "big"))


def _smear(state: MachineState, lo: int, hi: int, exact: int | None, pc: int) -> None:
    """Drop symbolic words overlapping [lo, hi) except the exact slot ``exact``."""
    for s in [s for s in state.memory if s < hi and s + 32 > lo]:
        if s == exact:
            continue
        if lo <= s and s + 32 <= hi:
            del state.memory[s]
        else:
            state.memory[s] = state.ctx.fresh("op", ("MLOAD", ()), pc)


def _mem_write(state: MachineState, off: int, v: SymValue, pc: int) -> None:
    lo, hi = off, off + 32
    _smear(state, lo, hi, None, pc)
    state.mem_tainted.difference_update(range(lo, hi))
    if v.is_concrete:
        for i, b in enumerate(v.value.to_bytes(32, "big")):
            state.mem_bytes[lo + i] = b
    else:
        for i in range(lo, hi):
            state.mem_bytes.pop(i, None)
        state.memory[off] = v


def _mem_write8(state: MachineState, off: int, v: SymValue, pc: int) -> None:
    _smear(state, off, off + 1, None, pc)
    if v.is_concrete:
        state.mem_tainted.discard(off)
        state.mem_bytes[off] = v.value & 0xFF
    else:
        state.mem_bytes.pop(off, None)
        state.mem_tainted.add(off)


_TAINT_LIMIT = 4096


def _mem_taint(state: MachineState, off: SymValue, size: SymValue, pc: int) -> None:
    if not off.is_concrete or not size.is_concrete or size.value > _TAINT_LIMIT:
        # unknown region: forget everything
        state.memory = {s: state.ctx.fresh("op", ("MLOAD", ()), pc) for s in state.memory}
        state.mem_tainted.update(state.mem_bytes)
        state.mem_bytes.clear()
        return
    lo, hi = off.value, off.value + size.value
    _smear(state, lo, hi, None, pc)
    for i in range(lo, hi):
        state.mem_bytes.pop(i, None)
        state.mem_tainted.add(i)


# ---------------------------------------------------------------------------
# single-step transition


def _jump_to(state: MachineState, target: SymValue, pc: int) -> None:
    if not target.is_concrete:
        raise Unresolvable(f"symbolic jump target at {pc:#x}")
    dests = state.ctx.cfg.jumpdests if state.ctx.cfg is not None else None
    if dests is not None and target.value not in dests:
        raise BadJump(f"jump at {pc:#x} to non-JUMPDEST {target.value:#x}")
    state.jumps.append((pc, target.value))
    state.pc = target.value


def step(state: MachineState, ins: Instruction) -> list[MachineState]:
    """Execute one instruction.

    The given state is advanced in place and returned as the only successor,
    except for a JUMPI on a symbolic condition (two successors: taken first,
    then fallthrough) and halting instructions, which raise :class:`Halt`.
    Execution errors raise :class:`ExecutionError` subclasses.
    """
    name = ins.mnemonic
    pc = ins.pc
    state.pc = pc
    state.step_count += 1
    info = ins.opcode
    if len(state.stack) < info.stack_pops:
        raise StackUnderflow(f"{name} at {pc:#x} needs {info.stack_pops} items")
    nxt = ins.next_pc

    if info.is_push:
        state.push(concrete(ins.push_value))
    elif name in PURE_OPS:
        args = [state.pop() for _ in range(info.stack_pops)]
        if all(a.is_concrete for a in args):
            state.push(concrete(fold(name, [a.value for a in args])))
        else:
            state.push(state.ctx.fresh("op", (name, tuple(args)), pc))
    elif name.startswith("DUP"):
        n = int(name[3:])
        state.push(state.stack[-n])
    elif name.startswith("SWAP"):
        n = int(name[4:])
        s = state.stack
        s[-1], s[-1 - n] = s[-1 - n], s[-1]
    elif name == "POP":
        state.pop()
    elif name == "JUMPDEST":
        pass
    elif name in ENV_OPS:
        tag = ENV_OPS[name]
        if name in ("GAS", "MSIZE"):
            state.push(state.ctx.fresh("env", tag, pc))
        else:
            state.push(state.env_value(tag, tag if tag in _OWN_ORIGIN else "env"))
    elif name == "PC":
        state.push(concrete(pc))
    elif name == "CODESIZE":
        state.push(concrete(len(state.ctx.code)) if state.ctx.code else state.env_value("codesize"))
    elif name == "CALLDATALOAD":
        off = state.pop()
        if off.is_concrete:
            if off.value not in state.calldata:
                state.calldata[off.value] = state.ctx.fresh("calldata", off.value, pc)
            state.push(state.calldata[off.value])
        else:
            state.push(state.ctx.fresh("calldata", None, pc))
    elif name in ("BALANCE", "EXTCODESIZE", "EXTCODEHASH", "BLOCKHASH", "BLOBHASH"):
        arg = state.pop()
        state.push(state.ctx.fresh("env", (name.lower(), arg), pc))
    elif name == "SHA3":
        off, size = state.pop(), state.pop()
        state.push(state.ctx.fresh("op", ("SHA3", (off, size)), pc))
    elif name == "MLOAD":
        off = state.pop()
        if off.is_concrete:
            state.push(_mem_read(state, off.value, pc))
        else:
            state.push(state.ctx.fresh("op", ("MLOAD", (off,)), pc))
    elif name == "MSTORE":
        off, v = state.pop(), state.pop()
        if off.is_concrete:
            _mem_write(state, off.value, v, pc)
        else:
            _mem_taint(state, off, concrete(32), pc)
    elif name == "MSTORE8":
        off, v = state.pop(), state.pop()
        if off.is_concrete:
            _mem_write8(state, off.value, v, pc)
        else:
            _mem_taint(state, off, concrete(1), pc)
    elif name in ("CALLDATACOPY", "RETURNDATACOPY"):
        dst, _src, size = state.pop(), state.pop(), state.pop()
        _mem_taint(state, dst, size, pc)
    elif name == "CODECOPY":
        dst, src, size = state.pop(), state.pop(), state.pop()
        if dst.is_concrete and src.is_concrete and size.is_concrete and state.ctx.code and size.value <= _TAINT_LIMIT:
            data = state.ctx.code[src.value : src.value + size.value].ljust(size.value, b"\x00")
            _smear(state, dst.value, dst.value + size.value, None, pc)
            for i, b in enumerate(data):
                state.mem_bytes[dst.value + i] = b
                state.mem_tainted.discard(dst.value + i)
        else:
            _mem_taint(state, dst, size, pc)
    elif name == "EXTCODECOPY":
        _addr, dst, _src, size = state.pop(), state.pop(), state.pop(), state.pop()
        _mem_taint(state, dst, size, pc)
    elif name == "MCOPY":
        dst, _src, size = state.pop(), state.pop(), state.pop()
        _mem_taint(state, dst, size, pc)
    elif name in ("SLOAD", "TLOAD"):
        key = state.pop()
        k = (name, key.value if key.is_concrete else ("sym", key.uid))
        if k not in state.storage:
            state.storage[k] = state.ctx.fresh("storage", key, pc)
        state.push(state.storage[k])
    elif name in ("SSTORE", "TSTORE"):
        key, v = state.pop(), state.pop()
        load = "SLOAD" if name == "SSTORE" else "TLOAD"
        if not key.is_concrete:
            # a symbolic key may alias any slot
            state.storage = {k: val for k, val in state.storage.items() if k[0] != load}
        state.storage[(load, key.value if key.is_concrete else ("sym", key.uid))] = v
        state.state_changes.append((pc, name))
    elif name.startswith("LOG"):
        for _ in range(info.stack_pops):
            state.pop()
        state.state_changes.append((pc, name))
    elif name in ("CALL", "CALLCODE"):
        _gas, addr, value = state.pop(), state.pop(), state.pop()
        _ao, _as, ro, rs = state.pop(), state.pop(), state.pop(), state.pop()
        state.events.append(CallEvent(name, pc, value=value, address=addr))
        state.state_changes.append((pc, name))
        _mem_taint(state, ro, rs, pc)
        state.push(state.ctx.fresh("op", (name, (addr, value)), pc))
    elif name in ("DELEGATECALL", "STATICCALL"):
        _gas, addr = state.pop(), state.pop()
        _ao, _as, ro, rs = state.pop(), state.pop(), state.pop(), state.pop()
        state.events.append(CallEvent(name, pc, address=addr))
        state.state_changes.append((pc, name))
        _mem_taint(state, ro, rs, pc)
        state.push(state.ctx.fresh("op", (name, (addr,)), pc))
    elif name in ("CREATE", "CREATE2"):
        args = [state.pop() for _ in range(info.stack_pops)]
        if name == "CREATE":
            state.events.append(CallEvent(name, pc))
        state.state_changes.append((pc, name))
        state.push(state.ctx.fresh("op", (name, tuple(args)), pc))
    elif name == "SELFDESTRUCT":
        state.pop()
        state.events.append(CallEvent(name, pc))
        state.state_changes.append((pc, name))
        raise Halt("selfdestruct")
    elif name == "STOP":
        raise Halt("stop")
    elif name in ("RETURN", "REVERT"):
        state.pop()
        state.pop()
        raise Halt(name.lower())
    elif name == "INVALID":
        raise Halt("invalid")
    elif name == "JUMP":
        _jump_to(state, state.pop(), pc)
        return [state]
    elif name == "JUMPI":
        dest, cond = state.pop(), state.pop()
        if cond.is_concrete:
            if cond.value:
                _jump_to(state, dest, pc)
            else:
                state.pc = nxt
            return [state]
        other = state.fork()
        other.pc = nxt
        other.branches.append(Branch(pc, cond, False, len(other.path) - 1))
        state.branches.append(Branch(pc, cond, True, len(state.path) - 1))
        try:
            _jump_to(state, dest, pc)
        except ExecutionError as exc:
            state.error = exc
        return [state, other]
    else:  # pragma: no cover - table covers every assigned opcode
        raise ExecutionError(f"unsupported {name}")

    state.pc = nxt
    return [state]


# ---------------------------------------------------------------------------
# path enumeration


@dataclass
class Execution:
    traces: list[PathTrace]
    truncated: bool = False
    timed_out: bool = False

    def __iter__(self) -> Iterator[PathTrace]:
        return iter(self.traces)

    def __len__(self) -> int:
        return len(self.traces)

    @property
    def bad_jump(self) -> bool:
        return any(t.outcome == "bad_jump" for t in self.traces)

    @property
    def jump_edges(self) -> set[tuple[int, int]]:
        return {j for t in self.traces for j in t.jumps}


class Timeout(Exception):
    def __init__(self, limits: ExecLimits, partial: Execution):
        super().__init__(f"symbolic execution exceeded {limits.timeout}s")
        self.limits = limits
        self.partial = partial


def _finish(state: MachineState, outcome: str, diagnostic: str = "") -> PathTrace:
    return PathTrace(
        blocks=list(state.path),
        call_events=list(state.events),
        outcome=outcome,
        branches=list(state.branches),
        jumps=list(state.jumps),
        stack=list(state.stack),
        state_changes=list(state.state_changes),
        steps=state.step_count,
        diagnostic=diagnostic,
    )


def execute_function(
    cfg: CFG,
    entry_pc: int,
    limits: ExecLimits = ExecLimits(),
    initial_stack: Sequence[SymValue] = (),
    code: bytes = b"",
    raise_on_timeout: bool = False,
) -> Execution:
    """Depth-first enumeration of paths starting at ``entry_pc``.

    On timeout the paths found so far are returned with ``timed_out`` set
    (or :class:`Timeout` is raised carrying them, if requested).
    """
    first = 1 + max((v.uid for v in initial_stack), default=0)
    ctx = Context(cfg, code, first)
    start = MachineState(ctx, pc=entry_pc, stack=list(initial_stack))
    deadline = time.monotonic() + limits.timeout
    result = Execution([])
    work = [start]
    while work:
        if len(result.traces) >= limits.max_paths:
            result.truncated = True
            break
        if time.monotonic() > deadline:
            result.truncated = result.timed_out = True
            break
        state = work.pop()
        trace = _run_path(state, limits, work, deadline)
        if trace is not None:
            result.traces.append(trace)
    if result.timed_out and raise_on_timeout:
        raise Timeout(limits, result)
    return result


def _run_path(state: MachineState, limits: ExecLimits, work: list, deadline: float) -> PathTrace | None:
    cfg = state.ctx.cfg
    while True:
        if state.error is not None:
            return _finish(state, state.error.outcome, str(state.error))
        block = cfg.block_of(state.pc)
        ins = cfg.instruction_at(state.pc)
        if ins is None:
            # running off the end of code is an implicit STOP
            return _finish(state, "stop")
        if block.start_pc == state.pc:
            count = state.visits.get(block.start_pc, 0) + 1
            if count > limits.loop_bound:
                return _finish(state, "bound_exceeded", f"loop bound at block {block.start_pc:#x}")
            state.visits[block.start_pc] = count
            state.path.append(block.start_pc)
        if state.step_count >= limits.max_steps:
            return _finish(state, "bound_exceeded", "step limit")
        if state.step_count % 256 == 0 and time.monotonic() > deadline:
            return _finish(state, "bound_exceeded", "timeout")
        try:
            succ = step(state, ins)
        except Halt as h:
            return _finish(state, h.outcome)
        except ExecutionError as exc:
            return _finish(state, exc.outcome, str(exc))
        if len(succ) == 2:
            # explore the taken side first: push fallthrough underneath
            work.append(succ[1])
            state = succ[0]
        else:
            state = succ[0]
