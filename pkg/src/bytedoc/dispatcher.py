"""Function-dispatcher recovery and NF/JE contract tagging.

The dispatcher region is walked with the symbolic stepper, starting at pc 0
with symbolic calldata.  The transaction's 4-byte selector is recognised by
how it is computed (``CALLDATALOAD(0) / 2**224`` or ``CALLDATALOAD(0) >> 224``,
optionally masked with ``0xffffffff``), so stack shuffling or operand order
does not matter.  Every JUMPI that compares that value against a constant
yields one binding; function bodies themselves are never entered.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cfg import CFG, statically_invalid_jumps
from .symexec import (
    Context,
    ExecutionError,
    Halt,
    MachineState,
    SymValue,
    step,
)

TYPE1 = "type1"
TYPE2 = "type2"
FALLBACK = "fallback"

NF_ALERT = "ALERT: This is an insecure NF contract!"
JE_ALERT = "ALERT: This is an insecure JE contract!"

_SHIFT = 1 << 224
_MASK32 = 0xFFFFFFFF


@dataclass(frozen=True)
class SelectorBinding:
    selector: int | None  # None marks the fallback pseudo-binding
    entry_pc: int
    pattern: str
    stack: tuple[SymValue, ...] = field(default=(), compare=False, repr=False)
    compare_pc: int = field(default=-1, compare=False)

    @property
    def selector_hex(self) -> str:
        return "fallback" if self.selector is None else f"0x{self.selector:08x}"


@dataclass(frozen=True)
class ContractTag:
    kind: str  # normal | nf | je
    detail: str = ""

    @property
    def alert(self) -> str | None:
        return {"nf": NF_ALERT, "je": JE_ALERT}.get(self.kind)


@dataclass
class Dispatch:
    bindings: list[SelectorBinding]
    fallback: SelectorBinding | None


def _is_calldata_word0(v: SymValue) -> bool:
    return v.origin == "calldata" and v.detail == 0


def is_selector(v: SymValue) -> bool:
    """True if ``v`` is the leading 4 bytes of calldata as a number."""
    if v.origin != "op":
        return False
    op, args = v.op, v.args
    if op == "DIV" and len(args) == 2:
        return _is_calldata_word0(args[0]) and args[1].value == _SHIFT
    if op == "SHR":
        return args[0].value == 224 and _is_calldata_word0(args[1])
    if op == "AND":
        a, b = args
        if a.value == _MASK32:
            return is_selector(b)
        if b.value == _MASK32:
            return is_selector(a)
    return False


def _depends_on_selector(v: SymValue) -> bool:
    todo = [v]
    while todo:
        cur = todo.pop()
        if is_selector(cur):
            return True
        todo.extend(cur.args)
    return False


def _comparison(cond: SymValue) -> tuple[int, SymValue, bool] | None:
    """Decode ``cond`` as selector == constant.

    Returns (constant, selector term, jump_on_match).  ``jump_on_match`` is
    False for encodings that branch away on mismatch (XOR/SUB, ISZERO(EQ)).
    """
    if cond.origin != "op":
        return None
    op, args = cond.op, cond.args
    if op == "ISZERO":
        inner = _comparison(args[0])
        if inner is not None:
            return inner[0], inner[1], not inner[2]
        return None
    if op in ("EQ", "XOR", "SUB") and len(args) == 2:
        a, b = args
        for sel, const in ((a, b), (b, a)):
            if const.is_concrete and is_selector(sel) and const.value <= _MASK32:
                return const.value, sel, op == "EQ"
    return None


def _block_is_revert_stub(cfg: CFG, start: int) -> bool:
    """A block that does nothing but abort (``PUSH 0 DUP1 REVERT`` or INVALID)."""
    b = cfg.block_at(start)
    if b is None or b.terminator_kind != "terminator":
        return False
    if b.last.mnemonic not in ("REVERT", "INVALID"):
        return False
    harmless = {"JUMPDEST", "DUP1", "DUP2", "POP", "SWAP1"}
    return all(ins.opcode.is_push or ins.mnemonic in harmless for ins in b.instructions[:-1])


def _follow_trampoline(cfg: CFG, start: int) -> int:
    """Skip blocks of the form ``[JUMPDEST] PUSH x JUMP``."""
    seen = set()
    while start not in seen:
        seen.add(start)
        b = cfg.block_at(start)
        if b is None or b.terminator_kind != "jump":
            break
        body = [i for i in b.instructions if i.mnemonic != "JUMPDEST"]
        if len(body) != 2 or not body[0].opcode.is_push:
            break
        target = body[0].push_value
        if target not in cfg.jumpdests:
            break
        start = target
    return start


def recover_dispatcher(cfg: CFG, code: bytes = b"", max_steps: int = 50_000) -> Dispatch:
    if not cfg.blocks:
        return Dispatch([], None)
    ctx = Context(cfg, code)
    work = [MachineState(ctx, pc=0)]
    done: set[int] = set()
    found: dict[int, SelectorBinding] = {}
    chain_ends: dict[int, tuple[SymValue, ...]] = {}
    continuations: set[int] = set()
    steps = 0

    while work and steps < max_steps:
        state = work.pop()
        if state.pc in done:
            continue
        done.add(state.pc)
        block = cfg.block_of(state.pc)
        if block is None:
            continue
        came_from_chain = state.pc in continuations
        entry_stack = tuple(state.stack)
        compared = False
        try:
            for ins in block.instructions:
                if ins.pc < state.pc:
                    continue
                steps += 1
                if ins.mnemonic == "JUMPI":
                    cond, dest = state.stack[-2], state.stack[-1]
                    cmp = _comparison(cond)
                    if cmp is not None and dest.is_concrete and dest.value in cfg.jumpdests:
                        const, sel, on_match = cmp
                        body = _follow_trampoline(cfg, dest.value if on_match else ins.next_pc)
                        cont = ins.next_pc if on_match else dest.value
                        sel_block = cfg.block_of(sel.pc) if sel.pc is not None else None
                        pattern = TYPE1 if sel_block is block else TYPE2
                        stack = tuple(state.stack[:-2])
                        if const not in found:
                            found[const] = SelectorBinding(const, body, pattern, stack, ins.pc)
                        continuations.add(cont)
                        nxt = state.fork()
                        nxt.stack = list(stack)
                        nxt.pc = cont
                        work.append(nxt)
                        compared = True
                        break
                    if not cond.is_concrete and _depends_on_selector(cond):
                        compared = True  # range split of a binary-search dispatcher
                succ = step(state, ins)
                if len(succ) == 2:
                    work.extend(reversed(succ))
                    break
                if ins.mnemonic in ("JUMP", "JUMPI"):
                    work.append(succ[0])
                    break
            else:
                if block.terminator_kind == "fallthrough" and state.pc not in done:
                    work.append(state)
        except (Halt, ExecutionError):
            pass
        if came_from_chain and not compared:
            chain_ends.setdefault(block.start_pc, entry_stack)

    bindings = sorted(found.values(), key=lambda b: b.compare_pc)
    fallback = None
    if bindings and chain_ends:
        first = min(chain_ends)
        entry = _follow_trampoline(cfg, first)
        if not _block_is_revert_stub(cfg, entry):
            # a trampoline is a push-and-jump, so the stack is unchanged
            fallback = SelectorBinding(None, entry, FALLBACK, chain_ends[first])
    return Dispatch(bindings, fallback)


def extract_selectors(cfg: CFG, code: bytes = b"") -> list[SelectorBinding]:
    """(selector, body entry) pairs of the dispatcher, in bytecode order."""
    return recover_dispatcher(cfg, code).bindings


def has_push4(cfg: CFG) -> bool:
    return any(ins.mnemonic == "PUSH4" for ins in cfg.instructions)


def classify_contract(
    cfg: CFG, bindings: list[SelectorBinding], symexec_bad_jump: bool = False
) -> ContractTag:
    bad = statically_invalid_jumps(cfg, reachable_only=True)
    if bad or symexec_bad_jump:
        where = ", ".join(f"{pc:#x}" for pc in sorted(bad)) or "found during execution"
        return ContractTag("je", f"invalid jump destination at {where}")
    real = [b for b in bindings if b.selector is not None]
    if not real and not has_push4(cfg):
        return ContractTag("nf", "no dispatcher and no PUSH4 in code")
    return ContractTag("normal", f"{len(real)} interface(s)")
