"""Non-payable guard detection at function entry.

A guard is a JUMPI whose condition depends on CALLVALUE alone and whose
"value was sent" side aborts with INVALID (solc < 0.4.12) or REVERT.  The
polarity of the branch is decided by evaluating the condition with
callvalue = 0 and callvalue = 1, which covers ``ISZERO(CALLVALUE)`` guards,
direct ``CALLVALUE`` jumps to a revert stub, and any DUP/SWAP shuffling in
between.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cfg import CFG
from .evm import STATE_CHANGING
from .symexec import (
    Context,
    ExecutionError,
    Halt,
    MachineState,
    PathTrace,
    SymValue,
    evaluate,
    step,
)

INVALID_0XFE = "invalid_0xfe"
REVERT_0XFD = "revert_0xfd"

GUARD_WINDOW = 3  # entry block + 2 successors


@dataclass(frozen=True)
class PaymentReport:
    nonpayable: bool
    guard_pc: int | None = None
    failure_mode: str | None = None

    def intermediate(self, selector: int | None) -> tuple[str, list]:
        """The ``(selector, [Nonpayable, bool])`` tuple handed to text generation."""
        sel = "fallback" if selector is None else f"0x{selector:08x}"
        return sel, ["Nonpayable", self.nonpayable]


PAYABLE = PaymentReport(False)


def _callvalue_pc(v: SymValue) -> int | None:
    todo = [v]
    while todo:
        cur = todo.pop()
        if cur.origin == "callvalue":
            return cur.pc
        todo.extend(cur.args)
    return None


def _polarity(cond: SymValue) -> tuple[bool, bool] | None:
    """(jumps when no value sent, jumps when value sent), or None if not a guard test."""
    if cond.is_concrete or cond.leaves() != {"callvalue"}:
        return None
    zero = evaluate(cond, {"callvalue": 0})
    one = evaluate(cond, {"callvalue": 1})
    if zero is None or one is None or bool(zero) == bool(one):
        return None
    return bool(zero), bool(one)


def _abort_mode(cfg: CFG, start: int) -> str | None:
    b = cfg.block_at(start)
    if b is None or b.terminator_kind != "terminator":
        return None
    if any(ins.mnemonic in STATE_CHANGING for ins in b.instructions):
        return None
    return {"INVALID": INVALID_0XFE, "REVERT": REVERT_0XFD}.get(b.last.mnemonic)


def detect_structural(
    cfg: CFG, entry_pc: int, initial_stack: Sequence[SymValue] = ()
) -> PaymentReport:
    ctx = Context(cfg, first_uid=1 + max((v.uid for v in initial_stack), default=0))
    # pad the stack so bodies that touch dispatcher leftovers do not underflow
    pad = [ctx.fresh("env", f"entry_stack_{i}") for i in range(16)]
    state = MachineState(ctx, pc=entry_pc, stack=pad + list(initial_stack))
    for _ in range(GUARD_WINDOW):
        block = cfg.block_of(state.pc)
        if block is None:
            return PAYABLE
        for ins in block.instructions:
            if ins.pc < state.pc:
                continue
            if ins.mnemonic in STATE_CHANGING:
                return PAYABLE
            if ins.mnemonic == "JUMPI":
                cond, dest = state.stack[-2], state.stack[-1]
                pol = _polarity(cond)
                if pol is not None:
                    if not dest.is_concrete:
                        return PAYABLE
                    value_side = dest.value if pol[1] else ins.next_pc
                    mode = _abort_mode(cfg, value_side)
                    if mode is None:
                        return PAYABLE
                    return PaymentReport(True, _callvalue_pc(cond), mode)
                if not cond.is_concrete:
                    return PAYABLE
            try:
                step(state, ins)
            except (Halt, ExecutionError):
                return PAYABLE
    return PAYABLE


def detect_from_traces(traces: Sequence[PathTrace]) -> PaymentReport:
    """Trace-based detection: some path aborts right after a callvalue-only branch."""
    for t in traces:
        if t.outcome not in ("invalid", "revert"):
            continue
        for br in t.branches:
            if br.block_index >= GUARD_WINDOW:
                break
            pol = _polarity(br.condition)
            if pol is None:
                continue
            _, jumps_with_value = pol
            effects_before = [pc for pc, _ in t.state_changes]
            if br.taken == jumps_with_value and len(t.blocks) - br.block_index <= 2 and not effects_before:
                mode = INVALID_0XFE if t.outcome == "invalid" else REVERT_0XFD
                return PaymentReport(True, _callvalue_pc(br.condition), mode)
            break
    return PAYABLE


def detect_payment(
    cfg: CFG,
    entry_pc: int,
    traces: Sequence[PathTrace] = (),
    initial_stack: Sequence[SymValue] = (),
) -> PaymentReport:
    report = detect_structural(cfg, entry_pc, initial_stack)
    if report.nonpayable:
        return report
    return detect_from_traces(traces)
