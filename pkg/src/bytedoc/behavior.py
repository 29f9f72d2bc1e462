"""Fold message-call events from execution paths into interface behaviors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .symexec import PathTrace, as_constant

PRECOMPILES = {
    1: "ECDSA recovery",
    2: "SHA-256 hash",
    3: "RIPEMD-160 hash",
    4: "identity",
    5: "modular exponentiation",
    6: "bn-curve addition",
    7: "bn-curve scalar multiplication",
    8: "bn-curve pairing check",
}

FIXED = "fixed"
VARIABLE = "variable"
VIA_SELFDESTRUCT = "via_selfdestruct"


@dataclass(frozen=True)
class BehaviorReport:
    # subset of {fixed, variable, via_selfdestruct}; at most one of fixed/variable
    eth_transfer: frozenset[str] = frozenset()
    fixed_amounts: tuple[int, ...] = ()
    precompile_calls: frozenset[int] = frozenset()
    user_contract_call: bool = False
    call_mechanisms: frozenset[str] = frozenset()
    contract_deployment: bool = False

    @property
    def causes_internal_tx(self) -> bool:
        return bool(self.eth_transfer) or self.user_contract_call or self.contract_deployment

    @property
    def fixed_amount(self) -> int | None:
        if FIXED in self.eth_transfer:
            return self.fixed_amounts[0]
        return None

    @property
    def is_empty(self) -> bool:
        return not (self.eth_transfer or self.precompile_calls or self.user_contract_call or self.contract_deployment)

    def categories(self) -> list[str]:
        out = []
        if self.eth_transfer:
            out.append("eth_transfer")
        if self.precompile_calls:
            out.append("precompile_call")
        if self.user_contract_call:
            out.append("user_contract_call")
        if self.contract_deployment:
            out.append("contract_deployment")
        return out

    def to_dict(self) -> dict:
        return {
            "eth_transfer": sorted(self.eth_transfer),
            "fixed_amounts": list(self.fixed_amounts),
            "precompile_calls": sorted(self.precompile_calls),
            "user_contract_call": self.user_contract_call,
            "call_mechanisms": sorted(self.call_mechanisms),
            "contract_deployment": self.contract_deployment,
            "causes_internal_tx": self.causes_internal_tx,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BehaviorReport":
        return cls(
            frozenset(d["eth_transfer"]),
            tuple(d["fixed_amounts"]),
            frozenset(d["precompile_calls"]),
            d["user_contract_call"],
            frozenset(d["call_mechanisms"]),
            d["contract_deployment"],
        )


def summarize_behaviors(traces: Iterable[PathTrace]) -> BehaviorReport:
    amounts: set[int] = set()
    variable = False
    selfdestruct = False
    precompiles: set[int] = set()
    mechanisms: set[str] = set()
    deployment = False

    for trace in traces:
        for ev in trace.call_events:
            if ev.opcode in ("CALL", "CALLCODE"):
                value = as_constant(ev.value)
                if value is None:
                    variable = True
                elif value > 0:
                    amounts.add(value)
            if ev.opcode == "CALL":
                addr = as_constant(ev.address)
                if addr is not None and addr in PRECOMPILES:
                    precompiles.add(addr)
                elif as_constant(ev.value) == 0:
                    # value-carrying CALLs are reported as ETH transfers
                    mechanisms.add("call")
            elif ev.opcode in ("CALLCODE", "STATICCALL", "DELEGATECALL"):
                mechanisms.add(ev.opcode.lower())
            elif ev.opcode == "CREATE":
                deployment = True
            elif ev.opcode == "SELFDESTRUCT":
                selfdestruct = True

    eth: set[str] = set()
    if variable or len(amounts) > 1:
        eth.add(VARIABLE)
    elif amounts:
        eth.add(FIXED)
    if selfdestruct:
        eth.add(VIA_SELFDESTRUCT)
    return BehaviorReport(
        frozenset(eth),
        tuple(sorted(amounts)),
        frozenset(precompiles),
        bool(mechanisms),
        frozenset(mechanisms),
        deployment,
    )
