"""Hand-assembled contracts used by the tests, the acceptance suite and the scripts.

Every fixture carries its own expected answer, taken from the assembler's
symbol table rather than from the analysis under test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .asm import Program, assemble

SHIFT224 = "0x" + "01" + "00" * 28  # 2**224 as a PUSH29 literal

NAME = 0x06FDDE03
TOTAL_SUPPLY = 0x18160DDD
TRANSFER = 0xA9059CBB
BALANCE_OF = 0x70A08231
PAYMENT_A = 0x66117276
PAYMENT_B = 0x62C06767


@dataclass
class DispatcherFixture:
    name: str
    program: Program
    expected: list[tuple[int, int]]  # (selector, body entry pc) in bytecode order
    fallback_entry: int | None = None

    @property
    def code(self) -> bytes:
        return self.program.code


@dataclass
class PaymentFixture:
    name: str
    program: Program
    selector: int | None  # None for the fallback
    nonpayable: bool
    failure_mode: str | None = None
    guard_pc: int | None = None

    @property
    def code(self) -> bytes:
        return self.program.code


@dataclass
class BehaviorFixture:
    name: str
    program: Program
    selector: int
    category: str
    internal_tx: bool
    detail: dict = field(default_factory=dict)

    @property
    def code(self) -> bytes:
        return self.program.code


# ---------------------------------------------------------------------------
# building blocks

RETURN_WORD = "PUSH1 0x2a | PUSH1 0x00 | MSTORE | PUSH1 0x20 | PUSH1 0x00 | RETURN"
REVERT_STUB = "PUSH1 0x00 | DUP1 | REVERT"


def guarded(body: str, label: str, abort: str = "revert") -> str:
    """Prefix ``body`` with a solc-style non-payable check."""
    fail = REVERT_STUB if abort == "revert" else "INVALID"
    return f"""
    CALLVALUE | DUP1 | ISZERO | PUSH @{label}_ok | JUMPI | {fail}
    {label}_ok: | JUMPDEST | POP
    {body}
    """


def _selector_code(style: str) -> str:
    if style == "shr":
        return "PUSH1 0x00 | CALLDATALOAD | PUSH1 0xe0 | SHR"
    if style == "shr_masked":
        return "PUSH1 0x00 | CALLDATALOAD | PUSH1 0xe0 | SHR | PUSH4 0xffffffff | AND"
    if style == "div":
        return f"PUSH4 0xffffffff | PUSH29 {SHIFT224} | PUSH1 0x00 | CALLDATALOAD | DIV | AND"
    raise ValueError(style)


def _compare(sel: int, target: str, encoding: str, tag: str) -> str:
    s = f"0x{sel:08x}"
    if encoding == "eq":
        return f"DUP1 | PUSH4 {s} | EQ | PUSH @{target} | JUMPI"
    if encoding == "eq_swapped":
        return f"PUSH4 {s} | DUP2 | EQ | PUSH @{target} | JUMPI"
    inverse = {"xor": "XOR", "sub": "SUB", "iszero_eq": "EQ | ISZERO"}[encoding]
    return f"""DUP1 | PUSH4 {s} | {inverse} | PUSH @skip_{tag} | JUMPI | PUSH @{target} | JUMP
    skip_{tag}: | JUMPDEST"""


def solc_like(
    selectors: list[int],
    style: str = "shr",
    layout: str = "linear",
    encodings: list[str] | None = None,
    size_check: bool = True,
    fallback: str | None = None,
    bodies: dict[int, str] | None = None,
) -> tuple[Program, list[str]]:
    """Assemble a dispatcher in the shape compilers emit.

    ``layout`` is ``linear`` (first comparison shares the selector block,
    the rest read it from the stack), ``type2`` (selector computed in an
    earlier block), ``type1`` (selector recomputed before every comparison)
    or ``split`` (binary-search split on a pivot, as solc does for larger
    contracts).  Returns the program and the body labels in selector order.
    """
    encodings = encodings or ["eq"] * len(selectors)
    bodies = bodies or {}
    labels = [f"f{i}" for i in range(len(selectors))]
    src = ["PUSH1 0x80 | PUSH1 0x40 | MSTORE"]
    if size_check:
        src.append("PUSH1 0x04 | CALLDATASIZE | LT | PUSH @fallback | JUMPI")

    def chain(idx: list[int]) -> list[str]:
        out = []
        for i in idx:
            if layout == "type1":
                out.append(_selector_code(style))
                out.append(f"PUSH4 0x{selectors[i]:08x} | EQ | PUSH @{labels[i]} | JUMPI")
            else:
                out.append(_compare(selectors[i], labels[i], encodings[i], str(i)))
        out.append("PUSH @fallback | JUMP")
        return out

    order = list(range(len(selectors)))
    if layout != "type1":
        src.append(_selector_code(style))
    if layout == "type2":
        src.append("PUSH @chain | JUMP | chain: | JUMPDEST")
    if layout == "split" and len(order) > 1:
        half = len(order) // 2
        lo, hi = order[:half], order[half:]
        pivot = selectors[hi[0]]
        src.append(f"DUP1 | PUSH4 0x{pivot:08x} | GT | PUSH @hi | JUMPI")
        src.extend(chain(lo))
        src.append("hi: | JUMPDEST")
        src.extend(chain(hi))
    else:
        src.extend(chain(order))

    src.append("fallback: | JUMPDEST")
    src.append(fallback if fallback is not None else REVERT_STUB)
    for i, lab in enumerate(labels):
        src.append(f"{lab}: | JUMPDEST")
        src.append(bodies.get(selectors[i], guarded(RETURN_WORD, lab)))
    return assemble("\n".join(src)), labels


def _fixture(name, selectors, **kw) -> DispatcherFixture:
    prog, labels = solc_like(selectors, **kw)
    has_fallback = kw.get("fallback") is not None
    return DispatcherFixture(
        name,
        prog,
        [(s, prog.labels[lab]) for s, lab in zip(selectors, labels)],
        prog.labels["fallback"] if has_fallback else None,
    )


def random_selectors(n: int, seed: int) -> list[int]:
    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < n:
        s = rng.getrandbits(32)
        if s not in out:
            out.append(s)
    return out


# ---------------------------------------------------------------------------
# dispatcher fixtures


def figure_dispatcher() -> DispatcherFixture:
    """Two-function dispatcher laid out like the classic solc 0.4 output.

    The first comparison (name()) sits in the block that computes the
    selector, pcs 0x32..0x3e; the second (totalSupply()) reuses the selector
    from the stack, pcs 0x3f..0x49.
    """
    src = f"""
    PUSH1 0x80 | PUSH1 0x40 | MSTORE
    PUSH1 0x04 | CALLDATASIZE | LT | PUSH @fallback | JUMPI
    PUSH4 0xffffffff | PUSH29 {SHIFT224} | PUSH1 0x00
    CALLDATALOAD | DIV | AND                       ; 0x32..0x34
    PUSH4 0x{NAME:08x} | DUP2 | EQ | PUSH1 @name | JUMPI      ; jumpi at 0x3e
    DUP1 | PUSH4 0x{TOTAL_SUPPLY:08x} | EQ | PUSH @supply | JUMPI ; 0x3f..0x49
    fallback: | JUMPDEST | {REVERT_STUB}
    name: | JUMPDEST
    {guarded(RETURN_WORD, "name", abort="invalid")}
    supply: | JUMPDEST
    {guarded(RETURN_WORD, "supply", abort="invalid")}
    """
    prog = assemble(src)
    return DispatcherFixture(
        "figure",
        prog,
        [(NAME, prog.labels["name"]), (TOTAL_SUPPLY, prog.labels["supply"])],
    )


def dispatcher_fixtures() -> list[DispatcherFixture]:
    mixed = ["eq", "xor"] * 6
    return [
        figure_dispatcher(),
        _fixture("shr-1", random_selectors(1, 1)),
        _fixture("shr-2", [NAME, TOTAL_SUPPLY]),
        _fixture("shr-3-fallback", random_selectors(3, 3), fallback="STOP"),
        _fixture("div-4", random_selectors(4, 4), style="div"),
        _fixture("type2-5", random_selectors(5, 5), layout="type2"),
        _fixture("type1-3", random_selectors(3, 6), layout="type1"),
        _fixture("swapped-6", random_selectors(6, 7), encodings=["eq_swapped"] * 6),
        _fixture("iszero-eq-4", random_selectors(4, 8), encodings=["iszero_eq"] * 4),
        _fixture("xor-4", random_selectors(4, 9), encodings=["xor"] * 4),
        _fixture("sub-3", random_selectors(3, 10), encodings=["sub"] * 3),
        _fixture("split-8", sorted(random_selectors(8, 11)), layout="split"),
        _fixture("split-16", sorted(random_selectors(16, 12)), layout="split"),
        _fixture("linear-32", random_selectors(32, 13)),
        _fixture("split-64", sorted(random_selectors(64, 14)), layout="split"),
        _fixture("masked-7", random_selectors(7, 15), style="shr_masked"),
        _fixture("div-type2-10", random_selectors(10, 16), style="div", layout="type2"),
        _fixture("mixed-12", random_selectors(12, 17), encodings=mixed),
        _fixture("no-size-check-5", random_selectors(5, 18), size_check=False),
        _fixture(
            "div-split-24-fallback",
            sorted(random_selectors(24, 19)),
            style="div",
            layout="split",
            fallback="CALLER | PUSH1 0x00 | SSTORE | STOP",
        ),
    ]


# ---------------------------------------------------------------------------
# payment fixtures


def payment_contract_a() -> PaymentFixture:
    """Pre-0.4.12 style guard aborting with INVALID; body entry at 0x149."""
    src = f"""
    PUSH1 0x60 | PUSH1 0x40 | MSTORE
    PUSH1 0x04 | CALLDATASIZE | LT | PUSH @fallback | JUMPI
    PUSH4 0xffffffff | PUSH29 {SHIFT224} | PUSH1 0x00 | CALLDATALOAD | DIV | AND
    PUSH4 0x{PAYMENT_A:08x} | DUP2 | EQ | PUSH @body | JUMPI
    fallback: | JUMPDEST | INVALID
    .org 0x149
    body: | JUMPDEST
    CALLVALUE | ISZERO | PUSH @ok | JUMPI   ; 0x14a..0x14f
    INVALID
    ok: | JUMPDEST | {RETURN_WORD}
    """
    prog = assemble(src)
    return PaymentFixture("guard+invalid", prog, PAYMENT_A, True, "invalid_0xfe", 0x14A)


def payment_contract_b() -> PaymentFixture:
    """0.4.12+ style guard aborting with REVERT; CALLVALUE at 0x35."""
    src = f"""
    PUSH1 0x80 | PUSH1 0x40 | MSTORE
    PUSH1 0x04 | CALLDATASIZE | LT | PUSH1 @fallback | JUMPI
    PUSH1 0x00 | CALLDATALOAD | PUSH1 0xe0 | SHR
    DUP1 | PUSH4 0x{PAYMENT_B:08x} | EQ | PUSH1 @body | JUMPI
    fallback: | JUMPDEST | {REVERT_STUB}
    .org 0x34
    body: | JUMPDEST
    CALLVALUE | DUP1 | ISZERO | PUSH1 @ok | JUMPI | {REVERT_STUB}   ; 0x35..0x3e
    ok: | JUMPDEST | POP | {RETURN_WORD}
    """
    prog = assemble(src)
    return PaymentFixture("guard+revert", prog, PAYMENT_B, True, "revert_0xfd", 0x35)


def _single(selector: int, body: str, fallback: str | None = None) -> Program:
    prog, _ = solc_like([selector], bodies={selector: body}, fallback=fallback)
    return prog


def payment_fixtures() -> list[PaymentFixture]:
    sel = 0xD0E30DB0  # deposit()
    shuffled = f"""
    PUSH1 0x01 | CALLVALUE | SWAP1 | POP | PUSH1 0x07 | SWAP1 | DUP1 | SWAP2 | POP
    ISZERO | PUSH @sh_ok | JUMPI | {REVERT_STUB}
    sh_ok: | JUMPDEST | POP | {RETURN_WORD}
    """
    flipped = f"""
    CALLVALUE | PUSH @fl_bad | JUMPI | {RETURN_WORD}
    fl_bad: | JUMPDEST | {REVERT_STUB}
    """
    payable = f"CALLVALUE | PUSH1 0x00 | SSTORE | {RETURN_WORD}"
    fb_guard = """
    CALLVALUE | ISZERO | PUSH @fb_ok | JUMPI | INVALID
    fb_ok: | JUMPDEST | STOP
    """
    shuffled_prog = _single(sel, shuffled)
    flipped_prog = _single(sel, flipped)
    fb_prog = _single(sel, guarded(RETURN_WORD, "d0"), fallback=fb_guard)
    return [
        payment_contract_b(),
        payment_contract_a(),
        PaymentFixture("no guard", _single(sel, payable), sel, False),
        PaymentFixture(
            "shuffled guard", shuffled_prog, sel, True, "revert_0xfd",
            shuffled_prog.labels["f0"] + 3,
        ),
        PaymentFixture(
            "flipped guard", flipped_prog, sel, True, "revert_0xfd", flipped_prog.labels["f0"] + 1
        ),
        PaymentFixture("fallback guard", fb_prog, None, True, "invalid_0xfe", fb_prog.labels["fallback"] + 1),
    ]


# ---------------------------------------------------------------------------
# behavior fixtures

_ADDR = "0x00000000000000000000000000000000000000a1"


def _call(value: str, addr: str = f"PUSH20 {_ADDR}", op: str = "CALL") -> str:
    """Push CALL-family operands and issue ``op``; value omitted for DELEGATECALL/STATICCALL."""
    head = "PUSH1 0x00 | PUSH1 0x00 | PUSH1 0x00 | PUSH1 0x00"
    v = f" | {value}" if op in ("CALL", "CALLCODE") else ""
    return f"{head}{v} | {addr} | GAS | {op} | POP"


BEHAVIOR_BODIES = {
    "eth fixed": (
        f"{_call('PUSH2 0x03e8')} | STOP",
        "eth_transfer",
        True,
        {"eth_transfer": ["fixed"], "fixed_amounts": [1000]},
    ),
    "eth variable": (
        f"{_call('PUSH1 0x04 | CALLDATALOAD')} | STOP",
        "eth_transfer",
        True,
        {"eth_transfer": ["variable"]},
    ),
    "selfdestruct": ("CALLER | SELFDESTRUCT", "eth_transfer", True, {"eth_transfer": ["via_selfdestruct"]}),
    "precompile 0x1": (
        f"{_call('PUSH1 0x00', addr='PUSH1 0x01')} | STOP",
        "precompile_call",
        False,
        {"precompile_calls": [1]},
    ),
    "user call": (
        f"{_call('PUSH1 0x00', addr='PUSH1 0x24 | CALLDATALOAD')} | STOP",
        "user_contract_call",
        True,
        {"call_mechanisms": ["call"]},
    ),
    "user delegatecall/staticcall/callcode": (
        " | ".join(
            [
                _call("", op="DELEGATECALL"),
                _call("", op="STATICCALL"),
                _call("PUSH1 0x00", op="CALLCODE"),
                "STOP",
            ]
        ),
        "user_contract_call",
        True,
        {"call_mechanisms": ["callcode", "delegatecall", "staticcall"]},
    ),
    "create": (
        "PUSH1 0x00 | PUSH1 0x00 | PUSH1 0x00 | CREATE | POP | STOP",
        "contract_deployment",
        True,
        {"contract_deployment": True},
    ),
}


def behavior_fixtures() -> list[BehaviorFixture]:
    out = []
    for i, (name, (body, cat, itx, detail)) in enumerate(BEHAVIOR_BODIES.items()):
        sel = 0x10000000 + i
        out.append(BehaviorFixture(name, _single(sel, body), sel, cat, itx, detail))
    return out


# ---------------------------------------------------------------------------
# insecure-contract fixtures


def nf_fixture() -> Program:
    """No dispatcher and no PUSH4: every call runs the same code."""
    return assemble(
        """
        PUSH1 0x80 | PUSH1 0x40 | MSTORE
        CALLER | PUSH1 0x00 | SSTORE
        CALLVALUE | PUSH1 0x01 | SSTORE
        STOP
        """
    )


def je_fixture() -> Program:
    """A normal-looking dispatcher whose body jumps into PUSH data."""
    body = "PUSH1 0x06 | JUMP"  # pc 6 is the immediate of PUSH1 0x04
    return _single(0xB6B55F25, body)


def normal_fixture() -> Program:
    return dispatcher_fixtures()[2].program


# ---------------------------------------------------------------------------
# end-to-end fixture


def composite_fixture() -> DispatcherFixture:
    """totalSupply() non-payable, deposit() payable, withdraw(uint256) sending ETH."""
    deposit = 0xD0E30DB0
    withdraw = 0x2E1A7D4D
    bodies = {
        TOTAL_SUPPLY: guarded("PUSH1 0x00 | SLOAD | PUSH1 0x00 | MSTORE | PUSH1 0x20 | PUSH1 0x00 | RETURN", "ts"),
        deposit: "CALLVALUE | CALLER | SSTORE | STOP",
        withdraw: guarded(
            f"{_call('PUSH1 0x04 | CALLDATALOAD', addr='CALLER')} | STOP",
            "wd",
        ),
    }
    sels = [TOTAL_SUPPLY, deposit, withdraw]
    return _fixture("composite", sels, bodies=bodies)


# ---------------------------------------------------------------------------
# annotation corpora

# "details" sentences collected for totalSupply() across verified sources
TOTAL_SUPPLY_SENTENCES = (
    "Total supply of tokens.",
    "Returns the total token supply.",
    "Function to access total supply of tokens.",
    "Total Supply.",
    "Retrieves total supply.",
    "Obtain total number of tokens in existence.",
)

# devdoc phrases for the composite fixture's non-standard functions
COMPOSITE_DEVDOC = (
    "deposit()\tDeposits ETH into the caller's balance.\n"
    "withdraw(uint256)\tSends an amount of ETH back to the caller.\n"
)
