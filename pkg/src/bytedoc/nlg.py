"""Description generation: plan, realize, and the end-to-end contract pipeline.

``plan`` orders the four categories by weight (functionality, usage,
behavior, payment by default) and weights the elements inside each one.
``realize`` fills the sentence templates from ``data/nlg_templates.json``,
merges duplicate sentences and runs a small grammar pass.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources

from . import swum
from .behavior import FIXED, PRECOMPILES, VARIABLE, VIA_SELFDESTRUCT, BehaviorReport, summarize_behaviors
from .cfg import CFG, cfg_from_code
from .dispatcher import (
    ContractTag,
    Dispatch,
    SelectorBinding,
    classify_contract,
    recover_dispatcher,
)
from .evm import EmptyBytecode
from .payment import PaymentReport, detect_payment
from .sigdb import SigDatabase, builtin_database
from .symexec import ExecLimits, execute_function

FUNCTIONALITY = "functionality"
USAGE = "usage"
BEHAVIOR = "behavior"
PAYMENT = "payment"
CATEGORIES = (FUNCTIONALITY, USAGE, BEHAVIOR, PAYMENT)


@lru_cache(maxsize=1)
def templates() -> dict:
    return json.loads((resources.files("bytedoc") / "data" / "nlg_templates.json").read_text())


@dataclass(frozen=True)
class WIF:
    """Category weights; higher comes first."""

    functionality: float = 4
    usage: float = 3
    behavior: float = 2
    payment: float = 1

    @classmethod
    def default(cls) -> "WIF":
        return cls(**templates()["weights"])

    def of(self, category: str) -> float:
        return getattr(self, category)


@dataclass(frozen=True)
class Candidate:
    text: str
    source: str  # ercdoc | devdoc | swum
    weight: float = 1.0


@dataclass(frozen=True)
class InterfaceReport:
    selector: int | None
    signatures: tuple[str, ...] = ()
    candidates: tuple[Candidate, ...] = ()
    behavior: BehaviorReport = BehaviorReport()
    payment: PaymentReport = PaymentReport(False)
    entry_pc: int | None = None
    status: str = "ok"  # ok | timeout

    @property
    def selector_hex(self) -> str:
        return "fallback" if self.selector is None else f"0x{self.selector:08x}"


@dataclass(frozen=True)
class DocumentPlan:
    report: InterfaceReport
    categories: tuple[str, ...]
    elements: dict[str, tuple] = field(compare=False)


@dataclass(frozen=True)
class DescriptionDoc:
    selector: int | None
    signatures: tuple[str, ...] = ()
    paragraphs: tuple[tuple[str, str], ...] = ()
    alert: str | None = None  # nf | je
    status: str = "ok"
    behavior: BehaviorReport | None = None
    payment: PaymentReport | None = None
    entry_pc: int | None = None

    @property
    def selector_hex(self) -> str | None:
        if self.alert:
            return None
        return "fallback" if self.selector is None else f"0x{self.selector:08x}"

    def paragraph(self, category: str) -> str | None:
        return next((t for c, t in self.paragraphs if c == category), None)

    def render(self) -> str:
        if self.alert:
            return self.paragraphs[0][1]
        head = self.selector_hex
        if self.signatures:
            head += " " + " | ".join(self.signatures)
        if self.status != "ok":
            head += f" [{self.status}]"
        return "\n\n".join([f"== {head} =="] + [t for _, t in self.paragraphs])

    def to_dict(self) -> dict:
        return {
            "selector": self.selector_hex,
            "signatures": list(self.signatures),
            "paragraphs": [{"category": c, "text": t} for c, t in self.paragraphs],
            "alert": self.alert,
            "status": self.status,
            "entry_pc": self.entry_pc,
            "behavior": None if self.behavior is None else self.behavior.to_dict(),
            "payment": None if self.payment is None else asdict(self.payment),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DescriptionDoc":
        sel = d["selector"]
        selector = None if sel in (None, "fallback") else int(sel, 16)
        return cls(
            selector,
            tuple(d["signatures"]),
            tuple((p["category"], p["text"]) for p in d["paragraphs"]),
            d["alert"],
            d["status"],
            None if d["behavior"] is None else BehaviorReport.from_dict(d["behavior"]),
            None if d["payment"] is None else PaymentReport(**d["payment"]),
            d.get("entry_pc"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "DescriptionDoc":
        return cls.from_dict(json.loads(line))


def alert_doc(tag: ContractTag) -> DescriptionDoc:
    return DescriptionDoc(None, paragraphs=(("alert", tag.alert),), alert=tag.kind)


# ---------------------------------------------------------------------------
# document planner


def _behavior_elements(b: BehaviorReport) -> list[tuple[str, dict]]:
    out: list[tuple[str, dict]] = []
    if FIXED in b.eth_transfer:
        out.append(("eth_fixed", {"amount": b.fixed_amount}))
    if VARIABLE in b.eth_transfer:
        if len(b.fixed_amounts) > 1:
            out.append(("eth_variable_amounts", {"amounts": " and ".join(map(str, b.fixed_amounts))}))
        else:
            out.append(("eth_variable", {}))
    if VIA_SELFDESTRUCT in b.eth_transfer:
        out.append(("eth_selfdestruct", {}))
    for pid in sorted(b.precompile_calls):
        out.append(("precompile", {"name": PRECOMPILES[pid], "address": f"0x{pid:x}"}))
    if b.user_contract_call:
        mechs = [m.upper() for m in sorted(b.call_mechanisms)]
        joined = mechs[0] if len(mechs) == 1 else ", ".join(mechs[:-1]) + " and " + mechs[-1]
        out.append(("user_call", {"mechanisms": joined}))
    if b.contract_deployment:
        out.append(("deployment", {}))
    if b.causes_internal_tx:
        starred = len(b.eth_transfer) + b.user_contract_call + b.contract_deployment
        out.append(("internal_tx", {"count": starred}))
    if not out:
        out.append(("none", {}))
    weights = templates()["behavior_weights"]
    return sorted(out, key=lambda e: -weights.get(e[0], 0))


def _source_key(c: Candidate) -> tuple:
    weights = templates()["source_weights"]
    return (-weights.get(c.source, 0), -c.weight)


def plan(report: InterfaceReport, weights: WIF | None = None) -> DocumentPlan:
    weights = weights or WIF.default()
    elements: dict[str, tuple] = {}
    if report.candidates:
        elements[FUNCTIONALITY] = tuple(sorted(report.candidates, key=_source_key))
    if report.signatures or report.selector is None:
        elements[USAGE] = report.signatures
    elements[BEHAVIOR] = tuple(_behavior_elements(report.behavior))
    elements[PAYMENT] = (report.payment,)
    order = sorted(elements, key=lambda c: (-weights.of(c), CATEGORIES.index(c)))
    return DocumentPlan(report, tuple(order), elements)


# ---------------------------------------------------------------------------
# micro-planner and surface realizer

_NUMBER = re.compile(r"\[\[(\d+)\|([^|\]]*)\|([^\]]*)\]\]")
_ARTICLE = re.compile(r"\b([Aa]n?) ([A-Za-z0-9]+)")
# words whose spelling and sound disagree on the first letter
_AN_EXCEPTIONS = {"hour", "honest", "honor", "heir"}
_A_EXCEPTIONS = ("uni", "use", "usu", "one", "once", "eu", "uint")


def _article_for(word: str) -> str:
    w = word.lower()
    if w in _AN_EXCEPTIONS:
        return "an"
    if w.startswith(_A_EXCEPTIONS):
        return "a"
    if word.isupper() and len(word) > 1:
        # acronyms are read letter by letter
        return "an" if w[0] in "aefhilmnorsx" else "a"
    return "an" if w[0] in "aeiou" else "a"


def grammar_pass(text: str) -> str:
    """Number agreement, a/an, capitalized sentence starts, one terminal period."""
    text = _NUMBER.sub(lambda m: m.group(2) if int(m.group(1)) == 1 else m.group(3), text)

    def fix_article(m: re.Match) -> str:
        art = _article_for(m.group(2))
        if m.group(1)[0].isupper():
            art = art.capitalize()
        return f"{art} {m.group(2)}"

    text = " ".join(text.split())
    text = _ARTICLE.sub(fix_article, text)
    text = re.sub(r"\s+([.,;!?])", r"\1", text)
    text = re.sub(r"\.{2,}", ".", text)
    if text and text[-1] not in ".!?":
        text += "."
    text = re.sub(r"(^|[.!?] )([a-z])", lambda m: m.group(1) + m.group(2).upper(), text)
    return text


def _sentence(template: str, **slots) -> str:
    return grammar_pass(template.format(**slots))


def _realize_category(category: str, plan_: DocumentPlan) -> str:
    t = templates()
    items = plan_.elements[category]
    report = plan_.report
    if category == FUNCTIONALITY:
        return grammar_pass(items[0].text)
    if category == USAGE:
        if report.selector is None:
            return _sentence(t["usage"]["fallback"])
        if len(items) == 1:
            return _sentence(t["usage"]["single"], signature=items[0], selector=report.selector_hex)
        return _sentence(
            t["usage"]["collision"],
            count=len(items),
            signatures=", ".join(items),
            selector=report.selector_hex,
        )
    if category == BEHAVIOR:
        sentences: list[str] = []
        for kind, slots in items:
            s = _sentence(t["behavior"][kind], **slots)
            if s not in sentences:  # one sentence per distinct behavior
                sentences.append(s)
        return " ".join(sentences)
    pay = items[0]
    return _sentence(t["payment"]["nonpayable" if pay.nonpayable else "payable"])


def realize(plan_: DocumentPlan) -> DescriptionDoc:
    paragraphs = tuple((c, _realize_category(c, plan_)) for c in plan_.categories)
    r = plan_.report
    return DescriptionDoc(
        r.selector, r.signatures, paragraphs, None, r.status, r.behavior, r.payment, r.entry_pc
    )


# ---------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True)
class DescribeConfig:
    limits: ExecLimits = ExecLimits()
    weights: WIF = field(default_factory=WIF.default)
    jobs: int = 1
    include_fallback: bool = True


@dataclass
class ContractAnalysis:
    code: bytes
    cfg: CFG
    dispatch: Dispatch
    tag: ContractTag
    reports: list[InterfaceReport]
    docs: list[DescriptionDoc]


def functionality_candidates(signatures, db: SigDatabase) -> tuple[Candidate, ...]:
    out: list[Candidate] = []
    for sig in signatures:
        rec = db.get(sig)
        for p in rec.phrases if rec else ():
            source = "swum" if p.source == "swum-cache" else p.source
            out.append(Candidate(p.text, source, p.weight))
        if not any(c.source == "swum" for c in out):
            try:
                out.append(Candidate(swum.generate_phrase(sig), "swum"))
            except swum.PhraseUnavailable:
                pass
    return tuple(out)


def analyze_interface(
    cfg: CFG, code: bytes, binding: SelectorBinding, db: SigDatabase, limits: ExecLimits
) -> tuple[InterfaceReport, set[tuple[int, int]], bool]:
    ex = execute_function(cfg, binding.entry_pc, limits, binding.stack, code)
    behavior = summarize_behaviors(ex)
    payment = detect_payment(cfg, binding.entry_pc, list(ex), binding.stack)
    sigs: tuple[str, ...] = ()
    if binding.selector is not None:
        sigs = tuple(r.text_sig for r in db.lookup(binding.selector))
    report = InterfaceReport(
        binding.selector,
        sigs,
        functionality_candidates(sigs, db),
        behavior,
        payment,
        binding.entry_pc,
        "timeout" if ex.timed_out else "ok",
    )
    return report, ex.jump_edges, ex.bad_jump


def analyze_contract(
    code: bytes, db: SigDatabase | None = None, config: DescribeConfig = DescribeConfig()
) -> ContractAnalysis:
    if not code:
        raise EmptyBytecode("empty bytecode")
    db = db if db is not None else builtin_database()
    cfg = cfg_from_code(code)
    dispatch = recover_dispatcher(cfg, code)
    tag = classify_contract(cfg, dispatch.bindings)
    if tag.alert:
        return ContractAnalysis(code, cfg, dispatch, tag, [], [alert_doc(tag)])

    bindings = list(dispatch.bindings)
    if config.include_fallback and dispatch.fallback is not None:
        bindings.append(dispatch.fallback)

    def one(b: SelectorBinding):
        return analyze_interface(cfg, code, b, db, config.limits)

    if config.jobs > 1 and len(bindings) > 1:
        with ThreadPoolExecutor(config.jobs) as pool:
            results = list(pool.map(one, bindings))
    else:
        results = [one(b) for b in bindings]

    edges: set[tuple[int, int]] = set()
    bad_jump = False
    for _, e, bad in results:
        edges |= e
        bad_jump |= bad
    cfg = cfg.with_dynamic_edges(edges)
    tag = classify_contract(cfg, dispatch.bindings, symexec_bad_jump=bad_jump)
    if tag.alert:
        return ContractAnalysis(code, cfg, dispatch, tag, [], [alert_doc(tag)])
    reports = [r for r, _, _ in results]
    docs = [realize(plan(r, config.weights)) for r in reports]
    return ContractAnalysis(code, cfg, dispatch, tag, reports, docs)


def describe_contract(
    bytecode: bytes, db: SigDatabase | None = None, config: DescribeConfig = DescribeConfig()
) -> list[DescriptionDoc]:
    return analyze_contract(bytecode, db, config).docs
