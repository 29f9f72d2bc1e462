"""Acceptance criteria 1-9.

Each criterion is a function returning ``(ok, detail)``. Under pytest every
one is also a test; run the file directly for a one-line verdict per
criterion::

    python3 tests/test_acceptance.py
"""

from __future__ import annotations

import io
import json
import math
import random
import sys
import time
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from reference_evm import run as reference_run, straight_line_program  # noqa: E402

from bytedoc import cli, fixtures  # noqa: E402
from bytedoc.behavior import summarize_behaviors  # noqa: E402
from bytedoc.cfg import cfg_from_code  # noqa: E402
from bytedoc.dispatcher import classify_contract, extract_selectors, recover_dispatcher  # noqa: E402
from bytedoc.evm import disassemble, jumpdest_set, serialize  # noqa: E402
from bytedoc.nlg import DescriptionDoc, describe_contract  # noqa: E402
from bytedoc.payment import detect_payment  # noqa: E402
from bytedoc.sigdb import SigDatabase, builtin_database, keccak_selector  # noqa: E402
from bytedoc.summarize import (  # noqa: E402
    Corpus,
    MinHasher,
    SummarizeConfig,
    build_graph,
    content_words,
    exact_jaccard,
    pagerank,
    summarize,
)
from bytedoc.swum import PhraseUnavailable, generate_phrase  # noqa: E402
from bytedoc.symexec import evaluate, execute_function  # noqa: E402

GOLDEN = HERE / "golden"

GOLDEN_SIGNATURES = {
    "transfer(address,uint256)": "a9059cbb",
    "name()": "06fdde03",
    "totalSupply()": "18160ddd",
    "balanceOf(address)": "70a08231",
    "approve(address,uint256)": "095ea7b3",
    "transferFrom(address,address,uint256)": "23b872dd",
    "allowance(address,address)": "dd62ed3e",
    "decimals()": "313ce567",
    "symbol()": "95d89b41",
    "supportsInterface(bytes4)": "01ffc9a7",
}

MINHASH_TOLERANCE = 3 / math.sqrt(256)


def _binding(code: bytes, selector):
    cfg = cfg_from_code(code)
    dispatch = recover_dispatcher(cfg, code)
    if selector is None:
        return cfg, dispatch.fallback
    return cfg, next(b for b in dispatch.bindings if b.selector == selector)


# ---------------------------------------------------------------------------


def criterion_1():
    failures, slowest = [], 0.0
    sizes = set()
    for fx in fixtures.dispatcher_fixtures():
        cfg = cfg_from_code(fx.code)
        t0 = time.perf_counter()
        got = [(b.selector, b.entry_pc) for b in extract_selectors(cfg, fx.code)]
        elapsed = time.perf_counter() - t0
        slowest = max(slowest, elapsed)
        sizes.add(len(fx.expected))
        if sorted(got) != sorted(fx.expected) or elapsed >= 0.1:
            failures.append(fx.name)
    fig = fixtures.figure_dispatcher()
    pairs = {s for s, _ in fig.expected}
    anchor_pair = pairs == {fixtures.NAME, fixtures.TOTAL_SUPPLY} and selector_ok("name()", fixtures.NAME) and selector_ok("totalSupply()", fixtures.TOTAL_SUPPLY)
    n = len(fixtures.dispatcher_fixtures())
    ok = not failures and n == 20 and anchor_pair and min(sizes) == 1 and max(sizes) == 64
    return ok, f"{n} fixtures ({min(sizes)}-{max(sizes)} functions), failures={failures}, slowest={slowest * 1e3:.1f} ms"


def selector_ok(sig: str, selector: int) -> bool:
    return int.from_bytes(keccak_selector(sig), "big") == selector


def criterion_2():
    from Crypto.Hash import keccak  # independent oracle

    bad = []
    for sig, hexsel in GOLDEN_SIGNATURES.items():
        oracle = keccak.new(digest_bits=256, data=sig.encode()).digest()[:4]
        ours = keccak_selector(sig)
        if ours != oracle or ours.hex() != hexsel:
            bad.append(sig)
    return not bad, f"{len(GOLDEN_SIGNATURES)} signatures vs pycryptodome Keccak-256, mismatches={bad}"


def criterion_3():
    errors, tuples = [], {}
    for fx in fixtures.payment_fixtures():
        cfg, b = _binding(fx.code, fx.selector)
        ex = execute_function(cfg, b.entry_pc, initial_stack=b.stack, code=fx.code)
        rep = detect_payment(cfg, b.entry_pc, list(ex), b.stack)
        if rep.nonpayable != fx.nonpayable or rep.failure_mode != fx.failure_mode:
            errors.append(fx.name)
        elif fx.guard_pc is not None and rep.guard_pc != fx.guard_pc:
            errors.append(fx.name)
        tuples[fx.name] = rep.intermediate(fx.selector)
    anchors = (
        tuples.get("guard+invalid") == ("0x66117276", ["Nonpayable", True])
        and tuples.get("guard+revert") == ("0x62c06767", ["Nonpayable", True])
    )
    ok = not errors and anchors and len(tuples) == 6
    return ok, f"6 fixtures, errors={errors}, anchors {tuples.get('guard+invalid')} {tuples.get('guard+revert')}"


def criterion_4():
    bad = []
    for fx in fixtures.behavior_fixtures():
        cfg, b = _binding(fx.code, fx.selector)
        rep = summarize_behaviors(execute_function(cfg, b.entry_pc, initial_stack=b.stack, code=fx.code))
        if rep.categories() != [fx.category] or rep.causes_internal_tx != fx.internal_tx:
            bad.append((fx.name, rep.categories(), rep.causes_internal_tx))
    return not bad, f"7 table rows, mismatches={bad}"


def criterion_5():
    def alert_of(code: bytes):
        docs = describe_contract(code)
        return docs[0].render() if len(docs) == 1 and docs[0].alert else None

    nf = alert_of(fixtures.nf_fixture().code)
    je = alert_of(fixtures.je_fixture().code)
    normal_code = fixtures.normal_fixture().code
    cfg = cfg_from_code(normal_code)
    normal = classify_contract(cfg, extract_selectors(cfg, normal_code)).alert
    normal_docs = describe_contract(normal_code)
    ok = (
        nf == "ALERT: This is an insecure NF contract!"
        and je == "ALERT: This is an insecure JE contract!"
        and normal is None
        and all(d.alert is None for d in normal_docs)
    )
    return ok, f"NF={nf!r} JE={je!r} normal={normal!r}"


def criterion_6():
    t0 = time.perf_counter()
    corpus = Corpus(fixtures.TOTAL_SUPPLY_SENTENCES, "totalSupply()")
    config = SummarizeConfig(num_hashes=256)
    result = summarize(corpus, config)
    elapsed = time.perf_counter() - t0
    phrase_words = {w for p in result.phrases for w in p.split()}
    hasher = MinHasher(config.num_hashes, config.seed)
    worst = max(
        abs(hasher.jaccard(content_words(s), phrase_words) - exact_jaccard(content_words(s), phrase_words))
        for s in corpus.sentences
    )
    ok = result.sentence == "Total supply of tokens." and worst <= MINHASH_TOLERANCE and elapsed < 1.0
    return ok, f"top={result.sentence!r}, max |minhash-exact|={worst:.3f} (<= {MINHASH_TOLERANCE:.3f}), {elapsed:.3f} s"


def criterion_7():
    a = generate_phrase("isPresaleReady()")
    b = generate_phrase("getBlockNM()")
    try:
        generate_phrase("MAX_INVESTMENTS_BEFORE_CHANGE()")
        c = "phrase produced"
    except PhraseUnavailable:
        c = "PhraseUnavailable"
    ok = a == "Checks whether the presale is ready" and b == "Gets block nm" and c == "PhraseUnavailable"
    return ok, f"{a!r} / {b!r} / {c}"


# criterion 8 parts --------------------------------------------------------


def roundtrip_10k() -> bool:
    rng = random.Random(0)
    for _ in range(10_000):
        data = rng.randbytes(rng.randint(1, 64))
        if serialize(disassemble(data)) != data:
            return False
    return True


def jumpdest_shadowing() -> bool:
    # 0x5b inside PUSH data is not a jump destination
    return (
        jumpdest_set(bytes.fromhex("605b5b")) == {2}
        and jumpdest_set(bytes.fromhex("7f" + "5b" * 32 + "5b")) == {33}
        and jumpdest_set(bytes.fromhex("615b")) == set()
    )


def symexec_soundness(n: int = 50) -> bool:
    env = {"caller": 0xA11CE, "callvalue": 10**18}
    for seed in range(n):
        code = straight_line_program(seed)
        ex = execute_function(cfg_from_code(code), 0, code=code)
        if len(ex) != 1 or ex.traces[0].outcome != "stop":
            return False
        if [evaluate(v, env) for v in ex.traces[0].stack] != reference_run(code, env):
            return False
    return True


def sigdb_rederivation() -> bool:
    good = builtin_database().dumps()
    tampered = good.replace("a9059cbb\ttransfer(", "a9059cbc\ttransfer(")
    db = SigDatabase()
    db.merge_text(tampered)
    return (
        db.get("transfer(address,uint256)") is None
        and any("a9059cbc" in r for r in db.rejected)
        and len(db) == len(builtin_database()) - 1
    )


def textrank_convergence() -> bool:
    graph = build_graph(Corpus(fixtures.TOTAL_SUPPLY_SENTENCES), 4)
    result = pagerank(graph, eps=1e-6)
    return result.converged and result.iterations < 200


def nlg_golden() -> bool:
    db = composite_db()
    first = [d.render() for d in describe_contract(fixtures.composite_fixture().code, db)]
    second = [d.render() for d in describe_contract(fixtures.composite_fixture().code, composite_db())]
    golden = (GOLDEN / "composite.txt").read_text()
    return first == second and "\n\n".join(first) + "\n" == golden


def criterion_8():
    t0 = time.perf_counter()
    parts = {
        "roundtrip": roundtrip_10k(),
        "jumpdest": jumpdest_shadowing(),
        "symexec": symexec_soundness(),
        "sigdb": sigdb_rederivation(),
        "textrank": textrank_convergence(),
        "nlg": nlg_golden(),
    }
    elapsed = time.perf_counter() - t0
    failed = [k for k, v in parts.items() if not v]
    return not failed and elapsed < 60, f"failed={failed}, {elapsed:.1f} s"


# criterion 9 --------------------------------------------------------------


def composite_db() -> SigDatabase:
    db = builtin_database()
    db.import_signature_lines("deposit()\nwithdraw(uint256)\n")
    db.import_phrases(fixtures.COMPOSITE_DEVDOC)
    return db


def criterion_9(tmp: Path | None = None):
    import tempfile

    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        (d / "composite.hex").write_text(fixtures.composite_fixture().program.hex + "\n")
        (d / "sigdb.tsv").write_text(composite_db().dumps())
        out = io.StringIO()
        code = cli.main(
            ["describe", "--file", str(d / "composite.hex"), "--sigdb", str(d / "sigdb.tsv"), "--format", "jsonl"],
            out=out,
        )
    lines = [ln for ln in out.getvalue().splitlines() if ln.strip()]
    docs = [DescriptionDoc.from_json(ln) for ln in lines]
    order = ["functionality", "usage", "behavior", "payment"]
    shape_ok = len(docs) == 3 and all([c for c, _ in doc.paragraphs] == order for doc in docs)
    roundtrip = all(DescriptionDoc.from_json(d.to_json()) == d and json.loads(d.to_json()) == json.loads(ln)
                    for d, ln in zip(docs, lines))
    eth = any("ETH" in d.paragraph("behavior") and "internal" in d.paragraph("behavior") for d in docs)
    payable = sorted(d.paragraph("payment").startswith("This interface is payable") for d in docs) == [False, False, True]
    ok = code == 0 and shape_ok and roundtrip and eth and payable
    return ok, f"exit={code}, docs={len(docs)}, four-paragraph functionality-first={shape_ok}, round-trip={roundtrip}"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9]
TITLES = {
    1: "selector recovery",
    2: "keccak selectors",
    3: "payment classification",
    4: "behavior table coverage",
    5: "insecure tagging",
    6: "summarization",
    7: "swum phrases",
    8: "property suites",
    9: "end-to-end describe",
}


def report(i: int) -> bool:
    ok, detail = CRITERIA[i - 1]()
    print(f"{'PASS' if ok else 'FAIL'} criterion {i} ({TITLES[i]}): {detail}")
    return ok


@pytest.mark.parametrize("i", range(1, 10))
def test_criterion(i):
    assert report(i)


if __name__ == "__main__":
    results = [report(i) for i in range(1, 10)]
    sys.exit(0 if all(results) else 1)
