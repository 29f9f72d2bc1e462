import time

import pytest

from bytedoc import fixtures
from bytedoc.asm import assemble
from bytedoc.cfg import cfg_from_code
from bytedoc.dispatcher import classify_contract, extract_selectors, recover_dispatcher

FIXTURES = fixtures.dispatcher_fixtures()


@pytest.mark.parametrize("fx", FIXTURES, ids=[f.name for f in FIXTURES])
def test_fixture_recovered_exactly(fx):
    cfg = cfg_from_code(fx.code)
    t0 = time.perf_counter()
    dispatch = recover_dispatcher(cfg, fx.code)
    assert time.perf_counter() - t0 < 0.1
    assert [(b.selector, b.entry_pc) for b in dispatch.bindings] == fx.expected
    if fx.fallback_entry is not None:
        assert dispatch.fallback is not None
        assert dispatch.fallback.entry_pc == fx.fallback_entry


def test_figure_patterns_and_pcs():
    fx = fixtures.figure_dispatcher()
    bindings = extract_selectors(cfg_from_code(fx.code), fx.code)
    assert [(b.selector_hex, b.pattern) for b in bindings] == [("0x06fdde03", "type1"), ("0x18160ddd", "type2")]
    assert [b.compare_pc for b in bindings] == [0x3E, 0x49]


def test_stack_at_entry_holds_selector():
    fx = fixtures.figure_dispatcher()
    (b, _) = extract_selectors(cfg_from_code(fx.code), fx.code)
    assert b.stack and b.stack[-1].leaves() == {"calldata"}


def test_push4_compared_with_non_selector_is_not_a_binding():
    prog = assemble(
        """
        CALLVALUE | PUSH4 0x12345678 | EQ | PUSH @x | JUMPI | STOP
        x: | JUMPDEST | STOP
        """
    )
    assert extract_selectors(cfg_from_code(prog.code), prog.code) == []


def test_classify():
    nf = fixtures.nf_fixture().code
    cfg = cfg_from_code(nf)
    assert classify_contract(cfg, extract_selectors(cfg, nf)).alert == "ALERT: This is an insecure NF contract!"
    je = fixtures.je_fixture().code
    cfg = cfg_from_code(je)
    assert classify_contract(cfg, extract_selectors(cfg, je)).kind == "je"
    ok = fixtures.normal_fixture().code
    cfg = cfg_from_code(ok)
    tag = classify_contract(cfg, extract_selectors(cfg, ok))
    assert tag.kind == "normal" and tag.alert is None
    assert classify_contract(cfg, [], symexec_bad_jump=True).kind == "je"


def test_push4_without_dispatcher_is_not_nf():
    code = assemble("PUSH4 0xdeadbeef | POP | STOP").code
    cfg = cfg_from_code(code)
    assert classify_contract(cfg, extract_selectors(cfg, code)).kind == "normal"
