import pytest

from bytedoc import fixtures
from bytedoc.behavior import BehaviorReport, summarize_behaviors
from bytedoc.cfg import cfg_from_code
from bytedoc.dispatcher import recover_dispatcher
from bytedoc.symexec import CallEvent, PathTrace, SymValue, concrete, execute_function

FIXTURES = fixtures.behavior_fixtures()


def _report(fx):
    cfg = cfg_from_code(fx.code)
    b = next(x for x in recover_dispatcher(cfg, fx.code).bindings if x.selector == fx.selector)
    return summarize_behaviors(execute_function(cfg, b.entry_pc, initial_stack=b.stack, code=fx.code))


@pytest.mark.parametrize("fx", FIXTURES, ids=[f.name for f in FIXTURES])
def test_table_row(fx):
    rep = _report(fx)
    assert rep.categories() == [fx.category]
    assert rep.causes_internal_tx == fx.internal_tx
    d = rep.to_dict()
    for key, value in fx.detail.items():
        assert d[key] == value


def _trace(*events):
    return PathTrace(blocks=[0], call_events=list(events), outcome="stop")


SYM = SymValue(origin="calldata", detail=4, uid=1)


def test_same_fixed_amount_on_two_paths_is_one_transfer():
    ev = CallEvent("CALL", 10, concrete(5), SYM)
    rep = summarize_behaviors([_trace(ev), _trace(CallEvent("CALL", 20, concrete(5), SYM))])
    assert rep.eth_transfer == {"fixed"} and rep.fixed_amount == 5


def test_distinct_fixed_amounts_are_variable():
    rep = summarize_behaviors([_trace(CallEvent("CALL", 1, concrete(5), SYM), CallEvent("CALL", 2, concrete(6), SYM))])
    assert rep.eth_transfer == {"variable"}


def test_zero_value_call_to_user_address():
    rep = summarize_behaviors([_trace(CallEvent("CALL", 1, concrete(0), SYM))])
    assert rep.categories() == ["user_contract_call"] and rep.causes_internal_tx


@pytest.mark.parametrize("addr", range(1, 9))
def test_precompiles_do_not_cause_internal_tx(addr):
    rep = summarize_behaviors([_trace(CallEvent("CALL", 1, concrete(0), concrete(addr)))])
    assert rep.precompile_calls == {addr} and not rep.causes_internal_tx


def test_empty_and_roundtrip():
    rep = summarize_behaviors([])
    assert rep.is_empty and rep.categories() == []
    full = BehaviorReport(frozenset({"fixed", "via_selfdestruct"}), (3,), frozenset({2}), True, frozenset({"call"}), True)
    assert BehaviorReport.from_dict(full.to_dict()) == full
