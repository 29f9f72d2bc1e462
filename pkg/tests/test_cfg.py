from hypothesis import given, strategies as st

from bytedoc.asm import assemble
from bytedoc.cfg import cfg_from_code, statically_invalid_jumps, to_dot


def _code(src):
    return assemble(src).code


def test_blocks_split_at_jumpdest_and_terminators():
    prog = assemble(
        """
        PUSH1 0x01 | PUSH @a | JUMPI
        PUSH1 0x00 | DUP1 | REVERT
        a: | JUMPDEST | STOP
        """
    )
    cfg = cfg_from_code(prog.code)
    starts = [b.start_pc for b in cfg.blocks]
    assert starts == [0, 6, prog.labels["a"]]
    assert [b.terminator_kind for b in cfg.blocks] == ["jumpi", "terminator", "terminator"]
    assert cfg.successors(0) == sorted([(6, "fallthrough"), (prog.labels["a"], "taken")])


def test_dynamic_jump_is_unresolved_until_augmented():
    prog = assemble(
        """
        PUSH1 0x00 | CALLDATALOAD | JUMP
        t: | JUMPDEST | STOP
        """
    )
    cfg = cfg_from_code(prog.code)
    assert cfg.unresolved_jumps == {3}
    assert prog.labels["t"] not in cfg.reachable()
    aug = cfg.with_dynamic_edges({(3, prog.labels["t"]), (3, 1)})  # 1 is not a JUMPDEST
    assert aug.dynamic_edges == {(0, prog.labels["t"])}
    assert prog.labels["t"] in aug.reachable()
    assert "style=dashed" in to_dot(aug)


def test_static_bad_jump_detected():
    cfg = cfg_from_code(_code("PUSH1 0x01 | JUMP | JUMPDEST | STOP"))
    assert statically_invalid_jumps(cfg) == {2}
    assert statically_invalid_jumps(cfg, reachable_only=True) == {2}


def test_unreachable_bad_jump_ignored_when_reachable_only():
    cfg = cfg_from_code(_code("STOP | PUSH1 0x00 | JUMP"))
    assert statically_invalid_jumps(cfg) == {3}
    assert statically_invalid_jumps(cfg, reachable_only=True) == set()


@given(st.binary(min_size=1, max_size=80))
def test_blocks_partition_instructions(data):
    cfg = cfg_from_code(data)
    seen = [ins.pc for b in cfg.blocks for ins in b.instructions]
    assert seen == sorted(seen) and len(seen) == len(set(seen))
    for src, dst, _ in cfg.edges:
        assert cfg.block_at(src) is not None and cfg.block_at(dst) is not None
