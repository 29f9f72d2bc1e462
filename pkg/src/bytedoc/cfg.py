"""Basic blocks and statically resolvable jump edges."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .evm import Instruction, disassemble, jumpdest_set

TAKEN = "taken"
FALLTHROUGH = "fallthrough"


@dataclass(frozen=True)
class BasicBlock:
    start_pc: int
    instructions: tuple[Instruction, ...]
    terminator_kind: str  # jump | jumpi | fallthrough | terminator

    @property
    def end_pc(self) -> int:
        return self.instructions[-1].pc

    @property
    def last(self) -> Instruction:
        return self.instructions[-1]

    @property
    def next_pc(self) -> int:
        return self.last.next_pc

    def mnemonics(self) -> list[str]:
        return [ins.mnemonic for ins in self.instructions]

    def __str__(self) -> str:
        return f"{self.start_pc:#x}..{self.end_pc:#x}"


@dataclass(frozen=True)
class CFG:
    blocks: tuple[BasicBlock, ...]
    edges: frozenset[tuple[int, int, str]]
    unresolved_jumps: frozenset[int]
    jumpdests: frozenset[int]
    # pc of JUMP/JUMPI -> statically known constant target
    static_targets: dict[int, int] = field(default_factory=dict, compare=False)
    # edges discovered during symbolic execution
    dynamic_edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "_by_start", {b.start_pc: b for b in self.blocks})
        index = {}
        for b in self.blocks:
            for ins in b.instructions:
                index[ins.pc] = (b, ins)
        object.__setattr__(self, "_index", index)

    @property
    def instructions(self) -> list[Instruction]:
        return [ins for b in self.blocks for ins in b.instructions]

    @property
    def entry(self) -> BasicBlock | None:
        return self.blocks[0] if self.blocks else None

    def block_at(self, start_pc: int) -> BasicBlock | None:
        return self._by_start.get(start_pc)

    def block_of(self, pc: int) -> BasicBlock | None:
        hit = self._index.get(pc)
        return hit[0] if hit else None

    def instruction_at(self, pc: int) -> Instruction | None:
        hit = self._index.get(pc)
        return hit[1] if hit else None

    def successors(self, start_pc: int) -> list[tuple[int, str]]:
        out = [(dst, kind) for src, dst, kind in self.edges if src == start_pc]
        out += [(dst, "dynamic") for src, dst in self.dynamic_edges if src == start_pc]
        return sorted(set(out))

    def fallthrough_of(self, start_pc: int) -> int | None:
        for src, dst, kind in self.edges:
            if src == start_pc and kind == FALLTHROUGH:
                return dst
        return None

    def reachable(self) -> set[int]:
        """Start pcs of blocks reachable from pc 0 over static and dynamic edges."""
        if not self.blocks:
            return set()
        adj: dict[int, list[int]] = {}
        for src, dst, _ in self.edges:
            adj.setdefault(src, []).append(dst)
        for src, dst in self.dynamic_edges:
            adj.setdefault(src, []).append(dst)
        seen = {self.blocks[0].start_pc}
        todo = [self.blocks[0].start_pc]
        while todo:
            cur = todo.pop()
            for nxt in adj.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        return seen

    def with_dynamic_edges(self, edges: Iterable[tuple[int, int]]) -> "CFG":
        """Copy with jump edges found at execution time (block-start pcs).

        Edges whose target is not a JUMPDEST block are dropped: those are bad
        jumps, reported separately, never CFG edges.
        """
        keep = set(self.dynamic_edges)
        for src_pc, dst_pc in edges:
            src = self.block_of(src_pc)
            if src is None or dst_pc not in self.jumpdests or dst_pc not in self._by_start:
                continue
            if (src.start_pc, dst_pc, TAKEN) in self.edges:
                continue
            keep.add((src.start_pc, dst_pc))
        return CFG(
            self.blocks,
            self.edges,
            self.unresolved_jumps,
            self.jumpdests,
            self.static_targets,
            frozenset(keep),
        )


def _kind(ins: Instruction) -> str:
    name = ins.mnemonic
    if name == "JUMP":
        return "jump"
    if name == "JUMPI":
        return "jumpi"
    if ins.opcode.is_terminator:
        return "terminator"
    return "fallthrough"


def build_cfg(instructions: Sequence[Instruction], jumpdests: Iterable[int]) -> CFG:
    jumpdests = frozenset(jumpdests)
    groups: list[list[Instruction]] = []
    cur: list[Instruction] = []
    for ins in instructions:
        if ins.mnemonic == "JUMPDEST" and cur:
            groups.append(cur)
            cur = []
        cur.append(ins)
        if ins.mnemonic in ("JUMP", "JUMPI") or ins.opcode.is_terminator:
            groups.append(cur)
            cur = []
    if cur:
        groups.append(cur)

    blocks = []
    for g in groups:
        kind = _kind(g[-1])
        blocks.append(BasicBlock(g[0].pc, tuple(g), kind))

    starts = {b.start_pc for b in blocks}
    edges: set[tuple[int, int, str]] = set()
    unresolved: set[int] = set()
    static_targets: dict[int, int] = {}
    for i, b in enumerate(blocks):
        nxt = blocks[i + 1].start_pc if i + 1 < len(blocks) else None
        if b.terminator_kind in ("jumpi", "fallthrough") and nxt is not None:
            edges.add((b.start_pc, nxt, FALLTHROUGH))
        if b.terminator_kind in ("jump", "jumpi"):
            jump = b.last
            prev = b.instructions[-2] if len(b.instructions) >= 2 else None
            if prev is not None and prev.opcode.is_push:
                target = prev.push_value
                static_targets[jump.pc] = target
                if target in jumpdests and target in starts:
                    edges.add((b.start_pc, target, TAKEN))
            else:
                unresolved.add(jump.pc)
    return CFG(tuple(blocks), frozenset(edges), frozenset(unresolved), jumpdests, static_targets)


def statically_invalid_jumps(cfg: CFG, reachable_only: bool = False) -> set[int]:
    """pcs of jumps whose constant target is not a valid JUMPDEST."""
    bad = {pc for pc, t in cfg.static_targets.items() if t not in cfg.jumpdests}
    if reachable_only:
        live = cfg.reachable()
        bad = {pc for pc in bad if cfg.block_of(pc).start_pc in live}
    return bad


def to_dot(cfg: CFG, name: str = "cfg") -> str:
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    for b in cfg.blocks:
        lines.append(f'  b{b.start_pc} [label="{b.start_pc}..{b.end_pc}"];')
    for src, dst, kind in sorted(cfg.edges):
        lines.append(f'  b{src} -> b{dst} [label="{kind}"];')
    for src, dst in sorted(cfg.dynamic_edges):
        lines.append(f'  b{src} -> b{dst} [label="taken", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cfg_from_code(code: bytes) -> CFG:
    return build_cfg(disassemble(code), jumpdest_set(code))
