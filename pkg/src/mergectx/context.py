"""Context grouping: cluster conflicts with the changes they depend on."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .graph import MtCpg
from .ingest import BlockPair, CodeBlock, Version, is_conflict_id, split_lines
from .unionfind import DisjointSet

log = logging.getLogger(__name__)

DEFAULT_K = 4
DEFAULT_VISIT_CAP = 50_000


class MissingSource(LookupError):
    """A block refers to a file that is absent from the supplied trees."""


@dataclass(frozen=True)
class ContextGroup:
    """A set of blocks that should be shown to the resolver together.

    ``member_blocks`` includes the conflicts; both tuples are sorted.
    """

    group_id: str
    member_blocks: tuple[str, ...]
    conflict_blocks: tuple[str, ...]

    @property
    def context_blocks(self) -> tuple[str, ...]:
        conflicts = set(self.conflict_blocks)
        return tuple(b for b in self.member_blocks if b not in conflicts)

    def to_json(self) -> dict:
        return {
            "group_id": self.group_id,
            "conflicts": list(self.conflict_blocks),
            "context_blocks": list(self.context_blocks),
        }


def make_groups(
    block_sets: Iterable[Iterable[str]],
    is_conflict: Callable[[str], bool] = is_conflict_id,
    *,
    prefix: str = "g",
) -> list[ContextGroup]:
    """Canonical groups from raw block sets: sorted, numbered, conflict-centric."""
    sets = sorted(tuple(sorted(set(s))) for s in block_sets)
    out = []
    for members in sets:
        conflicts = tuple(b for b in members if is_conflict(b))
        if conflicts:
            out.append(ContextGroup(f"{prefix}{len(out)}", members, conflicts))
    return out


def partition(groups: Iterable[ContextGroup]) -> set[frozenset[str]]:
    """Groups as a set of frozensets, for order-free comparison."""
    return {frozenset(g.member_blocks) for g in groups}


# -- single-version grouping ---------------------------------------------------


def ms_bfs(
    adjacency: Sequence[Sequence[int]],
    sources: Sequence[int],
    k: int,
    *,
    visit_cap: int = DEFAULT_VISIT_CAP,
) -> tuple[list[int], list[int]]:
    """Bounded multi-source BFS with one bit per source.

    Returns ``(seen, capped)``: ``seen[v]`` has bit ``i`` set when
    ``sources[i]`` reaches ``v`` within ``k`` hops, and ``capped`` lists the
    source positions whose expansion was cut off at ``visit_cap`` nodes.
    """
    n = len(adjacency)
    seen = [0] * n
    frontier: dict[int, int] = {}
    for i, s in enumerate(sources):
        seen[s] |= 1 << i
        frontier[s] = frontier.get(s, 0) | (1 << i)
    visits = len(sources)
    stopped = 0
    capped: list[int] = []
    for _ in range(k):
        if not frontier:
            break
        nxt: dict[int, int] = {}
        for u, bits in frontier.items():
            if stopped:
                bits &= ~stopped
                if not bits:
                    continue
            for v in adjacency[u]:
                new = bits & ~seen[v]
                if new:
                    nxt[v] = nxt.get(v, 0) | new
        for v, bits in nxt.items():
            seen[v] |= bits
            visits += bits.bit_count()
        frontier = nxt
        if visits > visit_cap:
            # only now can some single source have exceeded the cap
            counts = [0] * len(sources)
            for mask in seen:
                while mask:
                    low = mask & -mask
                    counts[low.bit_length() - 1] += 1
                    mask ^= low
            for i, c in enumerate(counts):
                if c >= visit_cap and not stopped >> i & 1:
                    stopped |= 1 << i
                    capped.append(i)
    return seen, capped


def single_version_contexts(
    graph: MtCpg,
    k: int = DEFAULT_K,
    *,
    is_conflict: Callable[[str], bool] = is_conflict_id,
    visit_cap: int = DEFAULT_VISIT_CAP,
    prefix: str = "",
) -> list[ContextGroup]:
    """Group one version's blocks around its conflicts.

    Two colored nodes join when they lie within ``k`` undirected hops and at
    least one of them carries a conflict. Node groups are then projected onto
    their blocks through a disjoint set, and groups without a conflict are
    dropped.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    qnodes = [n.id for n in graph.nodes if n.attached_blocks]
    if not qnodes:
        return []
    conflict_q = [any(is_conflict(b) for b in graph.nodes[q].attached_blocks) for q in qnodes]
    seen, capped = ms_bfs(graph.adjacency(), qnodes, k, visit_cap=visit_cap)
    for i in capped:
        msg = f"BFS from node {qnodes[i]} stopped after {visit_cap} visited nodes"
        log.warning(msg)
        graph.diagnostics.append(msg)

    nodes_ds = DisjointSet(range(len(qnodes)))
    for t, q in enumerate(qnodes):
        mask = seen[q]
        while mask:
            low = mask & -mask
            s = low.bit_length() - 1
            mask ^= low
            if s != t and (conflict_q[s] or conflict_q[t]):
                nodes_ds.union(s, t)

    blocks_ds: DisjointSet[str] = DisjointSet()
    for members in nodes_ds.groups():
        rep = None
        for idx in sorted(members, key=lambda i: qnodes[i]):
            for b in graph.nodes[qnodes[idx]].attached_blocks:
                blocks_ds.add(b)
                if rep is None:
                    rep = b
                else:
                    blocks_ds.union(rep, b)
    return make_groups(blocks_ds.groups(), is_conflict, prefix=prefix or (graph.version or "g"))


# -- cross-version grouping -----------------------------------------------------


def cross_version_contexts(
    r_a: Sequence[ContextGroup],
    r_b: Sequence[ContextGroup],
    pairs: Iterable[BlockPair],
    *,
    is_conflict: Callable[[str], bool] = is_conflict_id,
) -> list[ContextGroup]:
    """Merge per-version groups that hold the two sides of a paired hunk.

    Pairs with a block outside every group are ignored. Passes repeat until
    one makes no merge.
    """
    groups = list(r_a) + list(r_b)
    owner: dict[str, int] = {}
    for gi, g in enumerate(groups):
        for b in g.member_blocks:
            owner.setdefault(b, gi)
    ds = DisjointSet(range(len(groups)))
    pairs = list(pairs)
    while True:
        merged = False
        for p in pairs:
            ga, gb = owner.get(p.block_a), owner.get(p.block_b)
            if ga is None or gb is None:
                continue
            merged |= ds.union(ga, gb)
        if not merged:
            break
    sets = [[b for gi in members for b in groups[gi].member_blocks] for members in ds.groups()]
    return make_groups(sets, is_conflict)


# -- rendering ------------------------------------------------------------------


def _source(sources: Mapping, version: Version | None, file: str) -> list[str]:
    tree = sources.get(version)
    if tree is None or file not in tree:
        label = version.value if version is not None else "base"
        raise MissingSource(f"{file} is missing from the {label} tree")
    return split_lines(tree[file])


def render_block(block: CodeBlock, sources: Mapping) -> str:
    """One block as a unified-diff hunk against the base file."""
    lines = _source(sources, block.version, block.file)
    if block.end_line > max(len(lines), 1):
        raise MissingSource(f"{block.file} ({block.version.value}) has no line {block.end_line}")
    new = [] if block.deletion else lines[block.start_line - 1 : block.end_line]
    old: list[str] = []
    old_start = 0
    if block.base_lo is not None and None in sources:
        base = _source(sources, None, block.file)
        old = base[block.base_lo : block.base_hi]
        old_start = block.base_lo + (1 if old else 0)
    new_start = block.start_line if new else block.start_line - 1
    out = [
        f"--- a/{block.file}",
        f"+++ b/{block.file} (version {block.version.value})",
        f"@@ -{old_start},{len(old)} +{new_start},{len(new)} @@",
    ]
    out += ["-" + x for x in old]
    out += ["+" + x for x in new]
    return "\n".join(out)


def render_context(
    group: ContextGroup,
    blocks: Mapping[str, CodeBlock],
    sources: Mapping[Version | None, Mapping[str, str]],
) -> str:
    """Non-conflict members of ``group`` as patch hunks, in file/line/version order.

    Args:
        group: The group to render.
        blocks: Block id → block, for every member.
        sources: Per-version file texts keyed by ``Version``; the base tree
            under ``None`` adds the replaced base lines to each hunk.
    """
    members = [blocks[b] for b in group.context_blocks]
    members.sort(key=lambda b: (b.file, b.start_line, b.version.value))
    return "\n".join(render_block(b, sources) for b in members)


def adjacent_lines(total_lines: int, block: CodeBlock, radius: int = 20) -> tuple[int, int]:
    """Baseline context window: ``radius`` lines either side of ``block``."""
    return max(1, block.start_line - radius), min(max(total_lines, 1), block.end_line + radius)


def groups_to_json(groups: Iterable[ContextGroup]) -> str:
    return json.dumps([g.to_json() for g in groups], indent=2)
