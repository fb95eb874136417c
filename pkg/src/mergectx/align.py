"""Graph-text alignment: attach code blocks to graph nodes by line range."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import replace
from typing import Iterable, Mapping, Sequence

from .graph import MtCpg, MtCpgNode
from .ingest import CodeBlock


class SpanOutOfRange(ValueError):
    """A node claims lines beyond the end of its file."""


class LineSegmentTree:
    """Segment tree over lines ``[1, size]`` with id stamps on canonical intervals.

    Each inserted interval is split into O(log size) canonical tree nodes,
    every one of which records the id. A stabbing/range query collects the
    stamps of all tree nodes whose interval meets the query range.
    """

    def __init__(self, file: str, size: int):
        if size < 1:
            raise ValueError("a segment tree needs at least one line")
        self.file = file
        self.size = size
        cap = 4 * size
        self.stamps: list[list[int]] = [[] for _ in range(cap)]
        # number of stamps in each subtree, for pruning empty branches
        self._load = [0] * cap

    def insert(self, ident: int, lo: int, hi: int) -> None:
        if lo < 1 or hi > self.size or lo > hi:
            raise SpanOutOfRange(f"{self.file}: span [{lo}, {hi}] outside [1, {self.size}]")
        self._insert(1, 1, self.size, lo, hi, ident)

    def _insert(self, t: int, l: int, r: int, lo: int, hi: int, ident: int) -> None:
        self._load[t] += 1
        if lo <= l and r <= hi:
            self.stamps[t].append(ident)
            return
        mid = (l + r) // 2
        if lo <= mid:
            self._insert(2 * t, l, mid, lo, hi, ident)
        if hi > mid:
            self._insert(2 * t + 1, mid + 1, r, lo, hi, ident)

    def query(self, lo: int, hi: int) -> set[int]:
        """Ids of every interval meeting ``[lo, hi]`` (clamped to the file)."""
        lo, hi = max(lo, 1), min(hi, self.size)
        out: set[int] = set()
        if lo > hi:
            return out
        stack = [(1, 1, self.size)]
        while stack:
            t, l, r = stack.pop()
            if r < lo or l > hi or not self._load[t]:
                continue
            out.update(self.stamps[t])
            if l < r:
                mid = (l + r) // 2
                stack.append((2 * t, l, mid))
                stack.append((2 * t + 1, mid + 1, r))
        return out

    def annotations(self) -> dict[tuple[int, int], list[int]]:
        """Canonical interval → stamped ids, for inspection."""
        out: dict[tuple[int, int], list[int]] = {}
        stack = [(1, 1, self.size)]
        while stack:
            t, l, r = stack.pop()
            if not self._load[t]:
                continue
            if self.stamps[t]:
                out[(l, r)] = list(self.stamps[t])
            if l < r:
                mid = (l + r) // 2
                stack += [(2 * t, l, mid), (2 * t + 1, mid + 1, r)]
        return dict(sorted(out.items()))


def build_tree(file: str, line_count: int, graph_nodes: Iterable[MtCpgNode]) -> LineSegmentTree:
    """Stamp every node's aligned line ranges into a new tree for ``file``."""
    tree = LineSegmentTree(file, line_count)
    for n in graph_nodes:
        if n.file != file:
            raise ValueError(f"node {n.id} belongs to {n.file}, not {file}")
        if n.line_span[1] > line_count or n.line_span[0] < 1:
            raise SpanOutOfRange(f"{file}: node {n.id} spans {n.line_span}, file has {line_count} lines")
        for lo, hi in n.align_spans or (n.line_span,):
            tree.insert(n.id, lo, hi)
    return tree


def query_blocks(tree: LineSegmentTree, block: CodeBlock) -> set[int]:
    if block.file != tree.file:
        raise ValueError(f"block {block.id} is in {block.file}, tree covers {tree.file}")
    return tree.query(block.start_line, block.end_line)


def build_trees(graph: MtCpg, line_counts: Mapping[str, int] | None = None) -> dict[str, LineSegmentTree]:
    trees = {}
    for file, ids in graph.file_index.items():
        nodes = [graph.nodes[i] for i in ids]
        size = (line_counts or {}).get(file) or max(n.line_span[1] for n in nodes)
        trees[file] = build_tree(file, max(size, 1), nodes)
    return trees


def color_graph(
    graph: MtCpg,
    blocks: Sequence[CodeBlock],
    line_counts: Mapping[str, int] | None = None,
    *,
    trees: Mapping[str, LineSegmentTree] | None = None,
) -> MtCpg:
    """Return a copy of ``graph`` whose nodes carry the blocks they overlap.

    Attachments start empty, so coloring is idempotent. Blocks keep their
    input order on each node. Blocks of files without nodes attach nowhere.
    """
    if graph.version:
        for b in blocks:
            if b.version.value != graph.version:
                raise ValueError(f"block {b.id} is {b.version.value}, graph is {graph.version}")
    if trees is None:
        trees = build_trees(graph, line_counts)
    attached: dict[int, list[str]] = defaultdict(list)
    for b in blocks:
        tree = trees.get(b.file)
        if tree is None:
            continue
        for nid in sorted(query_blocks(tree, b)):
            if b.id not in attached[nid]:
                attached[nid].append(b.id)
    nodes = [replace(n, attached_blocks=tuple(attached.get(n.id, ()))) for n in graph.nodes]
    return graph.with_nodes(nodes)


def attachment_map(graph: MtCpg) -> dict[str, list[int]]:
    """Block id → ids of the nodes carrying it."""
    out: dict[str, list[int]] = defaultdict(list)
    for n in graph.nodes:
        for b in n.attached_blocks:
            out[b].append(n.id)
    return dict(sorted(out.items()))


def attachments_to_json(graph: MtCpg) -> str:
    return json.dumps(attachment_map(graph), indent=2)
