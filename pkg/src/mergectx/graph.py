"""Multi-layer code property graph: nodes, typed edges and their construction."""

from __future__ import annotations

import enum
import json
import posixpath
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .frontend import (
    KIND_RANK,
    BaseEdge,
    DefKind,
    Language,
    RawDefinition,
    detect_language,
    extract_base_edges,
)


class Layer(str, enum.Enum):
    HIGH = "High"
    LOW = "Low"


class EdgeKind(str, enum.Enum):
    AST = "Ast"
    CFG = "Cfg"
    DATA_FLOW = "DataFlow"
    CROSS_LAYER = "CrossLayer"
    INTER_FILE = "InterFile"

    @property
    def is_base(self) -> bool:
        return self in (EdgeKind.AST, EdgeKind.CFG, EdgeKind.DATA_FLOW)


_EDGE_ORDER = {k: i for i, k in enumerate(EdgeKind)}


@dataclass(frozen=True)
class MtCpgNode:
    """A graph node.

    ``align_spans`` are the lines the node owns for text alignment: its
    span minus the spans of the nodes directly nested in it, always keeping
    the header line. A method therefore owns its signature, closing brace
    and any comment lines between statements, but not the statements.
    """

    id: int
    kind: DefKind
    file: str
    line_span: tuple[int, int]
    name: str = ""
    signature: tuple[str, ...] = ()
    parent: int | None = None
    attached_blocks: tuple[str, ...] = ()
    align_spans: tuple[tuple[int, int], ...] = ()
    referenced_names: tuple[str, ...] = ()
    alt_names: tuple[str, ...] = ()
    is_declaration: bool = False
    target: str = ""

    @property
    def layer(self) -> Layer:
        return Layer.HIGH if self.kind.is_high else Layer.LOW

    @property
    def names(self) -> tuple[str, ...]:
        return ((self.name,) if self.name else ()) + self.alt_names

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "layer": self.layer.value,
            "file": self.file,
            "line_span": list(self.line_span),
            "name": self.name,
            "signature": list(self.signature),
            "parent": self.parent,
            "attached_blocks": list(self.attached_blocks),
        }


@dataclass(frozen=True, order=True)
class MtCpgEdge:
    src: int
    dst: int
    kind: EdgeKind

    def sort_key(self) -> tuple[int, int, int]:
        return self.src, self.dst, _EDGE_ORDER[self.kind]


@dataclass
class MtCpg:
    nodes: list[MtCpgNode]
    edges: list[MtCpgEdge]
    file_index: dict[str, list[int]] = field(default_factory=dict)
    name_index: dict[tuple[str, str], list[int]] = field(default_factory=dict)
    changed_files: frozenset[str] = frozenset()
    diagnostics: list[str] = field(default_factory=list)
    version: str = ""

    def __post_init__(self) -> None:
        if not self.file_index and not self.name_index:
            self.reindex()

    def reindex(self) -> None:
        self.file_index = defaultdict(list)
        self.name_index = defaultdict(list)
        for n in self.nodes:
            self.file_index[n.file].append(n.id)
            for name in n.names:
                self.name_index[(n.file, name)].append(n.id)
        self.file_index = dict(self.file_index)
        self.name_index = dict(self.name_index)

    def with_nodes(self, nodes: list[MtCpgNode]) -> MtCpg:
        """Copy sharing edges and indexes but with replaced node records."""
        return replace(self, nodes=nodes, diagnostics=list(self.diagnostics))

    def edge_counts(self) -> dict[str, int]:
        counts = {k.value: 0 for k in EdgeKind}
        for e in self.edges:
            counts[e.kind.value] += 1
        return counts

    def summary(self) -> dict[str, int]:
        """Node/edge totals before (base only) and after the multi-layer pass."""
        base = sum(1 for e in self.edges if e.kind.is_base)
        return {
            "nodes": len(self.nodes),
            "base_edges": base,
            "edges": len(self.edges),
            "high_nodes": sum(1 for n in self.nodes if n.layer is Layer.HIGH),
            "low_nodes": sum(1 for n in self.nodes if n.layer is Layer.LOW),
        }

    def adjacency(self) -> list[list[int]]:
        """Undirected adjacency lists (deduplicated, sorted)."""
        adj: list[set[int]] = [set() for _ in self.nodes]
        for e in self.edges:
            if e.src != e.dst:
                adj[e.src].add(e.dst)
                adj[e.dst].add(e.src)
        return [sorted(s) for s in adj]

    def find(self, file: str, kind: DefKind, name: str = "", line: int | None = None) -> MtCpgNode:
        """Look up a single node; raises ``KeyError`` when absent or ambiguous."""
        hits = [
            n
            for n in self.nodes
            if n.file == file
            and n.kind is kind
            and (not name or n.name == name)
            and (line is None or n.line_span[0] == line)
        ]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} nodes match {file}:{kind.value}:{name}@{line}")
        return hits[0]

    def to_json(self) -> str:
        doc = {
            "version": self.version,
            "nodes": [n.to_json() for n in self.nodes],
            "edges": [{"src": e.src, "dst": e.dst, "kind": e.kind.value} for e in self.edges],
            "diagnostics": self.diagnostics,
        }
        return json.dumps(doc, indent=2)

    def to_dot(self) -> str:
        lines = ["digraph mtcpg {", "  node [shape=box, fontsize=10];"]
        for n in self.nodes:
            label = f"{n.id}: {n.kind.value} {n.name}\\n{n.file}:{n.line_span[0]}-{n.line_span[1]}"
            style = "" if n.layer is Layer.HIGH else ", style=rounded"
            lines.append(f'  n{n.id} [label="{label}"{style}];')
        for e in self.edges:
            lines.append(f'  n{e.src} -> n{e.dst} [label="{e.kind.value}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


# -- construction -------------------------------------------------------------


def _align_spans(span: tuple[int, int], children: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    lo, hi = span
    covered = set()
    for a, b in children:
        covered.update(range(max(a, lo), min(b, hi) + 1))
    covered.discard(lo)
    out: list[tuple[int, int]] = []
    for line in range(lo, hi + 1):
        if line in covered:
            continue
        if out and out[-1][1] == line - 1:
            out[-1] = (out[-1][0], line)
        else:
            out.append((line, line))
    return tuple(out)


def _normalize_signature(sig: Sequence[str]) -> tuple[str, ...]:
    return tuple("".join(s.split()) for s in sig)


def build_mtcpg(
    defs_by_file: Mapping[str, Sequence[RawDefinition]],
    base_edges: Mapping[str, Sequence[BaseEdge]] | None = None,
    changed_files: Iterable[str] | None = None,
    *,
    version: str = "",
    diagnostics: Iterable[str] = (),
) -> MtCpg:
    """Assemble the multi-layer graph for one version.

    Args:
        defs_by_file: Parser output per file.
        base_edges: Per-file base edges indexed into that file's definition
            list; computed with ``extract_base_edges`` when omitted.
        changed_files: Files eligible as inter-file targets; defaults to all.
        version: Label carried into dumps.
        diagnostics: Messages from earlier stages (parse failures).
    """
    changed = frozenset(changed_files if changed_files is not None else defs_by_file)
    nodes: list[MtCpgNode] = []
    remap: dict[tuple[str, int], int] = {}
    for file in sorted(defs_by_file):
        defs = defs_by_file[file]
        order = sorted(range(len(defs)), key=lambda i: (defs[i].line_span[0], KIND_RANK[defs[i].kind], i))
        for i in order:
            remap[(file, i)] = len(nodes)
            d = defs[i]
            nodes.append(
                MtCpgNode(
                    id=len(nodes),
                    kind=d.kind,
                    file=file,
                    line_span=d.line_span,
                    name=d.name,
                    signature=_normalize_signature(d.signature),
                    referenced_names=d.referenced_names,
                    alt_names=d.alt_names,
                    is_declaration=d.is_declaration,
                    target=d.target,
                )
            )
    children: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for file, defs in defs_by_file.items():
        for i, d in enumerate(defs):
            nid = remap[(file, i)]
            parent = remap[(file, d.parent)] if d.parent is not None else None
            if parent is not None:
                children[parent].append(d.line_span)
            nodes[nid] = replace(nodes[nid], parent=parent)
    for n in nodes:
        nodes[n.id] = replace(n, align_spans=_align_spans(n.line_span, children.get(n.id, ())))

    edges: set[MtCpgEdge] = set()
    for file, defs in defs_by_file.items():
        file_edges = base_edges[file] if base_edges is not None and file in base_edges else extract_base_edges(defs)
        for be in file_edges:
            edges.add(MtCpgEdge(remap[(file, be.src)], remap[(file, be.dst)], EdgeKind(be.kind.value)))

    graph = MtCpg(nodes, [], changed_files=changed, diagnostics=list(diagnostics), version=version)
    graph.edges = list(edges)
    add_cross_layer_edges(graph)
    add_inter_file_edges(graph, changed)
    return graph


def _add_edges(graph: MtCpg, new: Iterable[MtCpgEdge]) -> int:
    have = set(graph.edges)
    added = 0
    for e in new:
        if e not in have:
            have.add(e)
            added += 1
    graph.edges = sorted(have, key=MtCpgEdge.sort_key)
    return added


def _scopes(graph: MtCpg) -> dict[int, set[str]]:
    """Names bound under each parent: method locals or type members."""
    scopes: dict[int, set[str]] = defaultdict(set)
    for n in graph.nodes:
        if n.parent is not None and n.kind in (DefKind.METHOD_VAR_DEF, DefKind.MEMBER_DEF):
            scopes[n.parent].update(n.names)
    return scopes


def _high_defs(graph: MtCpg, file: str, name: str) -> list[int]:
    return [
        nid
        for nid in graph.name_index.get((file, name), ())
        if graph.nodes[nid].kind.is_high and graph.nodes[nid].kind is not DefKind.IMPORT_DEF
    ]


def _pending(graph: MtCpg) -> dict[int, list[str]]:
    """References of Low nodes that are neither local nor defined in-file."""
    pending: dict[int, list[str]] = {}
    scopes = _scopes(graph)
    for n in graph.nodes:
        if n.kind.is_high:
            continue
        local = scopes.get(n.parent, set())
        rest = [s for s in n.referenced_names if s not in local and s not in n.names and not _high_defs(graph, n.file, s)]
        if rest:
            pending[n.id] = rest
    return pending


def add_cross_layer_edges(graph: MtCpg) -> int:
    """Containment edges High→Low plus same-file usage edges Low→High."""
    new: list[MtCpgEdge] = []
    scopes = _scopes(graph)
    for n in graph.nodes:
        if n.parent is not None and not n.kind.is_high and graph.nodes[n.parent].kind.is_high:
            new.append(MtCpgEdge(n.parent, n.id, EdgeKind.CROSS_LAYER))
        if n.kind.is_high:
            continue
        local = scopes.get(n.parent, set())
        for s in n.referenced_names:
            if s in local or s in n.names:
                continue
            for target in _high_defs(graph, n.file, s):
                new.append(MtCpgEdge(n.id, target, EdgeKind.CROSS_LAYER))
    return _add_edges(graph, new)


# -- import resolution ---------------------------------------------------------


def _suffix_match(path: str, suffix: str) -> bool:
    return path == suffix or path.endswith("/" + suffix)


def resolve_import(node: MtCpgNode, candidates: Iterable[str]) -> list[str]:
    """Changed files an ImportDef refers to (may be empty)."""
    files = sorted(set(candidates) - {node.file})
    lang = detect_language(node.file)
    target = node.target or node.name
    here = posixpath.dirname(node.file)
    if lang is Language.C:
        local = posixpath.normpath(posixpath.join(here, target))
        if local in files:
            return [local]
        return [f for f in files if _suffix_match(f, target)]
    if lang is Language.JAVA:
        parts = target.split(".")
        if parts[-1] == "*":
            pkg = "/".join(parts[:-1])
            hits = [f for f in files if f.endswith(".java") and _suffix_match(posixpath.dirname(f), pkg)]
            if hits:
                return hits
            parts = parts[:-1]
        # static imports name a member: try progressively shorter prefixes
        for cut in range(len(parts), 0, -1):
            hits = [f for f in files if _suffix_match(f, "/".join(parts[:cut]) + ".java")]
            if hits:
                return hits
        return [f for f in files if posixpath.basename(f) == parts[-1] + ".java"]
    if lang is Language.PYTHON:
        level = len(target) - len(target.lstrip("."))
        module = target.lstrip(".")
        modules = [module] if module else []
        # ``from pkg import mod`` may name a submodule
        orig = node.alt_names[0] if node.alt_names else node.name
        modules.append(f"{module}.{orig}" if module else orig)
        out: list[str] = []
        for mod in modules:
            rel = mod.replace(".", "/")
            if level:
                base = here
                for _ in range(level - 1):
                    base = posixpath.dirname(base)
                stems = [posixpath.normpath(posixpath.join(base, rel)) if rel else base]
                match = lambda f, stem: f == stem + ".py" or f == stem + "/__init__.py"  # noqa: E731
            else:
                stems = [rel]
                match = lambda f, stem: _suffix_match(f, stem + ".py") or _suffix_match(f, stem + "/__init__.py")  # noqa: E731
            for f in files:
                if any(match(f, stem) for stem in stems) and f not in out:
                    out.append(f)
        return out
    return []


def _imports_of(graph: MtCpg, file: str) -> list[int]:
    return [nid for nid in graph.file_index.get(file, ()) if graph.nodes[nid].kind is DefKind.IMPORT_DEF]


def _search(graph: MtCpg, imp: int, name: str, changed: frozenset[str], cache: dict) -> list[int]:
    """Definitions of ``name`` reachable through ``imp``, depth-first over imports."""
    imp_node = graph.nodes[imp]
    lookup = name
    if imp_node.alt_names and name == imp_node.name:
        lookup = imp_node.alt_names[0]
    found: list[int] = []
    visited: set[str] = {imp_node.file}
    stack = list(reversed(cache.setdefault(imp, resolve_import(imp_node, changed))))
    while stack:
        f = stack.pop()
        if f in visited:
            continue
        visited.add(f)
        hits = _high_defs(graph, f, lookup)
        if hits:
            found.extend(hits)
            continue
        for sub in reversed(_imports_of(graph, f)):
            for g in reversed(cache.setdefault(sub, resolve_import(graph.nodes[sub], changed))):
                if g not in visited:
                    stack.append(g)
    return found


def add_inter_file_edges(graph: MtCpg, changed_files: Iterable[str] | None = None) -> int:
    """Resolve leftover references across files and link prototypes to bodies.

    A reference resolved through an import yields ``node → ImportDef``
    (CrossLayer) and ``ImportDef → definition`` (InterFile). Java classes of
    the same package need no import, so those get a direct InterFile edge.
    A method declaration links to every definition elsewhere with the same
    name and normalized signature.
    """
    changed = frozenset(changed_files) if changed_files is not None else graph.changed_files
    new: list[MtCpgEdge] = []
    cache: dict[int, list[str]] = {}
    for nid, names in sorted(_pending(graph).items()):
        n = graph.nodes[nid]
        imports = _imports_of(graph, n.file)
        for s in names:
            hit = False
            for imp in imports:
                targets = _search(graph, imp, s, changed, cache)
                if targets:
                    hit = True
                    new.append(MtCpgEdge(nid, imp, EdgeKind.CROSS_LAYER))
                    new.extend(MtCpgEdge(imp, t, EdgeKind.INTER_FILE) for t in targets)
            if not hit and detect_language(n.file) is Language.JAVA:
                here = posixpath.dirname(n.file)
                for f in sorted(changed):
                    if f != n.file and f.endswith(".java") and posixpath.dirname(f) == here:
                        for t in _high_defs(graph, f, s):
                            hit = True
                            new.append(MtCpgEdge(nid, t, EdgeKind.INTER_FILE))
            if not hit:
                graph.diagnostics.append(f"{n.file}:{n.line_span[0]}: unresolved reference '{s}'")

    bodies: dict[tuple[str, tuple[str, ...]], list[int]] = defaultdict(list)
    for n in graph.nodes:
        if n.kind is DefKind.METHOD_DEF and not n.is_declaration and n.file in changed:
            bodies[(n.name, n.signature)].append(n.id)
    for n in graph.nodes:
        if n.kind is DefKind.METHOD_DEF and n.is_declaration:
            for t in bodies.get((n.name, n.signature), ()):
                if graph.nodes[t].file != n.file:
                    new.append(MtCpgEdge(n.id, t, EdgeKind.INTER_FILE))
    return _add_edges(graph, new)
