"""Definition records and intra-procedural edges produced by the parsers."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence


class DefKind(str, enum.Enum):
    TYPE_DEF = "TypeDef"
    METHOD_DEF = "MethodDef"
    MEMBER_DEF = "MemberDef"
    GLOBAL_VAR_DEF = "GlobalVarDef"
    IMPORT_DEF = "ImportDef"
    METHOD_STMT = "MethodStmt"
    METHOD_VAR_DEF = "MethodVarDef"

    @property
    def is_high(self) -> bool:
        return self in HIGH_KINDS


HIGH_KINDS = frozenset(
    {DefKind.TYPE_DEF, DefKind.METHOD_DEF, DefKind.GLOBAL_VAR_DEF, DefKind.IMPORT_DEF}
)
LOW_KINDS = frozenset({DefKind.MEMBER_DEF, DefKind.METHOD_STMT, DefKind.METHOD_VAR_DEF})
# within one line: definitions before their parts, declarations before uses
KIND_RANK = {
    DefKind.IMPORT_DEF: 0,
    DefKind.TYPE_DEF: 1,
    DefKind.GLOBAL_VAR_DEF: 2,
    DefKind.METHOD_DEF: 3,
    DefKind.MEMBER_DEF: 4,
    DefKind.METHOD_VAR_DEF: 5,
    DefKind.METHOD_STMT: 6,
}


class Language(str, enum.Enum):
    C = "C"
    PYTHON = "Python"
    JAVA = "Java"


EXTENSIONS = {
    ".c": Language.C,
    ".h": Language.C,
    ".py": Language.PYTHON,
    ".java": Language.JAVA,
}


def detect_language(path: str) -> Language | None:
    for ext, lang in EXTENSIONS.items():
        if path.endswith(ext):
            return lang
    return None


class ParseFailure(Exception):
    def __init__(self, file: str, line: int, reason: str = ""):
        super().__init__(f"{file}:{line}: {reason or 'parse failure'}")
        self.file = file
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class RawDefinition:
    """One program element of a source file.

    ``parent`` is the index of the containing definition in the same file's
    list. ``reads``/``writes`` feed def-use analysis; ``referenced_names`` is
    everything the element mentions (types, callees, globals).
    ``target`` holds the imported path/module for ImportDef.
    """

    kind: DefKind
    name: str
    file: str
    line_span: tuple[int, int]
    parent: int | None = None
    signature: tuple[str, ...] = ()
    referenced_names: tuple[str, ...] = ()
    reads: tuple[str, ...] = ()
    writes: tuple[str, ...] = ()
    alt_names: tuple[str, ...] = ()
    is_declaration: bool = False
    target: str = ""

    @property
    def names(self) -> tuple[str, ...]:
        return ((self.name,) if self.name else ()) + self.alt_names

    def to_json(self) -> dict:
        d = {
            "kind": self.kind.value,
            "name": self.name,
            "file": self.file,
            "line_span": list(self.line_span),
            "parent": self.parent,
            "referenced_names": list(self.referenced_names),
        }
        if self.kind is DefKind.METHOD_DEF:
            d["signature"] = list(self.signature)
            d["is_declaration"] = self.is_declaration
        if self.target:
            d["target"] = self.target
        return d


class BaseEdgeKind(str, enum.Enum):
    AST = "Ast"
    CFG = "Cfg"
    DATA_FLOW = "DataFlow"


@dataclass(frozen=True)
class BaseEdge:
    src: int
    dst: int
    kind: BaseEdgeKind


@dataclass
class _Builder:
    """Accumulates definitions while a parser walks a file."""

    file: str
    defs: list[RawDefinition] = field(default_factory=list)

    def add(self, kind: DefKind, name: str, span: tuple[int, int], **kw) -> int:
        self.defs.append(RawDefinition(kind, name, self.file, span, **kw))
        return len(self.defs) - 1

    def widen(self, index: int, end: int) -> None:
        d = self.defs[index]
        self.defs[index] = replace(d, line_span=(d.line_span[0], max(d.line_span[1], end)))


def extract_base_edges(defs: Sequence[RawDefinition]) -> list[BaseEdge]:
    """Intra-procedural Ast, Cfg and DataFlow edges for one file.

    Per method: an Ast edge from every statement to its method, Cfg edges
    between consecutive statements, and DataFlow edges from each variable
    definition or writing statement to every later statement reading the
    same name (no kills, so this is flow-insensitive).
    """
    edges: list[BaseEdge] = []
    members: dict[int, list[int]] = {}
    for i, d in enumerate(defs):
        if d.parent is not None and d.kind in (DefKind.METHOD_STMT, DefKind.METHOD_VAR_DEF):
            owner = d.parent
            if defs[owner].kind is DefKind.METHOD_DEF:
                members.setdefault(owner, []).append(i)
    for method, idx in members.items():
        idx.sort(key=lambda i: (defs[i].line_span[0], KIND_RANK[defs[i].kind], i))
        stmts = [i for i in idx if defs[i].kind is DefKind.METHOD_STMT]
        for s in stmts:
            edges.append(BaseEdge(s, method, BaseEdgeKind.AST))
        for s, t in zip(stmts, stmts[1:]):
            edges.append(BaseEdge(s, t, BaseEdgeKind.CFG))
        for pos, w in enumerate(idx):
            written = set(defs[w].writes)
            if defs[w].kind is DefKind.METHOD_VAR_DEF and defs[w].name:
                written.add(defs[w].name)
            if not written:
                continue
            for r in idx[pos + 1 :]:
                if defs[r].kind is DefKind.METHOD_STMT and written.intersection(defs[r].reads):
                    edges.append(BaseEdge(w, r, BaseEdgeKind.DATA_FLOW))
    return edges


def definitions_to_json(defs: Iterable[RawDefinition]) -> str:
    return json.dumps([d.to_json() for d in defs], indent=2)
