"""Declaration and statement analysis shared by the C and Java parsers."""

from __future__ import annotations

from dataclasses import dataclass

from .lexer import OPEN, Token
from .model import DefKind, _Builder

ASSIGN_OPS = frozenset(
    {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}
)


@dataclass(frozen=True)
class LangRules:
    keywords: frozenset[str]
    type_words: frozenset[str]  # builtin type spellings
    modifiers: frozenset[str]  # skipped in front of a declaration
    tag_words: frozenset[str] = frozenset()  # struct/union/enum
    ignored_names: frozenset[str] = frozenset()  # builtin library names
    generics: bool = False
    header_words: frozenset[str] = frozenset({"if", "while", "switch", "for"})


@dataclass
class Declarator:
    name: str
    name_idx: int
    lo: int
    hi: int
    init: tuple[int, int] | None


@dataclass
class Declaration:
    type_lo: int
    type_hi: int
    declarators: list[Declarator]


class Analyzer:
    """Token-range helpers over one file's token list."""

    def __init__(self, toks: list[Token], partner: dict[int, int], rules: LangRules, b: _Builder):
        self.toks = toks
        self.partner = partner
        self.rules = rules
        self.b = b

    # -- small predicates ------------------------------------------------------

    def is_op(self, i: int, value: str) -> bool:
        return 0 <= i < len(self.toks) and self.toks[i].kind == "op" and self.toks[i].value == value

    def is_id(self, i: int) -> bool:
        return 0 <= i < len(self.toks) and self.toks[i].kind == "id"

    def is_name(self, i: int) -> bool:
        """A non-keyword identifier."""
        return self.is_id(i) and self.toks[i].value not in self.rules.keywords

    def skip_group(self, i: int) -> int:
        """Index just past the bracket group opened at ``i``."""
        return self.partner[i] + 1

    def skip_generic(self, i: int, hi: int) -> int:
        """Index past a ``<...>`` type-argument list starting at ``i``."""
        depth = 0
        j = i
        while j < hi:
            t = self.toks[j]
            if t.kind == "op":
                if t.value == "<":
                    depth += 1
                elif t.value in (">", ">>", ">>>"):
                    depth -= len(t.value)
                    if depth <= 0:
                        return j + 1
                elif t.value in OPEN:
                    j = self.partner[j]
                elif t.value not in (",", ".", "?", "&", "[", "]", "@"):
                    return i
            j += 1
        return i

    def lines(self, lo: int, hi: int) -> tuple[int, int]:
        return self.toks[lo].line, max(self.toks[k].last_line for k in range(lo, hi))

    def names(self, lo: int, hi: int) -> list[str]:
        """Identifiers referenced in ``toks[lo:hi]``, member names excluded."""
        out: list[str] = []
        for k in range(lo, hi):
            if not self.is_name(k):
                continue
            prev = k - 1
            if prev >= lo and self.toks[prev].kind == "op" and self.toks[prev].value in (".", "->", "::"):
                if not (prev - 1 >= lo and self.toks[prev - 1].value in ("this", "self")):
                    continue
            v = self.toks[k].value
            if v in self.rules.type_words or v in self.rules.ignored_names:
                continue
            out.append(v)
        return out

    @staticmethod
    def uniq(seq) -> tuple[str, ...]:
        return tuple(dict.fromkeys(seq))

    # -- declarations ----------------------------------------------------------

    def type_end(self, lo: int, hi: int) -> tuple[int, bool]:
        """End of the leading type in ``toks[lo:hi]``.

        Returns ``(index, builtin)``; ``index == lo`` when no type is present.
        """
        r = self.rules
        i = lo
        while i < hi and self.is_id(i) and self.toks[i].value in r.modifiers:
            i += 1
        while i < hi and self.is_op(i, "@") and self.is_id(i + 1):
            i += 2
            if self.is_op(i, "("):
                i = self.skip_group(i)
        if i >= hi or not self.is_id(i):
            return lo, False
        v = self.toks[i].value
        if v in r.tag_words:
            i += 1
            if self.is_id(i):
                i += 1
            elif not self.is_op(i, "{"):
                return lo, False
            builtin = True
        elif v in r.type_words:
            while i < hi and self.is_id(i) and (
                self.toks[i].value in r.type_words or self.toks[i].value in r.modifiers
            ):
                i += 1
            builtin = True
        elif v not in r.keywords:
            i += 1
            while self.is_op(i, ".") and self.is_id(i + 1) or self.is_op(i, "::") and self.is_id(i + 1):
                i += 2
            builtin = False
        else:
            return lo, False
        while i < hi:
            if r.generics and self.is_op(i, "<"):
                j = self.skip_generic(i, hi)
                if j == i:
                    break
                i = j
            elif r.generics and self.is_op(i, "[") and self.is_op(i + 1, "]"):
                i += 2
            elif r.generics and self.is_op(i, "..."):
                i += 1
            elif self.is_id(i) and self.toks[i].value in r.modifiers:
                i += 1
            else:
                break
        return i, builtin

    def declarator_name(self, lo: int, hi: int) -> int | None:
        """Token index of the declared name in one declarator."""
        i = lo
        while i < hi and self.toks[i].kind == "op" and self.toks[i].value in ("*", "&"):
            i += 1
        while i < hi and self.is_id(i) and self.toks[i].value in self.rules.modifiers:
            i += 1
            while i < hi and self.is_op(i, "*"):
                i += 1
        if self.is_op(i, "(") and i < hi:
            # function pointer: (*name)(args)
            inner = self.partner[i]
            j = i + 1
            while j < inner and self.toks[j].kind == "op" and self.toks[j].value in ("*", "&", "^"):
                j += 1
            return j if self.is_name(j) else None
        return i if i < hi and self.is_name(i) else None

    def parse_declaration(self, lo: int, hi: int, *, allow_colon: bool = False) -> Declaration | None:
        t_end, builtin = self.type_end(lo, hi)
        if t_end == lo:
            return None
        if t_end >= hi:
            return None
        first = self.toks[t_end]
        if not builtin and not (
            first.kind == "id" or (first.kind == "op" and first.value in ("*", "&"))
        ):
            return None
        if not builtin and first.kind == "op":
            # `a * b` is an expression unless followed by a plausible declarator end
            j = t_end
            while self.is_op(j, "*"):
                j += 1
            if not self.is_name(j) or not self._decl_follow(j + 1, hi, allow_colon):
                return None
        decls: list[Declarator] = []
        for dlo, dhi in self._split(t_end, hi):
            k = self.declarator_name(dlo, dhi)
            if k is None:
                return None
            fp_open = next((x for x in range(dlo, k) if self.is_op(x, "(")), None)
            after = self.partner[fp_open] + 1 if fp_open is not None else k + 1
            while after < dhi and self.is_op(after, "["):
                after = self.skip_group(after)
            if after < dhi and self.is_op(after, "(") and (fp_open is not None or builtin):
                after = self.skip_group(after)
            init = None
            if after < dhi:
                v = self.toks[after]
                if v.kind == "op" and v.value == "=":
                    init = (after + 1, dhi)
                elif v.kind == "op" and v.value == ":" and allow_colon:
                    init = (after + 1, dhi)
                elif v.kind == "op" and v.value == "(" and not builtin:
                    return None
                elif not (v.kind == "op" and v.value == ":"):
                    return None
            decls.append(Declarator(self.toks[k].value, k, dlo, dhi, init))
        if not decls:
            return None
        return Declaration(lo, t_end, decls)

    def _decl_follow(self, j: int, hi: int, allow_colon: bool) -> bool:
        if j >= hi:
            return True
        t = self.toks[j]
        return t.kind == "op" and (t.value in ("=", ",", "[", ";") or (allow_colon and t.value == ":"))

    def _split(self, lo: int, hi: int) -> list[tuple[int, int]]:
        parts = []
        start = i = lo
        while i < hi:
            t = self.toks[i]
            if t.kind == "op" and t.value in OPEN:
                i = self.partner[i] + 1
                continue
            if self.rules.generics and t.kind == "op" and t.value == "<":
                j = self.skip_generic(i, hi)
                if j > i:
                    i = j
                    continue
            if t.kind == "op" and t.value == ",":
                parts.append((start, i))
                start = i + 1
            i += 1
        parts.append((start, hi))
        return [p for p in parts if p[1] > p[0]]

    def split_params(self, open_idx: int) -> list[tuple[int, int]]:
        return self._split(open_idx + 1, self.partner[open_idx])

    def param(self, lo: int, hi: int) -> tuple[str, int | None, tuple[str, ...], str]:
        """Analyse one parameter: ``(name, name_idx, type_refs, normalized_type)``."""
        toks = self.toks
        if hi - lo == 1 and toks[lo].value in ("void", "..."):
            return "", None, (), toks[lo].value
        name_idx = None
        # function pointer parameter
        for k in range(lo, hi):
            if self.is_op(k, "(") and self.is_op(k + 1, "*"):
                j = k + 2
                if self.is_name(j):
                    name_idx = j
                break
        if name_idx is None:
            k = hi - 1
            while k >= lo and self.is_op(k, "]"):
                k = self.partner[k] - 1
            if k > lo and self.is_name(k):
                t_end, _ = self.type_end(lo, k + 1)
                if t_end <= k:
                    name_idx = k
        skip = {name_idx} if name_idx is not None else set()
        parts = []
        for k in range(lo, hi):
            if k in skip:
                continue
            v = toks[k].value
            if toks[k].kind == "id" and v in ("final", "register", "restrict", "__restrict"):
                continue
            if toks[k].kind == "op" and v == "@" and self.is_id(k + 1):
                skip.add(k + 1)
                continue
            parts.append(v)
        norm = " ".join(parts).replace(" *", "*").replace("* ", "*")
        refs = self.uniq(n for n in self.names(lo, hi) if name_idx is None or n != toks[name_idx].value)
        name = toks[name_idx].value if name_idx is not None else ""
        return name, name_idx, refs, norm

    # -- statements ------------------------------------------------------------

    def reads_writes(self, lo: int, hi: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
        toks = self.toks
        writes: list[str] = []
        skip_base: int | None = None
        i = lo
        assign = None
        while i < hi:
            t = toks[i]
            if t.kind == "op" and t.value in OPEN:
                i = self.partner[i] + 1
                continue
            if t.kind == "op" and t.value in ASSIGN_OPS:
                assign = i
                break
            i += 1
        if assign is not None:
            for k in range(lo, assign):
                if self.is_name(k) and not (k > lo and toks[k - 1].value in (".", "->")):
                    writes.append(toks[k].value)
                    if toks[assign].value == "=":
                        skip_base = k
                    break
                if self.is_id(k) and toks[k].value in ("this", "self") and self.is_op(k + 1, "."):
                    if self.is_name(k + 2):
                        writes.append(toks[k + 2].value)
                        if toks[assign].value == "=":
                            skip_base = k + 2
                    break
        for k in range(lo, hi):
            if toks[k].kind == "op" and toks[k].value in ("++", "--"):
                for n in (k - 1, k + 1):
                    if lo <= n < hi and self.is_name(n):
                        writes.append(toks[n].value)
                        break
        reads = [
            n
            for k, n in self._name_positions(lo, hi)
            if k != skip_base
        ]
        return self.uniq(reads), self.uniq(writes)

    def _name_positions(self, lo: int, hi: int) -> list[tuple[int, str]]:
        names = set(self.names(lo, hi))
        out = []
        for k in range(lo, hi):
            if self.is_name(k) and self.toks[k].value in names:
                prev = k - 1
                if prev >= lo and self.toks[prev].value in (".", "->", "::"):
                    if not (prev - 1 >= lo and self.toks[prev - 1].value in ("this", "self")):
                        continue
                out.append((k, self.toks[k].value))
        return out

    def emit_stmt(self, lo: int, hi: int, parent: int, extra_writes=(), extra_reads=()) -> int:
        reads, writes = self.reads_writes(lo, hi)
        reads = self.uniq((*reads, *extra_reads))
        writes = self.uniq((*writes, *extra_writes))
        refs = self.uniq((*self.names(lo, hi), *extra_reads))
        return self.b.add(
            DefKind.METHOD_STMT,
            "",
            self.lines(lo, hi),
            parent=parent,
            referenced_names=refs,
            reads=reads,
            writes=writes,
        )

    def emit_local_declaration(self, decl: Declaration, lo: int, hi: int, parent: int) -> None:
        type_refs = self.uniq(self.names(decl.type_lo, decl.type_hi))
        span = self.lines(lo, hi)
        init_writes = []
        init_reads: list[str] = []
        for d in decl.declarators:
            dims = self.uniq(self.names(d.name_idx + 1, d.init[0] if d.init else d.hi))
            self.b.add(
                DefKind.METHOD_VAR_DEF,
                d.name,
                span,
                parent=parent,
                referenced_names=self.uniq((*type_refs, *dims)),
            )
            if d.init is not None:
                init_writes.append(d.name)
                init_reads.extend(self.names(*d.init))
        if init_writes:
            self.b.add(
                DefKind.METHOD_STMT,
                "",
                span,
                parent=parent,
                referenced_names=self.uniq((*type_refs, *init_reads)),
                reads=self.uniq(init_reads),
                writes=tuple(init_writes),
            )

    def parse_body(self, lo: int, hi: int, method: int) -> None:
        """Emit MethodStmt/MethodVarDef children for the tokens of a body."""
        toks = self.toks
        r = self.rules
        i = lo
        while i < hi:
            t = toks[i]
            v = t.value
            if t.kind == "op":
                if v == "{":
                    self.parse_body(i + 1, self.partner[i], method)
                    i = self.partner[i] + 1
                    continue
                if v in (";", "}"):
                    i += 1
                    continue
            if t.kind == "id":
                if v in ("else", "do", "finally", "try") and not (v == "try" and self.is_op(i + 1, "(")):
                    i += 1
                    continue
                if v == "try" or (v in r.header_words and self.is_op(i + 1, "(")):
                    i = self._header(i, hi, method)
                    continue
                if v in ("case", "default"):
                    j = i + 1
                    while j < hi and not (self.is_op(j, ":") or self.is_op(j, "->")):
                        if toks[j].kind == "op" and toks[j].value in OPEN:
                            j = self.partner[j]
                        j += 1
                    self.emit_stmt(i, min(j + 1, hi), method)
                    i = j + 1
                    continue
                if self.is_name(i) and self.is_op(i + 1, ":") and not self.is_op(i + 2, ":"):
                    i += 2  # label
                    continue
                if v in ("class", "interface", "enum", "record") and self.is_id(i + 1):
                    # local type: skip its body
                    j = i
                    while j < hi and not self.is_op(j, "{"):
                        j += 1
                    i = self.partner[j] + 1 if j < hi else hi
                    continue
            j = self._stmt_end(i, hi)
            end = j
            if j < hi and self.is_op(j, ";"):
                j += 1
            if end > i:
                decl = self.parse_declaration(i, end)
                if decl is not None:
                    self.emit_local_declaration(decl, i, end, method)
                else:
                    self.emit_stmt(i, end, method)
            i = max(j, i + 1)

    def _stmt_end(self, i: int, hi: int) -> int:
        toks = self.toks
        j = i
        has_assign = False
        while j < hi:
            t = toks[j]
            if t.kind == "op":
                if t.value in (";", "}"):
                    return j
                if t.value in ASSIGN_OPS:
                    has_assign = True
                elif t.value == "{" and self._is_block_header(i, j, has_assign):
                    return j
                if t.value in OPEN:
                    j = self.partner[j] + 1
                    continue
            j += 1
        return j

    def _is_block_header(self, i: int, j: int, has_assign: bool) -> bool:
        """``MACRO(args) {`` opens a block rather than a brace initializer."""
        if j <= i or has_assign or not self.is_op(j - 1, ")"):
            return False
        if self.toks[i].value in ("return", "throw"):
            return False
        opener = self.partner[j - 1]
        return self.is_id(opener - 1) and not (
            self.is_id(opener - 2) and self.toks[opener - 2].value == "new"
        )

    def _header(self, i: int, hi: int, method: int) -> int:
        """``if (...)``, ``for (...)``, ``catch (...)``, ``try (...)``."""
        word = self.toks[i].value
        open_idx = i + 1
        if word == "try" and not self.is_op(open_idx, "("):
            return i + 1
        close = self.partner[open_idx]
        declared: list[str] = []
        if word in ("for", "catch", "try"):
            for plo, phi in self._split_on(open_idx + 1, close, ";"):
                decl = self.parse_declaration(plo, phi, allow_colon=True)
                if decl is None and word == "catch":
                    decl = self._catch_param(plo, phi)
                if decl is None:
                    continue
                type_refs = self.uniq(self.names(decl.type_lo, decl.type_hi))
                for d in decl.declarators:
                    self.b.add(
                        DefKind.METHOD_VAR_DEF,
                        d.name,
                        self.lines(plo, phi),
                        parent=method,
                        referenced_names=type_refs,
                    )
                    declared.append(d.name)
        self.emit_stmt(i, close + 1, method, extra_writes=declared)
        return close + 1

    def _catch_param(self, lo: int, hi: int) -> Declaration | None:
        # catch (IOException | RuntimeException e)
        if hi - lo >= 2 and self.is_name(hi - 1):
            return Declaration(lo, hi - 1, [Declarator(self.toks[hi - 1].value, hi - 1, lo, hi, None)])
        return None

    def _split_on(self, lo: int, hi: int, sep: str) -> list[tuple[int, int]]:
        parts = []
        start = i = lo
        while i < hi:
            t = self.toks[i]
            if t.kind == "op" and t.value in OPEN:
                i = self.partner[i] + 1
                continue
            if t.kind == "op" and t.value == sep:
                parts.append((start, i))
                start = i + 1
            i += 1
        parts.append((start, hi))
        return [p for p in parts if p[1] > p[0]]
