"""Declaration-level C parser.

Preprocessor conditionals are transparent: every branch is parsed as code. If
that leaves the braces unbalanced the file is re-parsed keeping only the first
branch of each conditional.
"""

from __future__ import annotations

import re
from dataclasses import replace

from .brace import Analyzer, LangRules
from .lexer import Token, match_brackets, tokenize
from .model import DefKind, ParseFailure, RawDefinition, _Builder

C_TYPE_WORDS = frozenset(
    """void char short int long float double signed unsigned _Bool bool _Complex
    size_t ssize_t int8_t int16_t int32_t int64_t uint8_t uint16_t uint32_t uint64_t
    uintptr_t intptr_t ptrdiff_t off_t FILE""".split()
)
C_MODIFIERS = frozenset(
    """static const volatile register extern auto inline __inline __inline__ restrict
    __restrict __restrict__ _Thread_local __thread _Noreturn __extension__ typedef""".split()
)
C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern float for
    goto if inline int long register restrict return short signed sizeof static struct
    switch typedef union unsigned void volatile while _Bool _Complex _Alignas _Alignof
    _Atomic _Generic _Noreturn _Static_assert _Thread_local __attribute__ __asm__ asm
    __inline __inline__ __restrict __restrict__ __extension__ __thread typeof __typeof__
    defined""".split()
)
C_LIBRARY = frozenset(
    """NULL true false printf fprintf sprintf snprintf malloc calloc realloc free memcpy
    memset memmove strlen strcmp strncmp strcpy strncpy stdout stderr stdin exit abort
    assert errno""".split()
)
C_RULES = LangRules(
    keywords=C_KEYWORDS,
    type_words=C_TYPE_WORDS,
    modifiers=C_MODIFIERS,
    tag_words=frozenset({"struct", "union", "enum"}),
    ignored_names=C_LIBRARY,
)
ATTRIBUTE_WORDS = frozenset({"__attribute__", "__declspec", "_Alignas", "__asm__", "asm"})

_INCLUDE = re.compile(r'#\s*include\s*([<"])([^>"]+)[>"]')
_DEFINE = re.compile(r"#\s*define\s+([A-Za-z_]\w*)(\([^)]*\))?(.*)", re.DOTALL)
_IDENT = re.compile(r"[A-Za-z_]\w*")


def parse_c(text: str, file: str) -> list[RawDefinition]:
    toks = tokenize(text, file)
    try:
        return _parse(toks, file, all_branches=True)
    except ParseFailure:
        return _parse(toks, file, all_branches=False)


def _active_tokens(toks: list[Token], all_branches: bool) -> tuple[list[Token], list[Token]]:
    code: list[Token] = []
    directives: list[Token] = []
    stack: list[bool] = []  # whether the current branch of each level is kept
    for t in toks:
        if t.kind == "pp":
            word = re.match(r"#\s*(\w*)", t.value)
            w = word.group(1) if word else ""
            if w in ("if", "ifdef", "ifndef"):
                stack.append(True)
            elif w in ("elif", "else"):
                if stack:
                    stack[-1] = all_branches
            elif w == "endif":
                if stack:
                    stack.pop()
            if all(stack):
                directives.append(t)
            continue
        if all(stack):
            code.append(t)
    return code, directives


def _parse(all_toks: list[Token], file: str, *, all_branches: bool) -> list[RawDefinition]:
    toks, directives = _active_tokens(all_toks, all_branches)
    b = _Builder(file)
    for d in directives:
        _directive(d, b)
    partner = match_brackets(toks, file)
    an = Analyzer(toks, partner, C_RULES, b)
    _toplevel(an, 0, len(toks))
    return b.defs


def _directive(t: Token, b: _Builder) -> None:
    span = (t.line, t.last_line)
    m = _INCLUDE.match(t.value)
    if m:
        b.add(DefKind.IMPORT_DEF, m.group(2), span, target=m.group(2))
        return
    m = _DEFINE.match(t.value)
    if not m:
        return
    name, params, body = m.group(1), m.group(2), m.group(3)
    body_names = [n for n in _IDENT.findall(body) if n not in C_KEYWORDS and n not in C_TYPE_WORDS]
    if params is not None:
        args = tuple(a.strip() for a in params[1:-1].split(",") if a.strip())
        refs = tuple(dict.fromkeys(n for n in body_names if n not in args and n != name))
        b.add(DefKind.METHOD_DEF, name, span, signature=("macro",) + args, referenced_names=refs)
    else:
        refs = tuple(dict.fromkeys(n for n in body_names if n != name))
        b.add(DefKind.GLOBAL_VAR_DEF, name, span, referenced_names=refs)


def _toplevel(an: Analyzer, lo: int, hi: int) -> None:
    toks = an.toks
    i = lo
    while i < hi:
        t = toks[i]
        if t.kind == "op" and t.value in (";", "}"):
            i += 1
            continue
        if t.value == "extern" and i + 1 < hi and toks[i + 1].kind == "str":
            if an.is_op(i + 2, "{"):
                _toplevel(an, i + 3, an.partner[i + 2])
                i = an.partner[i + 2] + 1
            else:
                i += 2
            continue
        j, stop = _scan_decl(an, i, hi)
        if stop == "brace":
            i = _brace_decl(an, i, j, hi)
        else:
            _semi_decl(an, i, j)
            i = j + 1


def _scan_decl(an: Analyzer, i: int, hi: int) -> tuple[int, str]:
    toks = an.toks
    has_eq = False
    j = i
    while j < hi:
        t = toks[j]
        if t.kind == "op":
            if t.value == ";":
                return j, "semi"
            if t.value == "=":
                has_eq = True
            if t.value == "{" and not has_eq:
                return j, "brace"
            if t.value in ("(", "[", "{"):
                j = an.partner[j] + 1
                continue
        j += 1
    return hi, "eof"


def _function_name(an: Analyzer, lo: int, hi: int) -> int | None:
    """Index of the ``(`` opening the parameter list of a function declarator."""
    toks = an.toks
    i = lo
    while i < hi:
        t = toks[i]
        if t.kind == "op" and t.value == "=":
            return None
        if t.kind == "op" and t.value == "(":
            if an.is_name(i - 1) and toks[i - 1].value not in ATTRIBUTE_WORDS and i - 1 >= lo:
                return i
            i = an.partner[i] + 1
            continue
        if t.kind == "op" and t.value in ("[", "{"):
            i = an.partner[i] + 1
            continue
        i += 1
    return None


def _params(an: Analyzer, open_idx: int, method: int) -> tuple[str, ...]:
    sig = []
    for plo, phi in an.split_params(open_idx):
        name, _, refs, norm = an.param(plo, phi)
        if norm == "void" and not name:
            continue
        sig.append(norm)
        if name:
            an.b.add(
                DefKind.METHOD_VAR_DEF,
                name,
                an.lines(plo, phi),
                parent=method,
                referenced_names=refs,
            )
    return tuple(sig)


def _method(an: Analyzer, lo: int, open_idx: int, end: int, body: tuple[int, int] | None) -> None:
    toks = an.toks
    name = toks[open_idx - 1].value
    ret_refs = an.uniq(an.names(lo, open_idx - 1))
    span = (toks[lo].line, toks[end].last_line)
    m = an.b.add(
        DefKind.METHOD_DEF,
        name,
        span,
        referenced_names=ret_refs,
        is_declaration=body is None,
    )
    sig = _params(an, open_idx, m)
    an.b.defs[m] = replace(an.b.defs[m], signature=sig)
    if body is not None:
        an.parse_body(body[0], body[1], m)


def _brace_decl(an: Analyzer, i: int, j: int, hi: int) -> int:
    """Handle a declaration whose first top-level ``{`` is at ``j``."""
    toks = an.toks
    close = an.partner[j]
    tag_pos = next((k for k in range(i, j) if toks[k].value in C_RULES.tag_words), None)
    if tag_pos is not None and (an.is_op(tag_pos + 1, "{") or (an.is_id(tag_pos + 1) and an.is_op(tag_pos + 2, "{"))):
        end = close + 1
        while end < hi and not an.is_op(end, ";"):
            if toks[end].kind == "op" and toks[end].value in ("(", "[", "{"):
                end = an.partner[end]
            end += 1
        _type_def(an, i, tag_pos, j, close, min(end, hi - 1) if end >= hi else end)
        return end + 1
    fn = _function_name(an, i, j)
    if fn is not None:
        _method(an, i, fn, close, (j + 1, close))
        return close + 1
    # unknown brace construct: keep going until the statement ends
    k = close + 1
    while k < hi and not an.is_op(k, ";"):
        if toks[k].kind == "op" and toks[k].value in ("(", "[", "{"):
            k = an.partner[k]
        k += 1
    return k + 1


def _type_def(an: Analyzer, lo: int, tag_pos: int, open_idx: int, close: int, end: int) -> None:
    toks = an.toks
    tag = toks[tag_pos + 1].value if an.is_id(tag_pos + 1) else ""
    is_typedef = any(toks[k].value == "typedef" for k in range(lo, tag_pos))
    declarators: list[tuple[str, int]] = []
    if close + 1 < end:
        for dlo, dhi in an._split(close + 1, end):
            k = an.declarator_name(dlo, dhi)
            if k is not None:
                declarators.append((toks[k].value, k))
    span = (toks[lo].line, toks[min(end, len(toks) - 1)].last_line)
    if is_typedef and declarators:
        name, alt = declarators[0][0], tuple(n for n, _ in declarators[1:]) + ((tag,) if tag else ())
    else:
        name, alt = tag, ()
    t = an.b.add(DefKind.TYPE_DEF, name, span, alt_names=tuple(a for a in alt if a and a != name))
    kind_word = toks[tag_pos].value
    if kind_word == "enum":
        for mlo, mhi in an._split(open_idx + 1, close):
            if an.is_name(mlo):
                refs = an.uniq(an.names(mlo + 1, mhi))
                an.b.add(DefKind.MEMBER_DEF, toks[mlo].value, an.lines(mlo, mhi), parent=t, referenced_names=refs)
    else:
        for mlo, mhi in an._split_on(open_idx + 1, close, ";"):
            _member(an, mlo, mhi, t)
    if not is_typedef:
        for name_, k in declarators:
            an.b.add(DefKind.GLOBAL_VAR_DEF, name_, an.lines(k, k + 1), referenced_names=(tag,) if tag else ())


def _member(an: Analyzer, lo: int, hi: int, parent: int) -> None:
    decl = an.parse_declaration(lo, hi, allow_colon=True)
    if decl is not None:
        refs = an.uniq(an.names(decl.type_lo, decl.type_hi))
        for d in decl.declarators:
            an.b.add(DefKind.MEMBER_DEF, d.name, an.lines(lo, hi), parent=parent, referenced_names=refs)
        return
    # fall back to the last identifier outside brackets
    names = [k for k in range(lo, hi) if an.is_name(k)]
    if names:
        k = names[-1]
        refs = an.uniq(n for n in an.names(lo, hi) if n != an.toks[k].value)
        an.b.add(DefKind.MEMBER_DEF, an.toks[k].value, an.lines(lo, hi), parent=parent, referenced_names=refs)


def _semi_decl(an: Analyzer, lo: int, hi: int) -> None:
    """A top-level declaration terminated by ``;`` at ``hi``."""
    toks = an.toks
    if hi <= lo:
        return
    if toks[lo].value == "typedef":
        k = None
        cands = [x for x in range(lo + 1, hi) if an.is_name(x)]
        fp = next((x for x in range(lo + 1, hi) if an.is_op(x, "(") and an.is_op(x + 1, "*")), None)
        if fp is not None and an.is_name(fp + 2):
            k = fp + 2
        elif cands:
            k = cands[-1]
        if k is not None:
            refs = an.uniq(n for n in an.names(lo + 1, hi) if n != toks[k].value)
            an.b.add(DefKind.TYPE_DEF, toks[k].value, an.lines(lo, hi), referenced_names=refs)
        return
    fn = _function_name(an, lo, hi)
    if fn is not None:
        t_end, _ = an.type_end(lo, fn - 1)
        if t_end > lo or an.is_op(fn - 2, "*"):
            _method(an, lo, fn, hi, None)
        return
    decl = an.parse_declaration(lo, hi)
    if decl is None:
        return
    type_refs = an.uniq(an.names(decl.type_lo, decl.type_hi))
    for d in decl.declarators:
        init_refs = an.names(*d.init) if d.init else []
        an.b.add(
            DefKind.GLOBAL_VAR_DEF,
            d.name,
            an.lines(lo, hi),
            referenced_names=an.uniq((*type_refs, *init_refs)),
        )
