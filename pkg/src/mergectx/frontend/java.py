"""Declaration-level Java parser built on the shared brace-language analyzer."""

from __future__ import annotations

from dataclasses import replace

from .brace import Analyzer, LangRules
from .lexer import match_brackets, tokenize
from .model import DefKind, RawDefinition, _Builder

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do
    double else enum extends final finally float for goto if implements import instanceof
    int interface long native new package private protected public return short static
    strictfp super switch synchronized this throw throws transient try void volatile while
    var record yield sealed permits true false null""".split()
)
JAVA_TYPE_WORDS = frozenset("boolean byte char short int long float double void var".split())
JAVA_MODIFIERS = frozenset(
    """public private protected static final abstract synchronized native transient
    volatile strictfp default sealed""".split()
)
JAVA_LIBRARY = frozenset(
    """String Object Integer Long Double Float Boolean Character Byte Short Math System
    Exception RuntimeException Override Deprecated SuppressWarnings FunctionalInterface
    Thread StringBuilder Iterable Comparable Runnable Class Void Number""".split()
)
JAVA_RULES = LangRules(
    keywords=JAVA_KEYWORDS,
    type_words=JAVA_TYPE_WORDS,
    modifiers=JAVA_MODIFIERS,
    ignored_names=JAVA_LIBRARY,
    generics=True,
    header_words=frozenset({"if", "while", "switch", "for", "catch", "synchronized"}),
)
TYPE_WORDS = frozenset({"class", "interface", "enum", "record"})


def parse_java(text: str, file: str) -> list[RawDefinition]:
    toks = tokenize(text, file, preprocessor=False)
    partner = match_brackets(toks, file)
    b = _Builder(file)
    an = Analyzer(toks, partner, JAVA_RULES, b)
    _compilation_unit(an)
    return b.defs


def _skip_annotation(an: Analyzer, i: int) -> int:
    i += 1  # '@'
    while an.is_id(i) and an.is_op(i + 1, "."):
        i += 2
    i += 1
    if an.is_op(i, "("):
        i = an.skip_group(i)
    return i


def _compilation_unit(an: Analyzer) -> None:
    toks = an.toks
    i, n = 0, len(toks)
    while i < n:
        t = toks[i]
        if t.kind == "id" and t.value in ("package", "import"):
            j = i
            while j < n and not an.is_op(j, ";"):
                j += 1
            if t.value == "import":
                parts = [toks[k].value for k in range(i + 1, j) if toks[k].value != "static"]
                target = "".join(parts)
                b_name = parts[-1] if parts and parts[-1] != "*" else target
                an.b.add(DefKind.IMPORT_DEF, b_name, an.lines(i, j), target=target)
            i = j + 1
            continue
        i = _member_or_type(an, i, n, owner=None)


def _type_decl(an: Analyzer, i: int, hi: int, kw: int, owner: int | None) -> int:
    """``kw`` indexes the class/interface/enum/record keyword."""
    toks = an.toks
    name = toks[kw + 1].value if an.is_id(kw + 1) else ""
    j = kw + 2
    while j < hi and not an.is_op(j, "{"):
        if an.is_op(j, "(") or an.is_op(j, "["):
            j = an.partner[j]
        j += 1
    if j >= hi:
        return hi
    close = an.partner[j]
    header_refs = an.uniq(an.names(kw + 2, j))
    t = an.b.add(
        DefKind.TYPE_DEF,
        name,
        (toks[i].line, toks[close].line),
        parent=owner,
        referenced_names=header_refs,
    )
    if toks[kw].value == "record" and an.is_op(kw + 2, "("):
        for plo, phi in an.split_params(kw + 2):
            pname, _, refs, _ = an.param(plo, phi)
            if pname:
                an.b.add(DefKind.MEMBER_DEF, pname, an.lines(plo, phi), parent=t, referenced_names=refs)
    k = j + 1
    if toks[kw].value == "enum":
        k = _enum_constants(an, k, close, t)
    while k < close:
        k = _member_or_type(an, k, close, owner=t)
    return close + 1


def _enum_constants(an: Analyzer, lo: int, hi: int, owner: int) -> int:
    toks = an.toks
    i = lo
    while i < hi:
        if an.is_op(i, ";"):
            return i + 1
        if an.is_op(i, "@"):
            i = _skip_annotation(an, i)
            continue
        if an.is_name(i):
            j = i + 1
            refs: tuple[str, ...] = ()
            if an.is_op(j, "("):
                refs = an.uniq(an.names(j, an.partner[j]))
                j = an.skip_group(j)
            if an.is_op(j, "{"):
                j = an.skip_group(j)
            an.b.add(DefKind.MEMBER_DEF, toks[i].value, an.lines(i, j), parent=owner, referenced_names=refs)
            i = j
            continue
        i += 1
    return hi


def _member_or_type(an: Analyzer, i: int, hi: int, owner: int | None) -> int:
    toks = an.toks
    start = i
    while i < hi:
        if an.is_op(i, "@") and not (an.is_id(i + 1) and toks[i + 1].value == "interface"):
            i = _skip_annotation(an, i)
        elif an.is_id(i) and toks[i].value in JAVA_MODIFIERS:
            i += 1
        else:
            break
    if i >= hi:
        return hi
    t = toks[i]
    if an.is_op(i, ";"):
        return i + 1
    if an.is_op(i, "@") and an.is_id(i + 1) and toks[i + 1].value == "interface":
        return _type_decl(an, start, hi, i + 1, owner)
    if t.kind == "id" and t.value in TYPE_WORDS and an.is_id(i + 1):
        return _type_decl(an, start, hi, i, owner)
    if an.is_op(i, "{"):
        # initializer block
        close = an.partner[i]
        m = an.b.add(DefKind.METHOD_DEF, "<init>", (toks[start].line, toks[close].line), parent=owner)
        an.parse_body(i + 1, close, m)
        return close + 1
    # scan to ';' or body '{'
    j = i
    has_eq = False
    while j < hi:
        if an.is_op(j, ";"):
            break
        if an.is_op(j, "="):
            has_eq = True
        if an.is_op(j, "{") and not has_eq:
            break
        if toks[j].kind == "op" and toks[j].value in ("(", "[", "{"):
            j = an.partner[j] + 1
            continue
        j += 1
    paren = None
    if not has_eq:
        for k in range(i, j):
            if an.is_op(k, "(") and an.is_name(k - 1):
                paren = k
                break
            if toks[k].kind == "op" and toks[k].value in ("(", "[", "{"):
                break
    if paren is not None and owner is not None:
        return _method(an, start, i, paren, j, hi, owner)
    if j >= hi:
        return hi
    if an.is_op(j, "{"):
        return an.partner[j] + 1
    if owner is not None:
        decl = an.parse_declaration(i, j)
        if decl is not None:
            type_refs = an.uniq(an.names(decl.type_lo, decl.type_hi))
            for d in decl.declarators:
                init = an.names(*d.init) if d.init else []
                an.b.add(
                    DefKind.MEMBER_DEF,
                    d.name,
                    an.lines(start, j + 1),
                    parent=owner,
                    referenced_names=an.uniq((*type_refs, *init)),
                )
    return j + 1


def _method(an: Analyzer, start: int, i: int, paren: int, j: int, hi: int, owner: int) -> int:
    toks = an.toks
    name = toks[paren - 1].value
    ret_refs = an.uniq(an.names(i, paren - 1))
    throws_refs = an.uniq(an.names(an.partner[paren] + 1, j))
    has_body = j < hi and an.is_op(j, "{")
    end = an.partner[j] if has_body else min(j, hi - 1)
    m = an.b.add(
        DefKind.METHOD_DEF,
        name,
        (toks[start].line, toks[end].line),
        parent=owner,
        referenced_names=an.uniq((*ret_refs, *throws_refs)),
        is_declaration=not has_body,
    )
    sig = []
    for plo, phi in an.split_params(paren):
        pname, _, refs, norm = an.param(plo, phi)
        sig.append(norm)
        if pname:
            an.b.add(DefKind.METHOD_VAR_DEF, pname, an.lines(plo, phi), parent=m, referenced_names=refs)
    an.b.defs[m] = replace(an.b.defs[m], signature=tuple(sig))
    if has_body:
        an.parse_body(j + 1, end, m)
    return end + 1
