"""Tokenizer shared by the brace-language parsers (C and Java)."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import ParseFailure


@dataclass(frozen=True)
class Token:
    kind: str  # id | num | str | op | pp
    value: str
    line: int
    end_line: int = 0

    @property
    def last_line(self) -> int:
        return self.end_line or self.line


_TEXT_BLOCK = '"' * 3 + r"(?:.|\n)*?" + '"' * 3
_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<lc>//[^\n]*)"
    r"|(?P<bc>/\*.*?\*/)"
    rf"|(?P<str>{_TEXT_BLOCK}|\"(?:\\.|[^\"\\\n])*\"|'(?:\\.|[^'\\\n])*')"
    r"|(?P<id>[A-Za-z_$][A-Za-z0-9_$]*)"
    r"|(?P<num>\.?\d(?:[\w.]|[eEpP][+-])*)"
    r"|(?P<op>->|\+\+|--|<<=|>>=|>>>|<<|>>|<=|>=|==|!=|&&|\|\||::|\.\.\.|[-+*/%&|^]=|.)",
    re.DOTALL,
)


def tokenize(text: str, file: str = "", *, preprocessor: bool = True) -> list[Token]:
    """Split source into tokens, dropping comments and whitespace.

    With ``preprocessor`` set, a ``#`` that starts a line swallows the whole
    directive (including backslash continuations) as one ``pp`` token.
    """
    toks: list[Token] = []
    pos, line, n = 0, 1, len(text)
    at_line_start = True
    while pos < n:
        if preprocessor and at_line_start:
            j = pos
            while j < n and text[j] in " \t":
                j += 1
            if j < n and text[j] == "#":
                start_line = line
                k = j
                while k < n:
                    if text[k] == "\n":
                        if text[k - 1] == "\\" or text.endswith("\\\r", 0, k):
                            line += 1
                            k += 1
                            continue
                        break
                    k += 1
                body = text[j:k].replace("\\\r\n", " ").replace("\\\n", " ")
                body = re.sub(r"/\*.*?\*/", " ", body)
                body = re.sub(r"//.*", "", body)
                toks.append(Token("pp", body.strip(), start_line, line))
                pos = k
                continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseFailure(file, line, "unterminated comment or literal")
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            at_line_start = True
        elif kind in ("ws",):
            pass
        elif kind in ("lc",):
            pass
        elif kind == "bc":
            line += value.count("\n")
        else:
            if kind == "op" and value in "\"'":
                raise ParseFailure(file, line, "unterminated literal")
            if kind == "op" and value == "/" and text.startswith("/*", pos):
                raise ParseFailure(file, line, "unterminated comment")
            toks.append(Token(kind, value, line))
            if kind == "str":
                line += value.count("\n")
            at_line_start = False
        pos = m.end()
    return toks


OPEN = {"(": ")", "[": "]", "{": "}"}
CLOSE = {v: k for k, v in OPEN.items()}


def match_brackets(toks: list[Token], file: str = "") -> dict[int, int]:
    """Index of the partner of every bracket token; raises on imbalance."""
    partner: dict[int, int] = {}
    stack: list[int] = []
    for i, t in enumerate(toks):
        if t.kind != "op":
            continue
        if t.value in OPEN:
            stack.append(i)
        elif t.value in CLOSE:
            if not stack or toks[stack[-1]].value != CLOSE[t.value]:
                raise ParseFailure(file, t.line, f"unbalanced '{t.value}'")
            j = stack.pop()
            partner[i] = j
            partner[j] = i
    if stack:
        t = toks[stack[-1]]
        raise ParseFailure(file, t.line, f"unclosed '{t.value}'")
    return partner


def split_top(toks: list[Token], lo: int, hi: int, sep: str, partner: dict[int, int]) -> list[tuple[int, int]]:
    """Split ``toks[lo:hi]`` on ``sep`` outside brackets."""
    parts = []
    start = i = lo
    while i < hi:
        t = toks[i]
        if t.kind == "op" and t.value in OPEN:
            i = partner[i] + 1
            continue
        if t.kind == "op" and t.value == sep:
            parts.append((start, i))
            start = i + 1
        i += 1
    parts.append((start, hi))
    return [(a, b) for a, b in parts if b > a] if hi > lo else []
