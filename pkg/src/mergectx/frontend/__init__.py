"""Language frontends: source text to definition records plus base edges."""

from __future__ import annotations

from pathlib import Path

from .c import parse_c
from .java import parse_java
from .model import (
    HIGH_KINDS,
    KIND_RANK,
    LOW_KINDS,
    BaseEdge,
    BaseEdgeKind,
    DefKind,
    Language,
    ParseFailure,
    RawDefinition,
    definitions_to_json,
    detect_language,
    extract_base_edges,
)
from .python import parse_python

_PARSERS = {Language.C: parse_c, Language.JAVA: parse_java, Language.PYTHON: parse_python}


class UnsupportedLanguage(ValueError):
    pass


def parse_source(text: str, file: str, language: Language | str | None = None) -> list[RawDefinition]:
    """Parse ``text`` as the given language (inferred from ``file`` if omitted)."""
    lang = Language(language) if language is not None else detect_language(file)
    if lang is None:
        raise UnsupportedLanguage(f"cannot infer language of {file!r}")
    return _PARSERS[lang](text, file)


def parse_file(path: str | Path, language: Language | str | None = None, *, name: str | None = None) -> list[RawDefinition]:
    """Parse a file from disk. ``name`` overrides the path recorded in the records."""
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    return parse_source(text, name or str(path), language)


__all__ = [
    "HIGH_KINDS",
    "KIND_RANK",
    "LOW_KINDS",
    "BaseEdge",
    "BaseEdgeKind",
    "DefKind",
    "Language",
    "ParseFailure",
    "RawDefinition",
    "UnsupportedLanguage",
    "definitions_to_json",
    "detect_language",
    "extract_base_edges",
    "parse_file",
    "parse_source",
]
