"""Similarity scores between a generated resolution and the ground truth."""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import shutil
import subprocess
import sys
import tempfile
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ingest import line_matches, parse_conflict_regions, split_lines

WINNOW_K = 5
WINNOW_W = 4

_TOKEN = re.compile(
    r"[A-Za-z_$][A-Za-z0-9_$]*"
    r"|\d+(?:\.\d+)?(?:[eE][+-]?\d+)?\w*"
    r"|>>>=|<<=|>>=|>>>|\.\.\.|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||::|\*\*|//|[-+*/%&|^]="
    r"|\S"
)


def tokenize(text: str) -> list[str]:
    """Identifiers, numbers and operators as tokens; whitespace dropped."""
    return _TOKEN.findall(text)


# -- edit distance --------------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    """Character edit distance, one numpy row per character of ``a``."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    bb = np.frombuffer(b.encode("utf-32-le"), dtype=np.uint32)
    idx = np.arange(len(b) + 1)
    row = idx.copy()
    for ch in a:
        sub = row[:-1] + (bb != ord(ch))
        dele = row[1:] + 1
        cur = np.empty_like(row)
        cur[0] = row[0] + 1
        cur[1:] = np.minimum(sub, dele)
        # insertions: cur[j] = min_i (cur[i] + j - i)
        row = np.minimum.accumulate(cur - idx) + idx
    return int(row[-1])


def edit_distance_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 100.0
    return 100.0 * (1.0 - levenshtein(a, b) / longest)


# -- winnowing ----------------------------------------------------------------------------


def _hash(gram: Sequence[str]) -> int:
    digest = hashlib.blake2b("\x1f".join(gram).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def kgram_hashes(tokens: Sequence[str], k: int = WINNOW_K) -> list[int]:
    return [_hash(tokens[i : i + k]) for i in range(len(tokens) - k + 1)]


def winnow(hashes: Sequence[int], w: int = WINNOW_W) -> list[tuple[int, int]]:
    """Selected ``(position, hash)`` pairs: the rightmost minimum of each window.

    Fewer than ``w`` hashes form a single window.
    """
    if not hashes:
        return []
    w = min(w, len(hashes))
    picked: list[tuple[int, int]] = []
    for start in range(len(hashes) - w + 1):
        window = hashes[start : start + w]
        low = min(window)
        pos = start + max(i for i, h in enumerate(window) if h == low)
        if not picked or picked[-1][0] != pos:
            picked.append((pos, low))
    return picked


def fingerprints(text: str, k: int = WINNOW_K, w: int = WINNOW_W) -> set[int]:
    return {h for _, h in winnow(kgram_hashes(tokenize(text), k), w)}


def winnowing_similarity(a: str, b: str, *, k: int = WINNOW_K, w: int = WINNOW_W) -> float:
    ta, tb = tokenize(a), tokenize(b)
    if len(ta) < k or len(tb) < k:
        return 100.0 if ta == tb else 0.0
    fa = {h for _, h in winnow(kgram_hashes(ta, k), w)}
    fb = {h for _, h in winnow(kgram_hashes(tb, k), w)}
    return 100.0 * len(fa & fb) / len(fa | fb)


# -- cosine -----------------------------------------------------------------------------


def cosine_similarity(a: str, b: str) -> float:
    ca, cb = Counter(tokenize(a)), Counter(tokenize(b))
    if ca == cb:
        return 100.0  # exact, where the float quotient can fall a hair short
    if not ca or not cb:
        return 0.0
    dot = sum(n * cb[t] for t, n in ca.items())
    norm = math.sqrt(sum(n * n for n in ca.values())) * math.sqrt(sum(n * n for n in cb.values()))
    return min(100.0, 100.0 * dot / norm)


@dataclass(frozen=True)
class SimilarityScores:
    ed: float
    ws: float
    cs: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def score(generated: str, truth: str, *, k: int = WINNOW_K, w: int = WINNOW_W) -> SimilarityScores:
    return SimilarityScores(
        edit_distance_similarity(generated, truth),
        winnowing_similarity(generated, truth, k=k, w=w),
        cosine_similarity(generated, truth),
    )


# -- ground truth and patching --------------------------------------------------------


def resolved_regions(merged_text: str, resolved_text: str) -> list[tuple[int, int]]:
    """0-based half-open line range of each conflict's resolution in ``resolved_text``.

    Lines outside the conflict regions are matched against the resolved file;
    each region's resolution is whatever sits between its matched neighbours.
    """
    merged = split_lines(merged_text)
    regions = parse_conflict_regions(merged_text)
    resolved = split_lines(resolved_text)
    outside: list[str] = []
    cuts: list[int] = []  # position in ``outside`` where each region was
    cursor = 0
    for r in regions:
        outside.extend(merged[cursor : r.start_line - 1])
        cuts.append(len(outside))
        cursor = r.end_line
    outside.extend(merged[cursor:])
    mapping = dict(line_matches(outside, resolved))
    out = []
    for cut in cuts:
        before = next((mapping[i] for i in range(cut - 1, -1, -1) if i in mapping), -1)
        after = next((mapping[i] for i in range(cut, len(outside)) if i in mapping), len(resolved))
        out.append((before + 1, max(before + 1, after)))
    return out


def ground_truth_resolutions(merged_text: str, resolved_text: str) -> list[str]:
    resolved = split_lines(resolved_text)
    return ["\n".join(resolved[lo:hi]) for lo, hi in resolved_regions(merged_text, resolved_text)]


def patch_resolution(resolved_text: str, span: tuple[int, int], replacement: str) -> str:
    """Replace lines ``span`` (0-based, half-open) of the resolved file."""
    lines = split_lines(resolved_text)
    lo, hi = span
    new = split_lines(replacement) if replacement else []
    out = "\n".join(lines[:lo] + new + lines[hi:])
    return out + "\n" if resolved_text.endswith("\n") else out


# -- syntax checking ------------------------------------------------------------------------


class CheckerUnavailable(RuntimeError):
    """The external syntax checker for a language is not installed."""


DEFAULT_CHECKERS: dict[str, list[str]] = {
    "C": ["gcc", "-fsyntax-only", "-w", "-x", "c", "-I{srcdir}", "{file}"],
    "Python": [sys.executable, "-m", "py_compile", "{file}"],
    "Java": ["javac", "-proc:none", "-d", "{tmpdir}", "{file}"],
}


@dataclass(frozen=True)
class SyntaxVerdict:
    ok: bool
    diagnostic: str = ""


def syntax_check(
    patched_file: str,
    language: str,
    *,
    filename: str = "",
    srcdir: str | None = None,
    commands: Mapping[str, Sequence[str]] | None = None,
    timeout: float = 60.0,
) -> SyntaxVerdict:
    """Run the language's checker command on ``patched_file``.

    Command templates may use ``{file}``, ``{tmpdir}`` and ``{srcdir}``.
    """
    table = dict(DEFAULT_CHECKERS)
    table.update(commands or {})
    if language not in table:
        raise CheckerUnavailable(f"no checker configured for {language}")
    template = list(table[language])
    if shutil.which(template[0]) is None:
        raise CheckerUnavailable(f"{template[0]} not found")
    suffix = {"C": ".c", "Python": ".py", "Java": ".java"}.get(language, "")
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, os.path.basename(filename) or f"check{suffix}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(patched_file)
        subs = {"file": path, "tmpdir": tmp, "srcdir": srcdir or tmp}
        argv = [part.format(**subs) for part in template]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout, cwd=tmp)
        except subprocess.TimeoutExpired:
            return SyntaxVerdict(False, "checker timed out")
        diag = (proc.stderr or proc.stdout).replace(tmp + os.sep, "")
        return SyntaxVerdict(proc.returncode == 0, diag.strip())


# -- aggregation ------------------------------------------------------------------------------


class IncompleteRuns(ValueError):
    """Some conflict has fewer records than the requested repeat count."""


LANG_COLUMNS = ("C", "Java", "Python")
METRICS = ("ed", "ws", "cs")


@dataclass
class Report:
    label: str
    repeats: int
    per_language: dict[str, dict[str, float]]
    overall: dict[str, float]
    conflicts: int
    failures: int
    winnow_k: int = WINNOW_K
    winnow_w: int = WINNOW_W
    syntax: dict[str, float] | None = None  # checker pass rate per language

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    def table(self) -> str:
        """One row in the per-language ED/WS/CS layout."""
        cols = [*LANG_COLUMNS, "Overall"]
        head1 = f"{'System':<20}" + "".join(f"| {c:^20}" for c in cols)
        head2 = f"{'':<20}" + "".join("| " + "".join(f"{m.upper():>7}" for m in METRICS)[1:] for _ in cols)
        values = [self.per_language.get(c) for c in LANG_COLUMNS] + [self.overall]
        cells = []
        for v in values:
            cells.append("| " + "".join(f"{v[m]:>7.2f}" if v else f"{'-':>7}" for m in METRICS)[1:])
        row = f"{self.label:<20}" + "".join(cells)
        rule = "-" * len(head1)
        return "\n".join([head1, head2, rule, row])


def _record_scores(r) -> dict[str, float]:
    return r.scores if r.scores else {m: 0.0 for m in METRICS}


def aggregate_report(records: Sequence, repeats: int, *, label: str = "run") -> Report:
    """Mean scores per conflict over repeats, then per language and overall.

    Records without scores (failed requests or extraction) count as zero.
    """
    if not records:
        raise IncompleteRuns("no records")
    by_conflict: dict[str, list] = defaultdict(list)
    for r in records:
        by_conflict[r.conflict_id].append(r)
    short = {c: len(rs) for c, rs in by_conflict.items() if len(rs) < repeats}
    if short:
        raise IncompleteRuns(f"fewer than {repeats} records for {sorted(short)}")
    per_conflict: dict[str, dict[str, float]] = {}
    language: dict[str, str] = {}
    for c, rs in sorted(by_conflict.items()):
        rs = sorted(rs, key=lambda r: r.repeat)[:repeats]
        per_conflict[c] = {m: float(np.mean([_record_scores(r)[m] for r in rs])) for m in METRICS}
        language[c] = rs[0].language

    def mean_of(ids: Iterable[str]) -> dict[str, float]:
        ids = list(ids)
        return {m: float(np.mean([per_conflict[c][m] for c in ids])) for m in METRICS}

    per_language = {}
    for lang in sorted(set(language.values())):
        if lang:
            per_language[lang] = mean_of(c for c in per_conflict if language[c] == lang)
    failures = sum(1 for r in records if not r.scores)
    return Report(label, repeats, per_language, mean_of(per_conflict), len(per_conflict), failures)
