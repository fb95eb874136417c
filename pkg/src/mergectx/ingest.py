"""Three-way merge state: conflict markers, per-version hunks and hunk pairing."""

from __future__ import annotations

import enum
import json
import os
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "BlockKind",
    "BlockPair",
    "CodeBlock",
    "ConflictRegion",
    "MergeScenario",
    "UnbalancedMarkers",
    "Version",
    "blocks_to_json",
    "compute_diff_blocks",
    "conflict_block_id",
    "diff_block_id",
    "is_conflict_id",
    "diff_hunks",
    "line_matches",
    "load_scenario",
    "merge_trees",
    "pair_blocks",
    "parse_conflict_markers",
    "parse_conflict_regions",
    "project_conflicts",
    "split_lines",
]

MARKER_LEN = 7
_OPEN = "<" * MARKER_LEN
_BASE = "|" * MARKER_LEN
_SEP = "=" * MARKER_LEN
_CLOSE = ">" * MARKER_LEN


class Version(str, enum.Enum):
    A = "A"
    B = "B"
    MERGED = "Merged"


class BlockKind(str, enum.Enum):
    CONFLICT = "Conflict"
    DIFF = "Diff"


class UnbalancedMarkers(ValueError):
    """Conflict markers do not form well-nested ``<<<<<<< ... >>>>>>>`` regions."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class CodeBlock:
    """A contiguous, 1-based inclusive line range of one file version.

    ``base_lo``/``base_hi`` give the 0-based half-open base-file range a diff
    hunk replaces (``base_lo == base_hi`` for a pure insertion). They are
    ``None`` for conflict blocks. A ``deletion`` block removes base lines
    and only anchors at a version line; it covers no version text.
    """

    id: str
    file: str
    version: Version
    start_line: int
    end_line: int
    kind: BlockKind
    text: str = ""
    base_lo: int | None = None
    base_hi: int | None = None
    deletion: bool = False

    def __post_init__(self) -> None:
        if self.start_line > self.end_line:
            raise ValueError(f"block {self.id}: start_line > end_line")

    @property
    def is_conflict(self) -> bool:
        return self.kind is BlockKind.CONFLICT

    def intersects(self, other: "CodeBlock") -> bool:
        return (
            self.file == other.file
            and self.start_line <= other.end_line
            and other.start_line <= self.end_line
        )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "file": self.file,
            "version": self.version.value,
            "start_line": self.start_line,
            "end_line": self.end_line,
            "kind": self.kind.value,
        }


@dataclass(frozen=True)
class BlockPair:
    block_a: str
    block_b: str


@dataclass(frozen=True)
class ConflictRegion:
    """One marker region of a merged file; line numbers are 1-based inclusive."""

    start_line: int
    end_line: int
    ours: tuple[str, ...]
    theirs: tuple[str, ...]
    base: tuple[str, ...] | None = None
    ours_label: str = ""
    theirs_label: str = ""
    lines: tuple[str, ...] = ()

    def side(self, version: Version) -> tuple[str, ...]:
        if version is Version.A:
            return self.ours
        if version is Version.B:
            return self.theirs
        raise ValueError("only A and B have a conflict side")

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def split_lines(text: str) -> list[str]:
    return text.splitlines()


def _marker(line: str, marker: str) -> bool:
    if not line.startswith(marker):
        return False
    rest = line[MARKER_LEN:]
    return rest == "" or rest[0] in " \t" or (marker == _SEP and rest.strip() == "")


def parse_conflict_regions(merged_text: str) -> list[ConflictRegion]:
    """Parse diff2- or diff3-style conflict markers into regions."""
    lines = split_lines(merged_text)
    regions: list[ConflictRegion] = []
    state = None  # None | "ours" | "base" | "theirs"
    start = 0
    ours: list[str] = []
    base: list[str] | None = None
    theirs: list[str] = []
    ours_label = ""
    for lineno, line in enumerate(lines, start=1):
        if _marker(line, _OPEN):
            if state is not None:
                raise UnbalancedMarkers("nested conflict marker", lineno)
            state, start = "ours", lineno
            ours, base, theirs = [], None, []
            ours_label = line[MARKER_LEN:].strip()
        elif state is None:
            if _marker(line, _CLOSE):
                raise UnbalancedMarkers("closing marker without opening", lineno)
        elif _marker(line, _BASE):
            if state != "ours":
                raise UnbalancedMarkers("misplaced base marker", lineno)
            state, base = "base", []
        elif _marker(line, _SEP):
            if state == "theirs":
                raise UnbalancedMarkers("duplicate separator", lineno)
            state = "theirs"
        elif _marker(line, _CLOSE):
            if state != "theirs":
                raise UnbalancedMarkers("closing marker before separator", lineno)
            regions.append(
                ConflictRegion(
                    start_line=start,
                    end_line=lineno,
                    ours=tuple(ours),
                    theirs=tuple(theirs),
                    base=None if base is None else tuple(base),
                    ours_label=ours_label,
                    theirs_label=line[MARKER_LEN:].strip(),
                    lines=tuple(lines[start - 1 : lineno]),
                )
            )
            state = None
        elif state == "ours":
            ours.append(line)
        elif state == "base":
            assert base is not None
            base.append(line)
        else:
            theirs.append(line)
    if state is not None:
        raise UnbalancedMarkers("conflict region is never closed", start)
    return regions


def conflict_block_id(file: str, version: Version, index: int) -> str:
    return f"{file}@{version.value}#c{index}"


def diff_block_id(file: str, version: Version, index: int) -> str:
    return f"{file}@{version.value}#d{index}"


def is_conflict_id(block_id: str) -> bool:
    """True for ids minted by ``conflict_block_id``."""
    tail = block_id.rpartition("#")[2]
    return tail[:1] == "c" and tail[1:].isdigit()


def parse_conflict_markers(merged_text: str, file: str = "") -> list[CodeBlock]:
    """Return one Merged-version conflict block per marker region."""
    return [
        CodeBlock(
            id=conflict_block_id(file, Version.MERGED, i),
            file=file,
            version=Version.MERGED,
            start_line=r.start_line,
            end_line=r.end_line,
            kind=BlockKind.CONFLICT,
            text=r.text,
        )
        for i, r in enumerate(parse_conflict_regions(merged_text))
    ]


# -- line diff ---------------------------------------------------------------


def line_matches(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """Matched index pairs of a minimal line diff (Myers' O(ND) algorithm)."""
    n, m = len(a), len(b)
    # trim common prefix/suffix; they are always part of some minimal script
    pre = 0
    while pre < n and pre < m and a[pre] == b[pre]:
        pre += 1
    suf = 0
    while suf < n - pre and suf < m - pre and a[n - 1 - suf] == b[m - 1 - suf]:
        suf += 1
    head = [(i, i) for i in range(pre)]
    tail = [(n - suf + i, m - suf + i) for i in range(suf)]
    core = _myers(a[pre : n - suf], b[pre : m - suf])
    return head + [(x + pre, y + pre) for x, y in core] + tail


def _myers(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    offset = n + m + 1
    v = [0] * (2 * offset + 1)
    trace: list[list[int]] = []
    for d in range(n + m + 1):
        trace.append(v[offset - d - 1 : offset + d + 2])
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                x = v[offset + k + 1]
            else:
                x = v[offset + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[offset + k] = x
            if x >= n and y >= m:
                return _backtrack(trace, n, m)
    raise AssertionError("unreachable")


def _backtrack(trace: list[list[int]], n: int, m: int) -> list[tuple[int, int]]:
    x, y = n, m
    out: list[tuple[int, int]] = []
    for d in range(len(trace) - 1, -1, -1):
        snap = trace[d]  # holds v[k] for k in [-d-1, d+1] at index k + d + 1

        def get(k: int) -> int:
            return snap[k + d + 1]

        k = x - y
        if k == -d or (k != d and get(k - 1) < get(k + 1)):
            prev_k = k + 1
        else:
            prev_k = k - 1
        prev_x = get(prev_k)
        prev_y = prev_x - prev_k
        while x > prev_x and y > prev_y:
            x -= 1
            y -= 1
            out.append((x, y))
        if d > 0:
            x, y = prev_x, prev_y
    out.reverse()
    return out


def diff_hunks(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int, int, int]]:
    """Changed regions as 0-based half-open ``(a_lo, a_hi, b_lo, b_hi)`` tuples."""
    hunks = []
    pa, pb = 0, 0
    for x, y in line_matches(a, b) + [(len(a), len(b))]:
        if x > pa or y > pb:
            hunks.append((pa, x, pb, y))
        pa, pb = x + 1, y + 1
    return hunks


def _anchor(lo: int, count: int) -> tuple[int, int]:
    """1-based inclusive line range for a 0-based slice, never empty."""
    if count <= 0:
        return (max(lo, 0) + 1, max(lo, 0) + 1) if lo >= 0 else (1, 1)
    return lo + 1, lo + count


def compute_diff_blocks(
    base_text: str,
    version_text: str,
    *,
    file: str = "",
    version: Version = Version.A,
) -> list[CodeBlock]:
    """Changed-line hunks of ``version_text`` relative to ``base_text``.

    A pure deletion has no version-side lines; its block is anchored on the
    version line that follows the deletion point (or the last line) and has
    empty ``text``.
    """
    base = split_lines(base_text)
    ver = split_lines(version_text)
    blocks = []
    for i, (alo, ahi, blo, bhi) in enumerate(diff_hunks(base, ver)):
        if bhi > blo:
            start, end = blo + 1, bhi
        else:
            start = min(blo + 1, max(len(ver), 1))
            end = start
        blocks.append(
            CodeBlock(
                id=diff_block_id(file, version, i),
                file=file,
                version=version,
                start_line=start,
                end_line=end,
                kind=BlockKind.DIFF,
                text="\n".join(ver[blo:bhi]),
                base_lo=alo,
                base_hi=ahi,
                deletion=bhi == blo,
            )
        )
    return blocks


def _base_overlap(x: CodeBlock, y: CodeBlock) -> bool:
    assert x.base_lo is not None and x.base_hi is not None
    assert y.base_lo is not None and y.base_hi is not None
    if x.base_lo == x.base_hi or y.base_lo == y.base_hi:
        # an insertion touches any range that contains its insertion point
        return x.base_lo <= y.base_hi and y.base_lo <= x.base_hi
    return max(x.base_lo, y.base_lo) < min(x.base_hi, y.base_hi)


def pair_blocks(
    diffs_a: Iterable[CodeBlock],
    diffs_b: Iterable[CodeBlock],
    base_text: str | None = None,
) -> list[BlockPair]:
    """Pair A/B diff blocks of one file whose base-side ranges overlap.

    ``base_text`` is accepted for interface symmetry; the base ranges are
    carried on the blocks themselves.
    """
    bs = list(diffs_b)
    pairs = []
    for a in diffs_a:
        for b in bs:
            if a.file == b.file and _base_overlap(a, b):
                pairs.append(BlockPair(a.id, b.id))
    return pairs


def project_conflicts(
    merged_text: str,
    version_text: str,
    version: Version,
    regions: Sequence[ConflictRegion] | None = None,
) -> list[tuple[int, int]]:
    """Map each conflict region onto ``version``'s own line numbers.

    The merged file is rewritten with every region replaced by the chosen
    side, then line-diffed against the version file. Returns 1-based
    inclusive ranges, one per region.
    """
    if regions is None:
        regions = parse_conflict_regions(merged_text)
    merged = split_lines(merged_text)
    view: list[str] = []
    spans: list[tuple[int, int]] = []
    cursor = 0
    for r in regions:
        view.extend(merged[cursor : r.start_line - 1])
        lo = len(view)
        view.extend(r.side(version))
        spans.append((lo, len(view)))
        cursor = r.end_line
    view.extend(merged[cursor:])

    ver = split_lines(version_text)
    mapping = dict(line_matches(view, ver))
    out = []
    for lo, hi in spans:
        hit = [mapping[i] for i in range(lo, hi) if i in mapping]
        if hit:
            out.append((min(hit) + 1, max(hit) + 1))
            continue
        prev = next((mapping[i] for i in range(lo - 1, -1, -1) if i in mapping), -1)
        start = min(prev + 2, max(len(ver), 1))
        end = min(start + max(hi - lo, 1) - 1, max(len(ver), 1))
        out.append((start, end))
    return out


# -- scenario ------------------------------------------------------------------


@dataclass
class MergeScenario:
    """The four file trees of one merge plus the files it touches."""

    base_dir: Path
    version_a_dir: Path
    version_b_dir: Path
    merged_dir: Path
    changed_files: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.base_dir = Path(self.base_dir)
        self.version_a_dir = Path(self.version_a_dir)
        self.version_b_dir = Path(self.version_b_dir)
        self.merged_dir = Path(self.merged_dir)
        if self.version_a_dir.resolve() == self.version_b_dir.resolve():
            raise ValueError("version A and version B must be distinct trees")
        missing = [f for f in self.changed_files if not (self.merged_dir / f).is_file()]
        if missing:
            raise ValueError(f"changed files missing from merged tree: {missing}")

    def root(self, version: Version | None) -> Path:
        if version is None:
            return self.base_dir
        return {
            Version.A: self.version_a_dir,
            Version.B: self.version_b_dir,
            Version.MERGED: self.merged_dir,
        }[version]

    def read(self, version: Version | None, file: str) -> str | None:
        """File text of one version, ``None`` when absent (``None`` = base)."""
        path = self.root(version) / file
        if not path.is_file():
            return None
        return path.read_text(encoding="utf-8", errors="replace")


def _tree_files(root: Path) -> set[str]:
    if not root.is_dir():
        return set()
    return {
        p.relative_to(root).as_posix()
        for p in root.rglob("*")
        if p.is_file() and ".git" not in p.relative_to(root).parts
    }


def load_scenario(
    base_dir: str | os.PathLike,
    version_a_dir: str | os.PathLike,
    version_b_dir: str | os.PathLike,
    merged_dir: str | os.PathLike,
    changed_files: Sequence[str] | None = None,
) -> MergeScenario:
    """Build a scenario; by default every merged file that differs between
    base, A and B (or still contains markers) counts as changed."""
    base, a, b, merged = map(Path, (base_dir, version_a_dir, version_b_dir, merged_dir))
    if changed_files is None:
        changed = []
        for rel in sorted(_tree_files(merged)):
            texts = [
                (root / rel).read_bytes() if (root / rel).is_file() else None
                for root in (base, a, b)
            ]
            if texts[0] != texts[1] or texts[0] != texts[2]:
                changed.append(rel)
        changed_files = changed
    return MergeScenario(base, a, b, merged, list(changed_files))


def merge_trees(
    base_dir: str | os.PathLike,
    version_a_dir: str | os.PathLike,
    version_b_dir: str | os.PathLike,
    out_dir: str | os.PathLike,
    *,
    diff3: bool = True,
) -> list[str]:
    """Produce a preliminary merge tree with ``git merge-file``.

    Returns the relative paths that ended up with conflicts. Files present on
    only one side are copied from that side.
    """
    base, a, b, out = map(Path, (base_dir, version_a_dir, version_b_dir, out_dir))
    conflicted = []
    for rel in sorted(_tree_files(base) | _tree_files(a) | _tree_files(b)):
        texts = {
            k: (root / rel).read_bytes() if (root / rel).is_file() else None
            for k, root in (("o", base), ("a", a), ("b", b))
        }
        dest = out / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        if texts["a"] is None or texts["b"] is None:
            survivor = texts["a"] if texts["a"] is not None else texts["b"]
            if survivor is not None and survivor != texts["o"]:
                dest.write_bytes(survivor)
            continue
        cmd = ["git", "merge-file", "-p", "-L", "A", "-L", "base", "-L", "B"]
        if diff3:
            cmd.append("--diff3")
        cmd += [str(a / rel), str(base / rel) if texts["o"] is not None else os.devnull, str(b / rel)]
        proc = subprocess.run(cmd, capture_output=True)
        if proc.returncode < 0 or proc.returncode > 127:
            raise RuntimeError(proc.stderr.decode(errors="replace"))
        dest.write_bytes(proc.stdout)
        if proc.returncode > 0:
            conflicted.append(rel)
    return conflicted


def blocks_to_json(blocks: Iterable[CodeBlock]) -> str:
    return json.dumps([b.to_json() for b in blocks], indent=2)
