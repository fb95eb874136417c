from __future__ import annotations

import random
import shutil
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mergectx.llm import ResolutionRecord
from mergectx.metrics import (
    CheckerUnavailable,
    IncompleteRuns,
    aggregate_report,
    cosine_similarity,
    edit_distance_similarity,
    ground_truth_resolutions,
    kgram_hashes,
    levenshtein,
    patch_resolution,
    score,
    syntax_check,
    tokenize,
    winnow,
    winnowing_similarity,
)
from oracles import naive_levenshtein

METRICS = (edit_distance_similarity, winnowing_similarity, cosine_similarity)
ALPHABET = string.ascii_lowercase[:6] + " ();=+\n_"


@settings(max_examples=400, deadline=None)
@given(st.text(ALPHABET, max_size=40), st.text(ALPHABET, max_size=40))
def test_identity_symmetry_range(a: str, b: str) -> None:
    for m in METRICS:
        assert 0.0 <= m(a, b) <= 100.0
        assert m(a, b) == pytest.approx(m(b, a))
        assert m(a, a) == 100.0


def test_levenshtein_matches_naive_dp() -> None:
    rng = random.Random(8)
    for _ in range(500):
        a = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 40)))
        b = "".join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 40)))
        assert levenshtein(a, b) == naive_levenshtein(a, b)
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "abc") == 3


def test_hand_computed_values() -> None:
    assert edit_distance_similarity("abc", "abd") == pytest.approx(66.67, abs=0.01)
    # token counts (x:2, y:1) vs (x:1, y:2): 4 / (sqrt5 * sqrt5)
    assert cosine_similarity("x x y", "x y y") == pytest.approx(80.0, abs=0.01)
    assert cosine_similarity("a", "") == 0.0 and cosine_similarity("", "") == 100.0
    assert edit_distance_similarity("", "") == 100.0


def _winnow_oracle(hashes: list[int], w: int) -> set[int]:
    """Positions picked by the definition: rightmost minimum of every window."""
    if not hashes:
        return set()
    w = min(w, len(hashes))
    picked = set()
    for start in range(len(hashes) - w + 1):
        window = hashes[start : start + w]
        picked.add(max(start + i for i, h in enumerate(window) if h == min(window)))
    return picked


def test_winnowing_matches_definition() -> None:
    rng = random.Random(4)
    for _ in range(300):
        hashes = [rng.randint(0, 9) for _ in range(rng.randint(0, 30))]
        w = rng.randint(1, 6)
        assert {p for p, _ in winnow(hashes, w)} == _winnow_oracle(hashes, w)


def test_winnowing_similarity_behaviour() -> None:
    code = "for (i = 0; i < n; i++) total += values[i];"
    assert winnowing_similarity(code, code) == 100.0
    assert winnowing_similarity(code, code.replace("total", "sum")) < 100.0
    # reformatting changes no token
    assert winnowing_similarity(code, code.replace(" ", "\n")) == 100.0
    # shorter than one k-gram: exact token match only
    assert winnowing_similarity("a b", "a b") == 100.0 and winnowing_similarity("a b", "a c") == 0.0
    assert len(kgram_hashes(tokenize("a b c d e f"), 5)) == 2


def test_tokenizer() -> None:
    assert tokenize("x->y += 0x1F; // hi") == ["x", "->", "y", "+=", "0x1F", ";", "//", "hi"]


def test_ground_truth_and_patch() -> None:
    merged = "a\n<<<<<<< A\nb1\n=======\nb2\n>>>>>>> B\nc\n<<<<<<< A\nd1\n=======\nd2\n>>>>>>> B\n"
    resolved = "a\nB\nc\nD1\nD2\n"
    assert ground_truth_resolutions(merged, resolved) == ["B", "D1\nD2"]
    assert patch_resolution(resolved, (1, 2), "X\nY") == "a\nX\nY\nc\nD1\nD2\n"


@pytest.mark.skipif(shutil.which("gcc") is None, reason="gcc not installed")
def test_c_syntax_check() -> None:
    assert syntax_check("int f(void) { return 1; }\n", "C").ok
    verdict = syntax_check("int f(void) { return 1 }\n", "C", filename="x.c")
    assert not verdict.ok and "x.c" in verdict.diagnostic


def test_python_syntax_check_and_missing_tools() -> None:
    assert syntax_check("x = 1\n", "Python").ok
    assert not syntax_check("x = (\n", "Python").ok
    with pytest.raises(CheckerUnavailable):
        syntax_check("x", "C", commands={"C": ["no-such-compiler-xyz", "{file}"]})
    with pytest.raises(CheckerUnavailable):
        syntax_check("x", "Rust")


def _rec(cid: str, rep: int, lang: str, value: float | None) -> ResolutionRecord:
    scores = None if value is None else {"ed": value, "ws": value, "cs": value}
    return ResolutionRecord(cid, "p", repeat=rep, language=lang, scores=scores)


def test_aggregate_per_conflict_then_language() -> None:
    records = [
        _rec("a.c@Merged#c0", 0, "C", 100.0),
        _rec("a.c@Merged#c0", 1, "C", None),  # failed run counts as zero
        _rec("b.c@Merged#c0", 0, "C", 80.0),
        _rec("b.c@Merged#c0", 1, "C", 60.0),
        _rec("x.py@Merged#c0", 0, "Python", 10.0),
        _rec("x.py@Merged#c0", 1, "Python", 30.0),
    ]
    report = aggregate_report(records, 2, label="demo")
    assert report.per_language["C"]["ed"] == pytest.approx(60.0)
    assert report.per_language["Python"]["cs"] == pytest.approx(20.0)
    assert report.overall["ws"] == pytest.approx((50.0 + 70.0 + 20.0) / 3)
    assert report.conflicts == 3 and report.failures == 1
    table = report.table()
    assert "Overall" in table and "demo" in table and "Java" in table
    with pytest.raises(IncompleteRuns):
        aggregate_report(records, 3)
    with pytest.raises(IncompleteRuns):
        aggregate_report([], 1)


def test_score_bundle() -> None:
    s = score("x = 1;", "x = 1;")
    assert s.as_dict() == {"ed": 100.0, "ws": 100.0, "cs": 100.0}
