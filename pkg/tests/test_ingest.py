from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mergectx.ingest import (
    BlockKind,
    MergeScenario,
    UnbalancedMarkers,
    Version,
    compute_diff_blocks,
    diff_hunks,
    is_conflict_id,
    line_matches,
    load_scenario,
    merge_trees,
    pair_blocks,
    parse_conflict_markers,
    parse_conflict_regions,
    project_conflicts,
)

MERGED = """\
int x;
<<<<<<< A
int a = 1;
||||||| base
int a = 0;
=======
int a = 2;
>>>>>>> B
int y;
<<<<<<< A
f();
=======
g();
h();
>>>>>>> B
"""


def _lcs(a: list[str], b: list[str]) -> int:
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            table[i + 1][j + 1] = table[i][j] + 1 if x == y else max(table[i][j + 1], table[i + 1][j])
    return table[-1][-1]


def test_markers_parse_diff3_and_diff2() -> None:
    regions = parse_conflict_regions(MERGED)
    assert [(r.start_line, r.end_line) for r in regions] == [(2, 8), (10, 15)]
    assert regions[0].ours == ("int a = 1;",)
    assert regions[0].base == ("int a = 0;",)
    assert regions[0].theirs == ("int a = 2;",)
    assert regions[1].base is None
    assert regions[1].theirs == ("g();", "h();")


def test_conflict_blocks_are_merged_version() -> None:
    blocks = parse_conflict_markers(MERGED, "x.c")
    assert [b.id for b in blocks] == ["x.c@Merged#c0", "x.c@Merged#c1"]
    assert all(b.kind is BlockKind.CONFLICT and b.version is Version.MERGED for b in blocks)
    assert blocks[0].text.startswith("<<<<<<< A")
    assert is_conflict_id(blocks[0].id)
    assert not is_conflict_id("x.c@A#d3")


@pytest.mark.parametrize(
    "text",
    [
        "<<<<<<< A\nx\n",
        "x\n>>>>>>> B\n",
        "<<<<<<< A\n<<<<<<< A\n=======\n>>>>>>> B\n",
        "<<<<<<< A\nx\n>>>>>>> B\n",
    ],
)
def test_unbalanced_markers(text: str) -> None:
    with pytest.raises(UnbalancedMarkers):
        parse_conflict_regions(text)


def test_marker_lookalikes_are_content() -> None:
    text = "<<<<<<<<x\n=======x\n"
    assert parse_conflict_regions(text) == []


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from("abcde"), max_size=25),
    st.lists(st.sampled_from("abcde"), max_size=25),
)
def test_line_matches_is_a_longest_common_subsequence(a: list[str], b: list[str]) -> None:
    pairs = line_matches(a, b)
    assert len(pairs) == _lcs(a, b)
    assert all(a[i] == b[j] for i, j in pairs)
    assert all(i1 < i2 and j1 < j2 for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]))


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from("abcd"), max_size=20),
    st.lists(st.sampled_from("abcd"), max_size=20),
)
def test_hunks_cover_every_unmatched_line(a: list[str], b: list[str]) -> None:
    hunks = diff_hunks(a, b)
    matched_a = {i for i, _ in line_matches(a, b)}
    in_hunks = {i for lo, hi, _, _ in hunks for i in range(lo, hi)}
    assert in_hunks == set(range(len(a))) - matched_a


def test_diff_blocks_insertion_replacement_deletion() -> None:
    base = "a\nb\nc\nd\n"
    ver = "a\nB\nc\nx\ny\n"  # b→B, d deleted, x/y added at the end
    blocks = compute_diff_blocks(base, ver, file="f", version=Version.A)
    assert [(b.start_line, b.end_line, b.base_lo, b.base_hi) for b in blocks] == [(2, 2, 1, 2), (4, 5, 3, 4)]
    only_delete = compute_diff_blocks("a\nb\nc\n", "a\nc\n", file="f")
    assert only_delete[0].deletion and only_delete[0].text == ""
    assert (only_delete[0].start_line, only_delete[0].base_lo, only_delete[0].base_hi) == (2, 1, 2)


def test_pairs_follow_base_overlap() -> None:
    base = "1\n2\n3\n4\n5\n6\n"
    a = compute_diff_blocks(base, "1\nX\n3\n4\n5\n6\n", file="f", version=Version.A)
    b = compute_diff_blocks(base, "1\nY\n3\n4\n5\nZ\n", file="f", version=Version.B)
    assert [(p.block_a, p.block_b) for p in pair_blocks(a, b)] == [("f@A#d0", "f@B#d0")]


def test_projection_lands_on_version_lines() -> None:
    merged = "top\n<<<<<<< A\nfoo(1);\n=======\nfoo(2);\n>>>>>>> B\nbottom\n"
    version_a = "top\nextra\nfoo(1);\nbottom\n"
    assert project_conflicts(merged, version_a, Version.A) == [(3, 3)]


def test_merge_trees_and_scenario(tmp_path) -> None:
    for name, body in (("base", "x = 1\n"), ("a", "x = 2\n"), ("b", "x = 3\n")):
        (tmp_path / name).mkdir()
        (tmp_path / name / "m.py").write_text(body)
    (tmp_path / "a" / "new.py").write_text("y = 1\n")
    assert merge_trees(tmp_path / "base", tmp_path / "a", tmp_path / "b", tmp_path / "merged") == ["m.py"]
    assert (tmp_path / "merged" / "new.py").read_text() == "y = 1\n"
    sc = load_scenario(tmp_path / "base", tmp_path / "a", tmp_path / "b", tmp_path / "merged")
    assert sc.changed_files == ["m.py", "new.py"]
    assert sc.read(None, "new.py") is None
    with pytest.raises(ValueError):
        MergeScenario(tmp_path / "base", tmp_path / "a", tmp_path / "a", tmp_path / "merged")
    with pytest.raises(ValueError):
        MergeScenario(tmp_path / "base", tmp_path / "a", tmp_path / "b", tmp_path / "merged", ["gone.py"])
