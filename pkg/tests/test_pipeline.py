from __future__ import annotations

import shutil
from dataclasses import replace
from pathlib import Path

import pytest

from mergectx import pipeline
from mergectx.config import RunConfig
from mergectx.context import adjacent_lines
from mergectx.ingest import Version, merge_trees
from mergectx.llm import EndpointUnreachable, ModelConfig, ModelReply, ResolutionRecord
from mergectx.prompt import check_sections, payload_section
from scenarios import Case, coverage_cases, write_case, write_tree


def _scenario(fixtures_dir: Path, name: str, tmp_path: Path) -> RunConfig:
    src = fixtures_dir / name
    merged = tmp_path / "merged"
    merge_trees(src / "base", src / "a", src / "b", merged)
    return RunConfig(base=src / "base", version_a=src / "a", version_b=src / "b", merged=merged, out=tmp_path / "out")


def test_idmap_definition_joins_the_conflict(fixtures_dir: Path, tmp_path: Path) -> None:
    analysis = pipeline.analyze(_scenario(fixtures_dir, "idmap", tmp_path))
    (conflict,) = analysis.conflicts
    signature = analysis.blocks["src/fs.c@A#d0"]
    assert conflict.start_line - signature.end_line >= 90
    (group,) = pipeline.contexts(analysis, 4)
    assert set(group.context_blocks) == {"src/fs.c@A#d0", "include/idmap.h@A#d0"}
    # a fixed 20-line window around the conflict misses the signature change
    lo, hi = adjacent_lines(len(analysis.texts[Version.MERGED]["src/fs.c"].splitlines()), conflict)
    assert not lo <= signature.start_line <= hi
    (job,) = pipeline.build_prompts(analysis, [group], ModelConfig())
    payload = payload_section(job.prompt)
    assert "struct id_map *idmap" in payload and "inode_idmap" in payload


def test_idmap_small_k_keeps_less(fixtures_dir: Path, tmp_path: Path) -> None:
    analysis = pipeline.analyze(_scenario(fixtures_dir, "idmap", tmp_path))
    sizes = [len(pipeline.contexts(analysis, k)[0].member_blocks) for k in (1, 4)]
    assert sizes[0] <= sizes[1] == 3


def test_prompts_are_byte_identical_across_rebuilds(fixtures_dir: Path, tmp_path: Path) -> None:
    cfg = _scenario(fixtures_dir, "e2e", tmp_path)

    def build() -> list[bytes]:
        analysis = pipeline.analyze(cfg)
        jobs = pipeline.build_prompts(analysis, pipeline.contexts(analysis, 4), cfg.model)
        return [j.prompt.encode() for j in jobs]

    first = build()
    assert len(first) == 5
    assert all(build() == first for _ in range(10))


def test_token_budget_drops_context(fixtures_dir: Path, tmp_path: Path) -> None:
    cfg = _scenario(fixtures_dir, "idmap", tmp_path)
    analysis = pipeline.analyze(cfg)
    groups = pipeline.contexts(analysis, 4)
    full = pipeline.build_prompts(analysis, groups, ModelConfig())[0]
    tight = pipeline.build_prompts(analysis, groups, ModelConfig(token_budget=len(full.prompt) // 4 - 10))[0]
    assert payload_section(full.prompt).startswith("Related edits")
    assert payload_section(tight.prompt).startswith("Conflict in")
    assert tight.warning and check_sections(tight.prompt)


@pytest.mark.parametrize("case", coverage_cases(), ids=lambda c: c.name)
def test_conflicts_in_comments_and_ifdefs_get_prompts(case: Case, tmp_path: Path) -> None:
    cfg = write_case(tmp_path, case)
    analysis = pipeline.analyze(cfg)
    jobs = pipeline.build_prompts(analysis, pipeline.contexts(analysis, 4), cfg.model)
    assert [j.conflict_id for j in jobs] == [c.id for c in analysis.conflicts] != []
    assert all(check_sections(j.prompt) for j in jobs)


def test_unparsable_file_still_yields_a_prompt(tmp_path: Path) -> None:
    base = "def f(:\n    return 1\n"
    case = Case("broken", "bad.py", base, base.replace("1", "2"), base.replace("1", "3"))
    cfg = write_case(tmp_path, case)
    analysis = pipeline.analyze(cfg)
    assert any("parse failure" in d for d in analysis.diagnostics)
    (job,) = pipeline.build_prompts(analysis, pipeline.contexts(analysis, 4), cfg.model)
    assert payload_section(job.prompt).startswith("Conflict in bad.py")


def test_language_filter_and_unknown_files(tmp_path: Path) -> None:
    case = coverage_cases()[0]
    cfg = write_case(tmp_path, case)
    for tree in ("a", "merged"):
        write_tree(tmp_path / tree, {"notes.txt": "x\n"})
    assert pipeline.analyze(replace(cfg, language="Python")).conflicts == []
    assert "notes.txt" not in pipeline.analyze(cfg).languages


def test_resolve_records_every_repeat_and_failure(fixtures_dir: Path, tmp_path: Path) -> None:
    cfg = _scenario(fixtures_dir, "e2e", tmp_path)
    analysis = pipeline.analyze(cfg)
    jobs = pipeline.build_prompts(analysis, pipeline.contexts(analysis, 4), cfg.model)

    def requester(prompt, model, client=None):
        if "Conflict in java/Counter.java" in prompt:
            raise EndpointUnreachable("down")
        if "Conflict in py/" in prompt:
            return ModelReply("no fence at all", 0.0, 1)
        return ModelReply("```\nok();\n```", 0.0, 1)

    records = pipeline.resolve(jobs, cfg.model, 3, requester=requester)
    assert len(records) == 15
    assert sorted((r.conflict_id, r.repeat) for r in records) == [(j.conflict_id, i) for j in jobs for i in range(3)]
    by_file = {r.conflict_id.split("@")[0]: r for r in records}
    assert by_file["java/Counter.java"].error.startswith("unreachable")
    assert by_file["py/fields.py"].error.startswith("NoCodeFound")
    assert by_file["src/stack.c"].resolution == "ok();" and by_file["src/stack.c"].error is None


def test_missing_ground_truth(fixtures_dir: Path, tmp_path: Path) -> None:
    cfg = _scenario(fixtures_dir, "e2e", tmp_path)
    shutil.copytree(fixtures_dir / "e2e" / "resolved", tmp_path / "gt")
    (tmp_path / "gt" / "src" / "stack.c").unlink()
    rec = ResolutionRecord("src/stack.c@Merged#c0", "p", resolution="x")
    with pytest.raises(pipeline.MissingGroundTruth):
        pipeline.evaluate([rec], cfg.merged, tmp_path / "gt", 1)
