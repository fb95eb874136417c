"""End-to-end orchestration: analyze, group, prompt, resolve and score."""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import httpx

from .align import attachment_map, color_graph
from .config import RunConfig
from .context import (
    ContextGroup,
    cross_version_contexts,
    make_groups,
    render_context,
    single_version_contexts,
)
from .frontend import Language, ParseFailure, RawDefinition, detect_language, parse_source
from .graph import MtCpg, build_mtcpg
from .ingest import (
    BlockKind,
    BlockPair,
    CodeBlock,
    MergeScenario,
    UnbalancedMarkers,
    Version,
    compute_diff_blocks,
    conflict_block_id,
    is_conflict_id,
    load_scenario,
    pair_blocks,
    parse_conflict_markers,
    parse_conflict_regions,
    project_conflicts,
    split_lines,
)
from .llm import (
    ModelConfig,
    NoCodeFound,
    ResolutionRecord,
    ResolveError,
    extract_resolution,
    request_resolution,
)
from .metrics import (
    WINNOW_K,
    WINNOW_W,
    CheckerUnavailable,
    Report,
    aggregate_report,
    ground_truth_resolutions,
    patch_resolution,
    resolved_regions,
    score,
    syntax_check,
)
from .prompt import PromptTooLarge, build_prompt

log = logging.getLogger(__name__)

VERSIONS = (Version.A, Version.B)


@dataclass
class Analysis:
    """Everything derived from one merge scenario before grouping."""

    scenario: MergeScenario
    texts: dict[Version | None, dict[str, str]]
    conflicts: list[CodeBlock]
    blocks: dict[str, CodeBlock]
    pairs: list[BlockPair]
    graphs: dict[Version, MtCpg]
    languages: dict[str, str]
    diagnostics: list[str] = field(default_factory=list)

    def sources(self) -> dict[Version | None, dict[str, str]]:
        return self.texts


def _merged_id(block_id: str) -> str:
    """Map a per-version conflict projection id to its merged-file id."""
    return re.sub(r"@(A|B)#c(\d+)$", r"@Merged#c\2", block_id)


def _read(scenario: MergeScenario, version: Version | None, file: str) -> str | None:
    try:
        return scenario.read(version, file)
    except (OSError, UnicodeDecodeError):
        return None


def analyze(cfg: RunConfig, scenario: MergeScenario | None = None) -> Analysis:
    """Parse both versions, build and color their graphs."""
    if scenario is None:
        if None in (cfg.base, cfg.version_a, cfg.version_b, cfg.merged):
            raise ValueError("scenario needs base, version_a, version_b and merged paths")
        scenario = load_scenario(cfg.base, cfg.version_a, cfg.version_b, cfg.merged, cfg.changed_files)
    diagnostics: list[str] = []
    files = []
    languages: dict[str, str] = {}
    for f in scenario.changed_files:
        lang = detect_language(f)
        if lang is None or (cfg.language and lang.value.lower() != cfg.language.lower()):
            continue
        files.append(f)
        languages[f] = lang.value
    texts: dict[Version | None, dict[str, str]] = {v: {} for v in (None, Version.A, Version.B, Version.MERGED)}
    for f in files:
        for v in texts:
            t = _read(scenario, v, f)
            if t is not None:
                texts[v][f] = t

    conflicts: list[CodeBlock] = []
    blocks: dict[str, CodeBlock] = {}
    per_version: dict[Version, list[CodeBlock]] = {v: [] for v in VERSIONS}
    pairs: list[BlockPair] = []
    for f in files:
        merged = texts[Version.MERGED].get(f)
        if merged is None:
            continue
        try:
            regions = parse_conflict_regions(merged)
            merged_blocks = parse_conflict_markers(merged, f)
        except UnbalancedMarkers as exc:
            diagnostics.append(f"{f}: {exc}")
            continue
        conflicts.extend(merged_blocks)
        diffs: dict[Version, list[CodeBlock]] = {}
        for v in VERSIONS:
            vtext = texts[v].get(f)
            if vtext is None:
                diffs[v] = []
                continue
            projected = []
            for i, (lo, hi) in enumerate(project_conflicts(merged, vtext, v, regions)):
                text = "\n".join(regions[i].side(v))
                projected.append(CodeBlock(conflict_block_id(f, v, i), f, v, lo, hi, BlockKind.CONFLICT, text))
            hunks = compute_diff_blocks(texts[None].get(f, ""), vtext, file=f, version=v)
            # hunks already covered by a conflict are represented by the conflict
            kept = [d for d in hunks if not any(d.intersects(c) for c in projected)]
            diffs[v] = kept
            per_version[v].extend(projected + kept)
        pairs.extend(pair_blocks(diffs[Version.A], diffs[Version.B], texts[None].get(f, "")))
        for b in merged_blocks:
            a_id, b_id = b.id.replace("@Merged#", "@A#"), b.id.replace("@Merged#", "@B#")
            pairs.append(BlockPair(a_id, b_id))
    for b in conflicts:
        blocks[b.id] = b
    for v in VERSIONS:
        for b in per_version[v]:
            blocks[b.id] = b

    graphs: dict[Version, MtCpg] = {}
    for v in VERSIONS:
        defs: dict[str, list[RawDefinition]] = {}
        vdiag: list[str] = []
        for f in files:
            text = texts[v].get(f)
            if text is None:
                continue
            try:
                defs[f] = parse_source(text, f, Language(languages[f]))
            except ParseFailure as exc:
                vdiag.append(f"{v.value}: parse failure {exc}")
        diagnostics.extend(vdiag)
        graph = build_mtcpg(defs, None, files, version=v.value, diagnostics=vdiag)
        line_counts = {f: max(len(split_lines(t)), 1) for f, t in texts[v].items()}
        colored = [b for b in per_version[v] if b.file in defs]
        graphs[v] = color_graph(graph, colored, line_counts)
    return Analysis(scenario, texts, conflicts, blocks, pairs, graphs, languages, diagnostics)


def contexts(analysis: Analysis, k: int, *, visit_cap: int | None = None) -> list[ContextGroup]:
    """Final conflict-centric groups, keyed by merged-file conflict ids.

    Conflicts that no graph node covers (comments between definitions, files
    that failed to parse) still get a group of their own, with no context.
    """
    kw = {} if visit_cap is None else {"visit_cap": visit_cap}
    r_a = single_version_contexts(analysis.graphs[Version.A], k, **kw)
    r_b = single_version_contexts(analysis.graphs[Version.B], k, **kw)
    joint = cross_version_contexts(r_a, r_b, analysis.pairs)
    sets = [{_merged_id(b) if is_conflict_id(b) else b for b in g.member_blocks} for g in joint]
    # one conflict may sit in an A group and a B group that no pair linked
    merged_sets: list[set[str]] = []
    for s in sets:
        overlapping = [m for m in merged_sets if m & s]
        for m in overlapping:
            merged_sets.remove(m)
            s |= m
        merged_sets.append(s)
    covered = set().union(*merged_sets) if merged_sets else set()
    merged_sets += [{c.id} for c in analysis.conflicts if c.id not in covered]
    return make_groups(merged_sets)


def _render_related(group: ContextGroup, analysis: Analysis, focus: str) -> str:
    parts = [render_context(group, analysis.blocks, analysis.sources())]
    for cid in group.conflict_blocks:
        if cid == focus:
            continue
        c = analysis.blocks[cid]
        parts.append(f"Other conflict in {c.file} (merge result lines {c.start_line}-{c.end_line}):\n{c.text}")
    return "\n".join(p for p in parts if p)


@dataclass(frozen=True)
class PromptJob:
    conflict_id: str
    language: str
    prompt: str
    warning: str = ""


def build_prompts(analysis: Analysis, groups: list[ContextGroup], model: ModelConfig) -> list[PromptJob]:
    jobs = []
    for g in groups:
        for cid in g.conflict_blocks:
            conflict = analysis.blocks[cid]
            related = _render_related(g, analysis, cid)
            warning = ""
            try:
                text = build_prompt(g, conflict, related, token_budget=model.token_budget)
            except PromptTooLarge as exc:
                warning = f"{cid}: {exc}; context dropped"
                log.warning(warning)
                text = build_prompt(g, conflict, "")
            jobs.append(PromptJob(cid, analysis.languages.get(conflict.file, ""), text, warning))
    jobs.sort(key=lambda j: j.conflict_id)
    return jobs


def safe_name(block_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", block_id)


def resolve(
    jobs: list[PromptJob],
    model: ModelConfig,
    repeats: int,
    *,
    client: httpx.Client | None = None,
    requester: Callable[..., object] = request_resolution,
) -> list[ResolutionRecord]:
    """Ask the model ``repeats`` times per prompt; failures become records too."""

    def one(job: PromptJob, rep: int) -> ResolutionRecord:
        rec = ResolutionRecord(job.conflict_id, job.prompt, repeat=rep, language=job.language)
        try:
            reply = requester(job.prompt, model, client=client)
        except ResolveError as exc:
            rec.error = f"{exc.kind}: {exc}"
            return rec
        rec.raw_output, rec.latency, rec.attempts = reply.text, reply.latency, reply.attempts
        try:
            rec.resolution = extract_resolution(reply.text)
        except NoCodeFound as exc:
            rec.error = f"{type(exc).__name__}: {exc}"
        return rec

    tasks = [(j, r) for j in jobs for r in range(repeats)]
    with ThreadPoolExecutor(max_workers=max(1, model.concurrency)) as pool:
        return list(pool.map(lambda t: one(*t), tasks))


def _conflict_index(block_id: str) -> tuple[str, int]:
    file, _, tail = block_id.rpartition("@")
    return file, int(tail.rpartition("#c")[2])


class MissingGroundTruth(FileNotFoundError):
    pass


def evaluate(
    records: list[ResolutionRecord],
    merged_dir: Path,
    ground_truth_dir: Path,
    repeats: int,
    *,
    label: str = "run",
    winnow_k: int = WINNOW_K,
    winnow_w: int = WINNOW_W,
    syntax: bool = False,
    checkers: dict[str, list[str]] | None = None,
) -> tuple[list[ResolutionRecord], Report]:
    """Score every record against the resolved tree and aggregate."""
    truths: dict[str, str] = {}
    spans: dict[str, tuple[int, int]] = {}
    resolved_texts: dict[str, str] = {}
    scored = []
    syntax_results: dict[str, list[bool]] = {}
    for r in records:
        if r.conflict_id not in truths:
            file, idx = _conflict_index(r.conflict_id)
            gt_path = ground_truth_dir / file
            merged_path = merged_dir / file
            if not gt_path.is_file():
                raise MissingGroundTruth(f"no ground truth for {file}")
            merged_text = merged_path.read_text(encoding="utf-8")
            resolved = gt_path.read_text(encoding="utf-8")
            truths[r.conflict_id] = ground_truth_resolutions(merged_text, resolved)[idx]
            spans[r.conflict_id] = resolved_regions(merged_text, resolved)[idx]
            resolved_texts[r.conflict_id] = resolved
        truth = truths[r.conflict_id]
        new = replace(r, ground_truth=truth)
        if r.resolution is not None:
            new.scores = score(r.resolution, truth, k=winnow_k, w=winnow_w).as_dict()
            if syntax and r.language:
                patched = patch_resolution(resolved_texts[r.conflict_id], spans[r.conflict_id], r.resolution)
                file = _conflict_index(r.conflict_id)[0]
                try:
                    verdict = syntax_check(
                        patched,
                        r.language,
                        filename=file,
                        srcdir=str((ground_truth_dir / file).parent),
                        commands=checkers,
                    )
                    syntax_results.setdefault(r.language, []).append(verdict.ok)
                except CheckerUnavailable as exc:
                    log.warning("syntax check skipped: %s", exc)
        scored.append(new)
    report = aggregate_report(scored, repeats, label=label)
    report.winnow_k, report.winnow_w = winnow_k, winnow_w
    if syntax_results:
        report.syntax = {lang: 100.0 * sum(v) / len(v) for lang, v in sorted(syntax_results.items())}
    return scored, report


def write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2, sort_keys=True)
    path.write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")


def analysis_artifacts(analysis: Analysis) -> dict[str, str | dict]:
    """Files written by the analyze step, by relative name."""
    out: dict[str, str | dict] = {
        "blocks.json": [b.to_json() for b in sorted(analysis.blocks.values(), key=lambda b: b.id)],
        "pairs.json": [{"block_a": p.block_a, "block_b": p.block_b} for p in analysis.pairs],
    }
    summary = {}
    for v, g in analysis.graphs.items():
        out[f"attachments_{v.value}.json"] = attachment_map(g)
        summary[v.value] = g.summary()
    out["summary.json"] = {"versions": summary, "conflicts": len(analysis.conflicts), "diagnostics": analysis.diagnostics}
    return out
