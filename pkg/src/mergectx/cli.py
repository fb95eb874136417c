"""Command-line entry point: ``mergectx analyze|contexts|resolve|eval``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import pipeline
from .config import ConfigError, RunConfig, load_config_file, resolve_config
from .context import groups_to_json
from .ingest import merge_trees
from .llm import read_ledger, write_ledger
from .metrics import IncompleteRuns

log = logging.getLogger("mergectx")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--scenario", type=Path, help="directory holding base/, a/, b/ and optionally merged/")
    common.add_argument("--base", type=Path)
    common.add_argument("--version-a", type=Path, dest="version_a")
    common.add_argument("--version-b", type=Path, dest="version_b")
    common.add_argument("--merged", type=Path, help="preliminary merge tree (built with git merge-file if absent)")
    common.add_argument("--language", choices=["C", "Java", "Python"])
    common.add_argument("--k", type=int, help="hop bound for context grouping (default 4)")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--dump-graph", action="store_true", default=None, dest="dump_graph")
    common.add_argument("--model")
    common.add_argument("--endpoint")
    common.add_argument("--repeats", type=int)
    common.add_argument("--dry-run", action="store_true", default=None, dest="dry_run")
    common.add_argument("--ground-truth", type=Path, dest="ground_truth")
    common.add_argument("--ledger", type=Path, help="ledger to score (default <out>/ledger.jsonl)")
    common.add_argument("--syntax", action="store_true", default=None, help="also run syntax checkers")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mergectx", description="Context-aware merge conflict resolution.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="build and color the per-version graphs")
    sub.add_parser("contexts", parents=[common], help="group conflicts with related changes")
    sub.add_parser("resolve", parents=[common], help="prompt the model for every conflict")
    sub.add_parser("eval", parents=[common], help="score a ledger against resolved files")
    return p


_FLAG_KEYS = (
    "base",
    "version_a",
    "version_b",
    "merged",
    "language",
    "k",
    "out",
    "dump_graph",
    "model",
    "endpoint",
    "repeats",
    "dry_run",
    "ground_truth",
    "syntax",
)


def build_config(args: argparse.Namespace) -> RunConfig:
    doc, base_dir = None, None
    if args.config:
        doc = load_config_file(args.config)
        base_dir = args.config.parent
    overrides = {key: getattr(args, key) for key in _FLAG_KEYS}
    if args.scenario:
        for key, sub in (("base", "base"), ("version_a", "a"), ("version_b", "b"), ("merged", "merged")):
            if overrides[key] is None and (key != "merged" or (args.scenario / sub).is_dir()):
                overrides[key] = args.scenario / sub
        if overrides["ground_truth"] is None and (args.scenario / "resolved").is_dir():
            overrides["ground_truth"] = args.scenario / "resolved"
    return resolve_config(doc, overrides, base_dir=base_dir)


def _ensure_merged(cfg: RunConfig) -> None:
    if cfg.merged is not None:
        return
    if None in (cfg.base, cfg.version_a, cfg.version_b):
        raise ConfigError("need --scenario or --base/--version-a/--version-b")
    cfg.merged = cfg.out / "merged"
    merge_trees(cfg.base, cfg.version_a, cfg.version_b, cfg.merged)


def _write_analysis(cfg: RunConfig, analysis: pipeline.Analysis) -> None:
    for name, doc in pipeline.analysis_artifacts(analysis).items():
        pipeline.write_json(cfg.out / name, doc)
    for v, g in analysis.graphs.items():
        pipeline.write_json(cfg.out / f"graph_{v.value}.json", g.to_json())
        if cfg.dump_graph:
            (cfg.out / f"graph_{v.value}.dot").write_text(g.to_dot(), encoding="utf-8")


def _print_counts(analysis: pipeline.Analysis) -> None:
    print(f"{'version':<8} {'nodes':>7} {'base edges':>11} {'MtCPG edges':>12}")
    for v, g in analysis.graphs.items():
        s = g.summary()
        print(f"{v.value:<8} {s['nodes']:>7} {s['base_edges']:>11} {s['edges']:>12}")
    print(f"conflicts: {len(analysis.conflicts)}")
    for d in analysis.diagnostics:
        if "parse failure" in d or "line" in d and ":" in d and "unresolved" not in d:
            print(f"warning: {d}", file=sys.stderr)


def cmd_analyze(cfg: RunConfig) -> pipeline.Analysis:
    _ensure_merged(cfg)
    analysis = pipeline.analyze(cfg)
    _write_analysis(cfg, analysis)
    _print_counts(analysis)
    return analysis


def cmd_contexts(cfg: RunConfig, analysis: pipeline.Analysis | None = None):
    if analysis is None:
        analysis = cmd_analyze(cfg)
    groups = pipeline.contexts(analysis, cfg.k, visit_cap=cfg.visit_cap)
    pipeline.write_json(cfg.out / "groups.json", groups_to_json(groups))
    sizes = [len(g.member_blocks) for g in groups]
    print(f"groups: {len(groups)} (k={cfg.k}); blocks per group: {sizes}")
    return analysis, groups


def cmd_resolve(cfg: RunConfig, *, client=None) -> list:
    analysis, groups = cmd_contexts(cfg)
    jobs = pipeline.build_prompts(analysis, groups, cfg.model)
    prompt_dir = cfg.out / "prompts"
    prompt_dir.mkdir(parents=True, exist_ok=True)
    for old in prompt_dir.glob("*.txt"):
        old.unlink()
    for job in jobs:
        (prompt_dir / f"{pipeline.safe_name(job.conflict_id)}.txt").write_text(job.prompt, encoding="utf-8")
    if cfg.dry_run:
        print(f"dry run: wrote {len(jobs)} prompts to {prompt_dir}")
        return []
    records = pipeline.resolve(jobs, cfg.model, cfg.repeats, client=client)
    write_ledger(cfg.out / "ledger.jsonl", records)
    failed = sum(1 for r in records if r.error)
    print(f"records: {len(records)} ({failed} failed)")
    for r in records:
        if r.error:
            print(f"error: {r.conflict_id} #{r.repeat}: {r.error}", file=sys.stderr)
    return records


def cmd_eval(cfg: RunConfig, ledger: Path | None = None):
    ledger = ledger or cfg.out / "ledger.jsonl"
    if cfg.ground_truth is None:
        raise ConfigError("eval needs --ground-truth")
    if not ledger.is_file():
        raise ConfigError(f"no ledger at {ledger}")
    records = read_ledger(ledger)
    if not records:
        raise IncompleteRuns("ledger is empty")
    _ensure_merged(cfg)
    scored, report = pipeline.evaluate(
        records,
        cfg.merged,
        cfg.ground_truth,
        cfg.repeats,
        label=f"k={cfg.k}",
        winnow_k=cfg.winnow_k,
        winnow_w=cfg.winnow_w,
        syntax=cfg.syntax,
        checkers=cfg.checkers or None,
    )
    write_ledger(cfg.out / "scored.jsonl", scored)
    pipeline.write_json(cfg.out / "report.json", report.to_json())
    print(report.table())
    return report


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = build_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        if args.command == "analyze":
            cmd_analyze(cfg)
        elif args.command == "contexts":
            cmd_contexts(cfg)
        elif args.command == "resolve":
            cmd_resolve(cfg)
        else:
            cmd_eval(cfg, args.ledger)
    except (ConfigError, IncompleteRuns, pipeline.MissingGroundTruth, FileNotFoundError, ValueError) as exc:
        print(f"mergectx: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
