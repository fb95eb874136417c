# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # End to end on a small multi-language merge
#
# The scenario has five conflicts across C, Python and Java. We run the same
# steps as the `mergectx` command line, but with a stand-in model that answers
# from the resolved tree, so the whole loop runs offline. A perfect resolver
# must score 100 on every metric; anything less points at the plumbing.

# %%
from __future__ import annotations

import re
import tempfile
from pathlib import Path

from mergectx import pipeline
from mergectx.config import RunConfig
from mergectx.ingest import merge_trees
from mergectx.llm import ModelReply
from mergectx.metrics import ground_truth_resolutions

ROOT = next(p for p in [Path.cwd(), *Path.cwd().parents] if (p / "pyproject.toml").exists())
SCENARIO = ROOT / "tests" / "fixtures" / "e2e"
REPEATS = 3

# %%
work = Path(tempfile.mkdtemp())
conflicted = merge_trees(SCENARIO / "base", SCENARIO / "a", SCENARIO / "b", work / "merged")
cfg = RunConfig(
    base=SCENARIO / "base",
    version_a=SCENARIO / "a",
    version_b=SCENARIO / "b",
    merged=work / "merged",
    ground_truth=SCENARIO / "resolved",
    out=work / "out",
)
print(conflicted)

# %% [markdown]
# ## Groups and prompts

# %%
analysis = pipeline.analyze(cfg)
groups = pipeline.contexts(analysis, cfg.k)
for g in groups:
    print(list(g.conflict_blocks), "context:", list(g.context_blocks))
jobs = pipeline.build_prompts(analysis, groups, cfg.model)
print(len(jobs), "prompts")

# %% [markdown]
# ## An offline resolver
#
# The stand-in model looks up the conflict being asked about and returns the
# known resolution inside a code fence, the same shape a chat model replies in.

# %%
truth: dict[str, str] = {}
for c in analysis.conflicts:
    file, idx = c.id.split("@")[0], int(c.id.rpartition("#c")[2])
    merged = (cfg.merged / file).read_text()
    truth[c.id] = ground_truth_resolutions(merged, (cfg.ground_truth / file).read_text())[idx]
by_prompt = {j.prompt: truth[j.conflict_id] for j in jobs}


def oracle(prompt, model, client=None):
    return ModelReply(f"```\n{by_prompt[prompt]}\n```", 0.0, 1)


records = pipeline.resolve(jobs, cfg.model, REPEATS, requester=oracle)
print(len(records), "records,", sum(r.error is not None for r in records), "failures")

# %% [markdown]
# ## Scores

# %%
scored, report = pipeline.evaluate(records, cfg.merged, cfg.ground_truth, REPEATS, label="oracle")
print(report.table())
assert report.overall == {"ed": 100.0, "ws": 100.0, "cs": 100.0}

# %% [markdown]
# A resolver that keeps only side A does worse, and the metrics separate the
# languages where the two sides diverge the most.

# %%
side_a = re.compile(r"^<<<<<<<[^\n]*\n(.*?)^(?:\|{7}|=======)", re.MULTILINE | re.DOTALL)
ours = {}
for c in analysis.conflicts:
    file, idx = c.id.split("@")[0], int(c.id.rpartition("#c")[2])
    ours[c.id] = side_a.findall((cfg.merged / file).read_text())[idx].rstrip("\n")
keep_a = {j.prompt: ours[j.conflict_id] for j in jobs}
records = pipeline.resolve(jobs, cfg.model, REPEATS, requester=lambda p, m, client=None: ModelReply(f"```\n{keep_a[p]}\n```", 0.0, 1))
_, baseline = pipeline.evaluate(records, cfg.merged, cfg.ground_truth, REPEATS, label="keep side A")
print(baseline.table())
