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
# # From source files to conflict groups
#
# This walkthrough builds the multi-layer graph for a three-file C project
# (a `Point` struct, a `PI` macro and an `area` function used from `main.c`).
# It then colors the graph with a diff block and shows how the hop bound `k`
# decides which edits travel together with a distant merge conflict.

# %%
from __future__ import annotations

import tempfile
from collections import Counter
from pathlib import Path

from mergectx import pipeline
from mergectx.align import build_tree, query_blocks
from mergectx.config import RunConfig
from mergectx.frontend import parse_file
from mergectx.graph import build_mtcpg
from mergectx.ingest import BlockKind, CodeBlock, Version, merge_trees

ROOT = next(p for p in [Path.cwd(), *Path.cwd().parents] if (p / "pyproject.toml").exists())
FIXTURES = ROOT / "tests" / "fixtures"

# %% [markdown]
# ## The graph
#
# Every file is parsed into definitions. Struct, macro, import and global
# definitions live in the High layer; functions, members and statements in
# the Low layer. Base edges come from the syntax tree and data flow, the
# multi-layer pass adds cross-layer and inter-file links.

# %%
src = FIXTURES / "point_area"
defs = {p.name: parse_file(p, name=p.name) for p in sorted(src.iterdir())}
graph = build_mtcpg(defs, version="A")
print(graph.summary())
print(Counter(e.kind.value for e in graph.edges))

# %%
for e in graph.edges:
    if not e.kind.is_base:
        a, b = graph.nodes[e.src], graph.nodes[e.dst]
        print(f"{e.kind.value:<11} {a.file}:{a.line_span[0]} {a.kind.value} {a.name} -> {b.file}:{b.line_span[0]} {b.kind.value} {b.name}")

# %% [markdown]
# ## Alignment
#
# A changed line range is mapped to the nodes whose own lines it touches.
# Lines 3 and 4 of `main.c` hit the two local variable definitions and the
# statement that calls `area`. The enclosing `main` owns only its header and
# closing brace, so it is not hit.

# %%
main = [graph.nodes[i] for i in graph.file_index["main.c"]]
tree = build_tree("main.c", 6, main)
hit = query_blocks(tree, CodeBlock("main.c@A#d0", "main.c", Version.A, 3, 4, BlockKind.DIFF))
for i in sorted(hit):
    n = graph.nodes[i]
    print(n.kind.value, n.name, n.line_span)

# %% [markdown]
# ## A distant dependency
#
# In the `idmap` scenario one side changes the signature of a helper about a
# hundred lines above the conflicting call. A fixed window around the conflict
# would never show that edit. Grouping on the graph does: one hop already links
# the new signature, and the header that declares `struct id_map` joins at two.

# %%
work = Path(tempfile.mkdtemp())
idmap = FIXTURES / "idmap"
merge_trees(idmap / "base", idmap / "a", idmap / "b", work / "merged")
cfg = RunConfig(base=idmap / "base", version_a=idmap / "a", version_b=idmap / "b", merged=work / "merged")
analysis = pipeline.analyze(cfg)
(conflict,) = analysis.conflicts
print(conflict.id, conflict.start_line, conflict.end_line)

# %%
for k in (1, 2, 4, 8):
    (group,) = pipeline.contexts(analysis, k)
    print(f"k={k}: context {list(group.context_blocks)}")

# %% [markdown]
# The prompt for `k=4` carries both related edits as patch hunks ahead of the
# conflict itself.

# %%
(job,) = pipeline.build_prompts(analysis, pipeline.contexts(analysis, 4), cfg.model)
print(job.prompt[job.prompt.index("=== [6/6]"):])
