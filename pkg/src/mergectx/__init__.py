"""Dependency-aware context extraction for resolving merge conflicts with a language model."""

from .align import LineSegmentTree, SpanOutOfRange, build_tree, color_graph, query_blocks
from .context import (
    ContextGroup,
    MissingSource,
    cross_version_contexts,
    render_context,
    single_version_contexts,
)
from .frontend import ParseFailure, RawDefinition, extract_base_edges, parse_file, parse_source
from .graph import EdgeKind, Layer, MtCpg, MtCpgEdge, MtCpgNode, add_cross_layer_edges, add_inter_file_edges, build_mtcpg
from .ingest import (
    BlockKind,
    BlockPair,
    CodeBlock,
    MergeScenario,
    UnbalancedMarkers,
    Version,
    compute_diff_blocks,
    pair_blocks,
    parse_conflict_markers,
)
from .llm import ModelConfig, NoCodeFound, ResolutionRecord, extract_resolution, request_resolution
from .metrics import (
    aggregate_report,
    cosine_similarity,
    edit_distance_similarity,
    syntax_check,
    winnowing_similarity,
)
from .prompt import PromptTooLarge, build_prompt

__version__ = "0.1.0"

__all__ = [
    "BlockKind",
    "BlockPair",
    "CodeBlock",
    "ContextGroup",
    "EdgeKind",
    "Layer",
    "LineSegmentTree",
    "MergeScenario",
    "MissingSource",
    "ModelConfig",
    "MtCpg",
    "MtCpgEdge",
    "MtCpgNode",
    "NoCodeFound",
    "ParseFailure",
    "PromptTooLarge",
    "RawDefinition",
    "ResolutionRecord",
    "SpanOutOfRange",
    "UnbalancedMarkers",
    "Version",
    "add_cross_layer_edges",
    "add_inter_file_edges",
    "aggregate_report",
    "build_mtcpg",
    "build_prompt",
    "build_tree",
    "color_graph",
    "compute_diff_blocks",
    "cosine_similarity",
    "cross_version_contexts",
    "edit_distance_similarity",
    "extract_base_edges",
    "extract_resolution",
    "pair_blocks",
    "parse_conflict_markers",
    "parse_file",
    "parse_source",
    "query_blocks",
    "render_context",
    "request_resolution",
    "single_version_contexts",
    "syntax_check",
    "winnowing_similarity",
]
