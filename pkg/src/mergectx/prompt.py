"""Six-section resolution prompt built from a versioned text template."""

from __future__ import annotations

import math
import re
from importlib import resources
from string import Template

from .context import ContextGroup
from .ingest import CodeBlock

TEMPLATE_NAME = "prompt_v1.txt"
SECTION_COUNT = 6
SECTION_TITLES = (
    "ROLE",
    "TASK",
    "REASONING STEPS",
    "INPUT AND OUTPUT FORMAT",
    "EXAMPLE",
    "YOUR INPUT",
)
_HEADER = re.compile(r"^=== \[(\d+)/(\d+)\] (.+?) ===$", re.MULTILINE)


class PromptTooLarge(ValueError):
    def __init__(self, estimate: int, budget: int):
        super().__init__(f"prompt needs ~{estimate} tokens, budget is {budget}")
        self.estimate = estimate
        self.budget = budget


def load_template(name: str = TEMPLATE_NAME) -> str:
    return resources.files("mergectx.templates").joinpath(name).read_text(encoding="utf-8")


def estimate_tokens(text: str) -> int:
    """Rough count: four characters per token."""
    return math.ceil(len(text) / 4)


def section_headers(prompt: str) -> list[tuple[int, str]]:
    """``(index, title)`` for every section header, in order of appearance."""
    return [(int(m.group(1)), m.group(3)) for m in _HEADER.finditer(prompt)]


def check_sections(prompt: str) -> bool:
    return section_headers(prompt) == list(enumerate(SECTION_TITLES, start=1))


def build_prompt(
    group: ContextGroup,
    conflict: CodeBlock,
    rendered_context: str,
    *,
    template: str | None = None,
    token_budget: int | None = None,
) -> str:
    """Fill the template's last section with context hunks and the conflict.

    Raises:
        ValueError: ``conflict`` is not one of the group's conflicts.
        PromptTooLarge: the estimated size exceeds ``token_budget``.
    """
    if conflict.id not in group.conflict_blocks:
        raise ValueError(f"{conflict.id} is not a conflict of group {group.group_id}")
    related = f"Related edits:\n{rendered_context.rstrip()}\n" if rendered_context.strip() else ""
    text = Template(template if template is not None else load_template()).substitute(
        related=related,
        file=conflict.file,
        conflict=conflict.text.rstrip("\n"),
    )
    if token_budget is not None:
        need = estimate_tokens(text)
        if need > token_budget:
            raise PromptTooLarge(need, token_budget)
    return text


def payload_section(prompt: str) -> str:
    """Text of the final section (everything after its header)."""
    matches = list(_HEADER.finditer(prompt))
    return prompt[matches[-1].end() :].strip("\n") if matches else ""
