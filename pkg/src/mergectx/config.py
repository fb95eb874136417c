"""Run configuration: defaults < config file < environment < command-line flags."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .context import DEFAULT_K, DEFAULT_VISIT_CAP
from .llm import DEFAULT_REPEATS, ModelConfig
from .metrics import WINNOW_K, WINNOW_W

ENV_API_KEY = "MERGECTX_API_KEY"
ENV_ENDPOINT = "MERGECTX_ENDPOINT"
ENV_MODEL = "MERGECTX_MODEL"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    base: Path | None = None
    version_a: Path | None = None
    version_b: Path | None = None
    merged: Path | None = None
    ground_truth: Path | None = None
    changed_files: list[str] | None = None
    language: str | None = None
    k: int = DEFAULT_K
    visit_cap: int = DEFAULT_VISIT_CAP
    model: ModelConfig = field(default_factory=ModelConfig)
    out: Path = Path("mergectx-out")
    repeats: int = DEFAULT_REPEATS
    dry_run: bool = False
    dump_graph: bool = False
    winnow_k: int = WINNOW_K
    winnow_w: int = WINNOW_W
    checkers: dict[str, list[str]] = field(default_factory=dict)
    syntax: bool = False

    def validate(self) -> None:
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")


_SCENARIO_KEYS = ("base", "version_a", "version_b", "merged", "ground_truth")
_PATH_KEYS = set(_SCENARIO_KEYS) | {"out"}


def _coerce(key: str, value: Any) -> Any:
    if value is None:
        return None
    return Path(value) if key in _PATH_KEYS else value


def load_config_file(path: str | os.PathLike) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    return doc


def resolve_config(
    file_doc: Mapping | None = None,
    overrides: Mapping[str, Any] | None = None,
    env: Mapping[str, str] | None = None,
    *,
    base_dir: Path | None = None,
) -> RunConfig:
    """Merge the layers into one ``RunConfig``.

    ``file_doc`` sections: ``scenario`` (paths), ``model`` (``ModelConfig``
    fields), ``metrics`` (``winnow_k``, ``winnow_w``, ``checkers``) plus
    top-level run options. Relative scenario paths resolve against
    ``base_dir`` (the config file's directory). ``overrides`` holds flag
    values; ``None`` means "not given".
    """
    env = os.environ if env is None else env
    doc = dict(file_doc or {})
    run_fields = {f.name for f in fields(RunConfig)}
    model_fields = {f.name for f in fields(ModelConfig)}
    values: dict[str, Any] = {}
    model_values: dict[str, Any] = {}

    for key, value in (doc.get("scenario") or {}).items():
        if key not in _SCENARIO_KEYS and key != "changed_files":
            raise ConfigError(f"unknown scenario key {key!r}")
        if key in _PATH_KEYS and value is not None and base_dir is not None:
            value = base_dir / value
        values[key] = _coerce(key, value)
    for key, value in (doc.get("model") or {}).items():
        if key not in model_fields:
            raise ConfigError(f"unknown model key {key!r}")
        model_values[key] = value
    for key, value in (doc.get("metrics") or {}).items():
        if key not in ("winnow_k", "winnow_w", "checkers"):
            raise ConfigError(f"unknown metrics key {key!r}")
        values[key] = value
    for key, value in doc.items():
        if key in ("scenario", "model", "metrics"):
            continue
        if key not in run_fields:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "out" and base_dir is not None:
            value = base_dir / value
        values[key] = _coerce(key, value)

    if env.get(ENV_ENDPOINT):
        model_values["endpoint"] = env[ENV_ENDPOINT]
    if env.get(ENV_MODEL):
        model_values["model"] = env[ENV_MODEL]
    if env.get(ENV_API_KEY):
        model_values["api_key"] = env[ENV_API_KEY]

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        # model settings win: ``model`` as a flag is the model name, not the section
        if key in model_fields:
            model_values[key] = value
        elif key in run_fields:
            values[key] = _coerce(key, value)
        else:
            raise ConfigError(f"unknown option {key!r}")

    cfg = RunConfig(**values)
    cfg.model = replace(cfg.model, **model_values)
    cfg.validate()
    return cfg
