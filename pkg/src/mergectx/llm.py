"""HTTP client for the resolving model and parsing of its replies."""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Protocol

import httpx

log = logging.getLogger(__name__)

DEFAULT_REPEATS = 10


@dataclass(frozen=True)
class ModelConfig:
    """Where and how to ask for a resolution.

    ``retries`` counts extra attempts after the first one. ``adapter``
    selects the wire format: ``chat`` (chat-completions JSON) or ``text``
    (``{"prompt": ...}`` in, ``{"text": ...}`` out).
    """

    endpoint: str = ""
    model: str = ""
    api_key: str | None = field(default=None, repr=False)
    temperature: float = 0.0
    max_tokens: int = 2048
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 1.0
    adapter: str = "chat"
    concurrency: int = 4
    token_budget: int | None = None


class ResolveError(Exception):
    kind = "error"


class EndpointUnreachable(ResolveError):
    kind = "unreachable"


class Timeout(ResolveError):
    kind = "timeout"


class HttpError(ResolveError):
    kind = "http"

    def __init__(self, status: int, body: str = ""):
        super().__init__(f"HTTP {status}: {body[:200]}")
        self.status = status


class BadResponse(ResolveError):
    kind = "bad_response"


class NoCodeFound(ValueError):
    """The model reply holds no usable replacement code."""


class MarkersInOutput(NoCodeFound):
    """The extracted code still contains conflict markers."""


# -- wire adapters ----------------------------------------------------------------


class Adapter(Protocol):
    def payload(self, prompt: str, cfg: ModelConfig) -> dict: ...

    def parse(self, body: Any) -> str: ...


class ChatAdapter:
    def payload(self, prompt: str, cfg: ModelConfig) -> dict:
        return {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }

    def parse(self, body: Any) -> str:
        try:
            return body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BadResponse(f"unexpected chat reply shape: {exc!r}") from None


class TextAdapter:
    def payload(self, prompt: str, cfg: ModelConfig) -> dict:
        return {
            "model": cfg.model,
            "prompt": prompt,
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }

    def parse(self, body: Any) -> str:
        if isinstance(body, dict) and isinstance(body.get("text"), str):
            return body["text"]
        try:
            return body["choices"][0]["text"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BadResponse(f"unexpected text reply shape: {exc!r}") from None


ADAPTERS: dict[str, Adapter] = {"chat": ChatAdapter(), "text": TextAdapter()}


# -- requests -----------------------------------------------------------------------


@dataclass(frozen=True)
class ModelReply:
    text: str
    latency: float
    attempts: int


def _transient(exc: ResolveError) -> bool:
    if isinstance(exc, HttpError):
        return exc.status == 429 or exc.status >= 500
    return isinstance(exc, (EndpointUnreachable, Timeout))


def request_resolution(
    prompt: str,
    cfg: ModelConfig,
    *,
    client: httpx.Client | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> ModelReply:
    """POST ``prompt`` to the configured endpoint and return the reply text.

    Transient failures (connection errors, timeouts, 429 and 5xx) are
    retried with exponential backoff up to ``cfg.retries`` times; the last
    failure is raised as-is.
    """
    if not cfg.endpoint:
        raise EndpointUnreachable("no endpoint configured")
    adapter = ADAPTERS[cfg.adapter]
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    body = adapter.payload(prompt, cfg)
    own = client is None
    http = client if client is not None else httpx.Client()
    start = time.perf_counter()
    try:
        for attempt in range(1, cfg.retries + 2):
            try:
                resp = http.post(cfg.endpoint, json=body, headers=headers, timeout=cfg.timeout)
                if resp.status_code >= 400:
                    raise HttpError(resp.status_code, resp.text)
                try:
                    data = resp.json()
                except json.JSONDecodeError:
                    raise BadResponse("reply is not JSON") from None
                return ModelReply(adapter.parse(data), time.perf_counter() - start, attempt)
            except httpx.TimeoutException as exc:
                err: ResolveError = Timeout(str(exc) or "request timed out")
            except httpx.TransportError as exc:
                err = EndpointUnreachable(str(exc) or type(exc).__name__)
            except ResolveError as exc:
                err = exc
            if not _transient(err) or attempt > cfg.retries:
                raise err
            delay = cfg.backoff * 2 ** (attempt - 1)
            log.info("attempt %d failed (%s); retrying in %.1fs", attempt, err, delay)
            sleep(delay)
        raise AssertionError("unreachable")
    finally:
        if own:
            http.close()


# -- reply parsing -------------------------------------------------------------------

_FENCE = re.compile(r"^[ \t]*(`{3,}|~{3,})[^\n]*\n(.*?)^[ \t]*\1[ \t]*$", re.MULTILINE | re.DOTALL)
_MARKER = re.compile(r"^(<{7}|>{7}|\|{7})(\s|$)|^={7}\s*$", re.MULTILINE)


def extract_resolution(raw_output: str) -> str:
    """Replacement code from a model reply: the last fenced block.

    Raises:
        NoCodeFound: no fenced block in the reply.
        MarkersInOutput: the code still carries conflict markers.
    """
    blocks = _FENCE.findall(raw_output)
    if not blocks:
        raise NoCodeFound("reply contains no fenced code block")
    code = blocks[-1][1]
    if code.endswith("\n"):
        code = code[:-1]
    if _MARKER.search(code):
        raise MarkersInOutput("resolution still contains conflict markers")
    return code


# -- records ---------------------------------------------------------------------------


@dataclass
class ResolutionRecord:
    conflict_id: str
    prompt: str
    raw_output: str = ""
    resolution: str | None = None
    ground_truth: str | None = None
    scores: dict[str, float] | None = None
    repeat: int = 0
    language: str = ""
    error: str | None = None
    latency: float | None = None
    attempts: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> ResolutionRecord:
        return cls(**json.loads(line))


def write_ledger(path: str | Path, records: Iterable[ResolutionRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def read_ledger(path: str | Path) -> list[ResolutionRecord]:
    with open(path, encoding="utf-8") as fh:
        return [ResolutionRecord.from_json(line) for line in fh if line.strip()]
