from __future__ import annotations

import json

import httpx
import pytest

from mergectx.llm import (
    BadResponse,
    EndpointUnreachable,
    HttpError,
    MarkersInOutput,
    ModelConfig,
    NoCodeFound,
    ResolutionRecord,
    Timeout,
    extract_resolution,
    read_ledger,
    request_resolution,
    write_ledger,
)

CFG = ModelConfig(endpoint="http://model.test/v1/chat/completions", model="m", api_key="k", backoff=0.5)


def _chat(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def _client(handler) -> httpx.Client:
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_retries_server_errors_with_backoff() -> None:
    statuses = iter([500, 500, 200])
    sleeps: list[float] = []
    seen: list[dict] = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen.append(json.loads(request.content))
        assert request.headers["Authorization"] == "Bearer k"
        status = next(statuses)
        return httpx.Response(status, json=_chat("```c\nx = 3;\n```") if status == 200 else {"error": "busy"})

    reply = request_resolution("prompt", CFG, client=_client(handler), sleep=sleeps.append)
    assert reply.attempts == 3 and sleeps == [0.5, 1.0]
    assert extract_resolution(reply.text) == "x = 3;"
    assert seen[0]["messages"] == [{"role": "user", "content": "prompt"}] and seen[0]["temperature"] == 0.0


def test_client_errors_are_not_retried() -> None:
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(1)
        return httpx.Response(401, text="bad key")

    with pytest.raises(HttpError) as err:
        request_resolution("p", CFG, client=_client(handler), sleep=lambda s: None)
    assert err.value.status == 401 and len(calls) == 1


def test_retries_exhausted_on_429() -> None:
    calls = []

    def handler(request: httpx.Request) -> httpx.Response:
        calls.append(1)
        return httpx.Response(429)

    with pytest.raises(HttpError):
        request_resolution("p", CFG, client=_client(handler), sleep=lambda s: None)
    assert len(calls) == CFG.retries + 1


def test_timeout_and_unreachable() -> None:
    def slow(request: httpx.Request) -> httpx.Response:
        raise httpx.ReadTimeout("slow", request=request)

    def down(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(Timeout):
        request_resolution("p", CFG, client=_client(slow), sleep=lambda s: None)
    with pytest.raises(EndpointUnreachable):
        request_resolution("p", CFG, client=_client(down), sleep=lambda s: None)
    with pytest.raises(EndpointUnreachable):
        request_resolution("p", ModelConfig(), sleep=lambda s: None)


def test_text_adapter_and_bad_shapes() -> None:
    cfg = ModelConfig(endpoint="http://model.test/gen", adapter="text")

    def text(request: httpx.Request) -> httpx.Response:
        assert json.loads(request.content)["prompt"] == "p"
        return httpx.Response(200, json={"text": "```\ny\n```"})

    assert request_resolution("p", cfg, client=_client(text)).text == "```\ny\n```"
    with pytest.raises(BadResponse):
        request_resolution("p", CFG, client=_client(lambda r: httpx.Response(200, json={"nope": 1})))
    with pytest.raises(BadResponse):
        request_resolution("p", CFG, client=_client(lambda r: httpx.Response(200, text="not json")))


def test_extraction_takes_last_fence() -> None:
    reply = "Reasoning...\n```c\nfirst();\n```\nFinal:\n```c\nsecond();\nthird();\n```\n"
    assert extract_resolution(reply) == "second();\nthird();"
    assert extract_resolution("~~~\n\n~~~") == ""
    with pytest.raises(NoCodeFound):
        extract_resolution("no code here")
    with pytest.raises(MarkersInOutput):
        extract_resolution("```\n<<<<<<< A\nx\n=======\ny\n>>>>>>> B\n```")


def test_ledger_round_trip(tmp_path) -> None:
    records = [
        ResolutionRecord("f.c@Merged#c0", "p", "raw", "x", repeat=0, language="C", latency=0.1, attempts=1),
        ResolutionRecord("f.c@Merged#c0", "p", repeat=1, error="timeout: slow"),
    ]
    write_ledger(tmp_path / "l.jsonl", records)
    assert read_ledger(tmp_path / "l.jsonl") == records
