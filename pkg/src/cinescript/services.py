"""JSON-over-HTTP clients for the external services the pipeline drives.

Every client shares one retry policy: transport failures and 429/5xx answers
are retried with exponential backoff; other 4xx answers and malformed bodies
fail immediately as protocol errors.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import httpx

from .errors import ProtocolError, ServiceError

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 1.0
    factor: float = 2.0
    sleep: Callable[[float], None] = time.sleep

    def delay(self, attempt: int) -> float:
        """Pause after failed attempt ``attempt`` (1-based)."""
        return self.base_delay * self.factor ** (attempt - 1)


NO_WAIT = RetryPolicy(sleep=lambda _s: None)


class JsonServiceClient:
    """POSTs JSON to ``base_url + path`` and returns the decoded object."""

    def __init__(
        self,
        base_url: str,
        *,
        transport: httpx.BaseTransport | None = None,
        retry: RetryPolicy | None = None,
        timeout: float = 60.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.retry = retry or RetryPolicy()
        self._http = httpx.Client(base_url=self.base_url, transport=transport, timeout=timeout)

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def post(self, path: str, payload: dict) -> dict:
        last_error = "no attempt made"
        last_status = None
        for attempt in range(1, self.retry.attempts + 1):
            try:
                resp = self._http.post(path, json=payload)
            except httpx.TransportError as exc:
                last_error, last_status = f"{type(exc).__name__}: {exc}", None
            else:
                if resp.status_code in RETRYABLE_STATUS:
                    last_error, last_status = f"HTTP {resp.status_code}", resp.status_code
                elif resp.status_code >= 400:
                    raise ProtocolError(
                        f"POST {path}: HTTP {resp.status_code}", attempts=attempt, status=resp.status_code
                    )
                else:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise ProtocolError(f"POST {path}: body is not JSON", attempts=attempt) from exc
                    if not isinstance(body, dict):
                        raise ProtocolError(f"POST {path}: expected a JSON object", attempts=attempt)
                    return body
            log.warning("POST %s attempt %d/%d failed: %s", path, attempt, self.retry.attempts, last_error)
            if attempt < self.retry.attempts:
                self.retry.sleep(self.retry.delay(attempt))
        raise ServiceError(
            f"POST {path} failed after {self.retry.attempts} attempts: {last_error}",
            attempts=self.retry.attempts,
            status=last_status,
        )


def _field(body: dict, key: str, kind: type | tuple, path: str) -> Any:
    value = body.get(key)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ProtocolError(f"{path}: response field {key!r} missing or wrong type")
    return value


class HttpGenerator(JsonServiceClient):
    """Script generator: ``POST /v1/generate-script``."""

    def generate(self, context: dict, feedback: list[dict], round: int) -> str:
        body = self.post("/v1/generate-script", {"context": context, "feedback": feedback, "round": round})
        return _field(body, "script_document", str, "/v1/generate-script")


class PreferenceScorer(JsonServiceClient):
    """Learned preference score in [0, 1]: ``POST /v1/score``."""

    def __init__(self, base_url: str, *, max_in_flight: int = 4, **kw):
        super().__init__(base_url, **kw)
        self.max_in_flight = max_in_flight
        self._gate = threading.BoundedSemaphore(max_in_flight)

    def score(self, script_document: str) -> float:
        with self._gate:
            body = self.post("/v1/score", {"script_document": script_document})
        value = float(_field(body, "score", (int, float), "/v1/score"))
        if not (0.0 <= value <= 1.0) or math.isnan(value):
            raise ProtocolError(f"/v1/score: score {value!r} outside [0, 1]")
        return value

    def score_many(self, documents: Sequence[str]) -> list[float]:
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            return list(pool.map(self.score, documents))


class VideoGenClient(JsonServiceClient):
    """Clip generation: ``POST /v1/generate-video``."""

    def generate(self, prompt: str, duration_s: float, anchor_uri: str | None) -> tuple[str, float]:
        body = self.post(
            "/v1/generate-video", {"prompt": prompt, "duration_s": duration_s, "anchor_uri": anchor_uri}
        )
        uri = _field(body, "clip_uri", str, "/v1/generate-video")
        duration = float(_field(body, "duration_s", (int, float), "/v1/generate-video"))
        return uri, duration


class MediaClient(JsonServiceClient):
    """Frame extraction: ``POST /v1/extract-frame``."""

    def extract_frame(self, clip_uri: str, position: str = "last") -> str:
        body = self.post("/v1/extract-frame", {"clip_uri": clip_uri, "position": position})
        return _field(body, "frame_uri", str, "/v1/extract-frame")


class EmbedClient(JsonServiceClient):
    """Text or image embedding: ``POST /v1/embed``."""

    def embed(self, kind: str, payload: str) -> list[float]:
        if kind not in ("text", "image"):
            raise ValueError(f"kind must be 'text' or 'image', got {kind!r}")
        body = self.post("/v1/embed", {"kind": kind, "payload": payload})
        vec = _field(body, "e", list, "/v1/embed")
        if not vec or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vec):
            raise ProtocolError("/v1/embed: 'e' must be a non-empty list of numbers")
        return [float(v) for v in vec]


class LlmClient(JsonServiceClient):
    """Judge model completion: ``POST /v1/complete``."""

    def __init__(self, base_url: str, *, max_tokens: int = 2048, **kw):
        super().__init__(base_url, **kw)
        self.max_tokens = max_tokens

    def complete(self, prompt: str) -> str:
        body = self.post("/v1/complete", {"prompt": prompt, "max_tokens": self.max_tokens})
        return _field(body, "text", str, "/v1/complete")
