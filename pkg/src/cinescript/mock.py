"""In-process stand-ins for every external service, with request transcripts.

``MockServices`` answers the same wire contract as the real services.  Use
``transport()`` to plug it straight into the httpx-based clients, or
``serve()`` to expose it on a local socket.  Every exchange is appended to
``transcript`` and can be written out with ``dump_transcript``.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Any, Callable, Sequence

import httpx
import numpy as np

DROP = -1  # fault code: close the connection without answering

Fault = Callable[[int, dict], "int | None"]


def _digest(*parts: str) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\0")
    return h.digest()


def naive_script(context: dict) -> dict:
    """A valid script document with one 4 s shot per source line."""
    chars = {c["id"]: c for c in context.get("characters", [])}
    lines = context.get("source_dialogue", []) or [{"speaker": None, "text": "[No Dialogue]"}]
    shots = []
    for i, line in enumerate(lines):
        speaker = line.get("speaker")
        who = chars[speaker]["name"] if speaker in chars else "The scene"
        shots.append(
            {
                "id": f"s{i + 1}",
                "start": 4.0 * i,
                "end": 4.0 * (i + 1),
                "shot_type": "medium",
                "camera_movement": "static",
                "fixed_camera": True,
                "description": f"Medium shot. {who} holds the frame.",
                "dialogue": [{"speaker": speaker if speaker in chars else None, "text": line["text"]}],
                "positions": (
                    {speaker: chars[speaker]["initial_position"]} if speaker in chars else {}
                ),
                "semantic_breakpoint": False,
            }
        )
    return {**context, "shots": shots}


_RUBRIC_KEYS_RE = re.compile(r'^\s*"([^"]+)": \[Score\],?\s*$', re.MULTILINE)


class MockServices:
    def __init__(
        self,
        *,
        drafts: Sequence[str] | None = None,
        preference: float | Callable[[str], float] | None = None,
        judge_responses: Sequence[str] | None = None,
        embed_dim: int = 8,
        faults: dict[str, Fault] | None = None,
    ):
        self.drafts = list(drafts) if drafts is not None else None
        self.preference = preference
        self.judge_responses = list(judge_responses) if judge_responses is not None else None
        self.embed_dim = embed_dim
        self.faults = dict(faults or {})
        self.transcript: list[dict] = []
        self._calls: dict[str, int] = {}
        self._lock = threading.Lock()

    # -- endpoint handlers -------------------------------------------------

    def _generate_script(self, req: dict, n: int) -> dict:
        if self.drafts is None:
            doc = json.dumps(naive_script(req["context"]), indent=2)
        else:
            doc = self.drafts[min(n, len(self.drafts) - 1)]
        return {"script_document": doc}

    def _score(self, req: dict, n: int) -> dict:
        doc = req["script_document"]
        if callable(self.preference):
            return {"score": self.preference(doc)}
        if self.preference is not None:
            return {"score": self.preference}
        return {"score": int.from_bytes(_digest("score", doc)[:4], "big") / 0xFFFFFFFF}

    def _generate_video(self, req: dict, n: int) -> dict:
        return {"clip_uri": f"mock://clip/{n}", "duration_s": req["duration_s"]}

    def _extract_frame(self, req: dict, n: int) -> dict:
        clip = req["clip_uri"].split("://", 1)[-1]
        return {"frame_uri": f"frame://{clip}/{req.get('position', 'last')}"}

    def _embed(self, req: dict, n: int) -> dict:
        seed = int.from_bytes(_digest("embed", req["kind"], req["payload"])[:8], "big")
        vec = np.random.default_rng(seed).normal(size=self.embed_dim)
        return {"e": [round(float(v), 12) for v in vec]}

    def _complete(self, req: dict, n: int) -> dict:
        if self.judge_responses is not None:
            return {"text": self.judge_responses[min(n, len(self.judge_responses) - 1)]}
        keys = _RUBRIC_KEYS_RE.findall(req["prompt"])
        if not keys:
            keys = re.findall(r"\d\. (.+?) \(0\.0.5\.0\):", req["prompt"])
        d = _digest("judge", req["prompt"])
        scores = {k: d[i] % 6 for i, k in enumerate(keys)}
        return {"text": "Evaluation complete.\n" + json.dumps(scores, indent=2)}

    ROUTES = {
        "/v1/generate-script": "_generate_script",
        "/v1/score": "_score",
        "/v1/generate-video": "_generate_video",
        "/v1/extract-frame": "_extract_frame",
        "/v1/embed": "_embed",
        "/v1/complete": "_complete",
    }

    # -- dispatch ----------------------------------------------------------

    def handle(self, path: str, request: Any) -> tuple[int, dict | None]:
        """Answer one request; returns (status, body), status DROP for a dropped call."""
        with self._lock:
            n = self._calls.get(path, 0)
            self._calls[path] = n + 1
        status, body = 200, None
        fault = self.faults.get(path)
        injected = fault(n, request) if fault else None
        if injected is not None:
            status = injected
        elif path not in self.ROUTES:
            status, body = 404, {"error": f"no route {path}"}
        elif not isinstance(request, dict):
            status, body = 400, {"error": "expected a JSON object"}
        else:
            try:
                body = getattr(self, self.ROUTES[path])(request, n)
            except (KeyError, TypeError, ValueError) as exc:
                status, body = 400, {"error": f"bad request: {exc}"}
        with self._lock:
            self.transcript.append(
                {"endpoint": path, "call": n, "request": request, "status": status, "response": body}
            )
        return status, body

    def calls(self, path: str) -> list[dict]:
        return [t for t in self.transcript if t["endpoint"] == path]

    def dump_transcript(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.transcript, indent=2) + "\n", encoding="utf-8")

    # -- transports --------------------------------------------------------

    def transport(self) -> httpx.MockTransport:
        def handler(request: httpx.Request) -> httpx.Response:
            try:
                payload = json.loads(request.content or b"null")
            except ValueError:
                payload = None
            status, body = self.handle(request.url.path, payload)
            if status == DROP:
                raise httpx.ConnectError("mock dropped the connection", request=request)
            return httpx.Response(status, json=body if body is not None else {})

        return httpx.MockTransport(handler)

    def serve(self, host: str = "127.0.0.1", port: int = 0) -> tuple[ThreadingHTTPServer, str]:
        """Serve on a background thread; returns the server and its base URL."""
        services = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):  # noqa: N802
                length = int(self.headers.get("Content-Length", 0))
                try:
                    payload = json.loads(self.rfile.read(length) or b"null")
                except ValueError:
                    payload = None
                status, body = services.handle(self.path, payload)
                if status == DROP:
                    self.close_connection = True
                    return
                data = json.dumps(body if body is not None else {}).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        server = ThreadingHTTPServer((host, port), Handler)
        threading.Thread(target=server.serve_forever, daemon=True).start()
        return server, f"http://{host}:{server.server_address[1]}"


def always(status: int) -> Fault:
    return lambda n, req: status


def after(successes: int, status: int) -> Fault:
    """Answer normally ``successes`` times, then fail every call with ``status``."""
    return lambda n, req: status if n >= successes else None


def first(failures: int, status: int) -> Fault:
    """Fail the first ``failures`` calls, then answer normally."""
    return lambda n, req: status if n < failures else None
