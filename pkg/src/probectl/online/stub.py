"""Deterministic scripted endpoint for tests and offline demos.

Each branch follows a :class:`BranchScript`: it produces ``length`` filler
tokens (``"w "`` per token) and answers probe ``j`` with ``replies[j]``. The
stub is stateless: position is recovered from the prompt length and the
branch from the request seed, so the same script also backs the HTTP stub
server.
"""

from __future__ import annotations

import asyncio
import json
import math
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .transport import Completion, GenRequest, TransportError

TOKEN = "w "


@dataclass(frozen=True)
class BranchScript:
    length: int
    replies: tuple[str, ...]


@dataclass
class LogEntry:
    kind: str
    branch_id: int
    position: int
    step: int
    prompt: str


@dataclass
class ScriptedTransport:
    prompt: str
    scripts: dict[int, BranchScript]
    delta: int
    suffix: str = "</think> The final answer is"
    fail_plan: dict = field(default_factory=dict)  # (branch, kind, position) -> failures left
    log: list[LogEntry] = field(default_factory=list)
    in_flight: int = 0
    max_in_flight: int = 0

    def _branch(self, req: GenRequest) -> int:
        return req.branch_id if req.seed is None else req.seed

    def respond(self, req: GenRequest) -> Completion:
        b = self._branch(req)
        script = self.scripts[b]
        body = req.prompt[len(self.prompt):]
        if req.kind == "probe":
            if not body.endswith(self.suffix):
                raise TransportError("probe prompt lacks the answer-forcing suffix", retryable=False)
            body = body[: -len(self.suffix)]
        if len(body) % len(TOKEN):
            raise TransportError("prompt does not match the script", retryable=False)
        pos = len(body) // len(TOKEN)
        self.log.append(LogEntry(req.kind, b, pos, req.step, req.prompt))
        key = (b, req.kind, pos)
        if self.fail_plan.get(key, 0) > 0:
            self.fail_plan[key] -= 1
            raise TransportError(f"scripted failure at {key}")
        if req.kind == "probe":
            idx = max(0, math.ceil(pos / self.delta) - 1)
            reply = script.replies[min(idx, len(script.replies) - 1)] if script.replies else ""
            return Completion(reply, max(1, len(reply.split())), True)
        n = max(0, min(req.max_tokens, script.length - pos))
        return Completion(TOKEN * n, n, pos + n >= script.length)

    async def generate(self, req: GenRequest) -> Completion:
        self.in_flight += 1
        self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            await asyncio.sleep(0)
            return self.respond(req)
        finally:
            await asyncio.sleep(0)
            self.in_flight -= 1

    def requests(self, kind: str | None = None, branch_id: int | None = None) -> list[LogEntry]:
        return [e for e in self.log
                if (kind is None or e.kind == kind) and (branch_id is None or e.branch_id == branch_id)]


def serve_stub(transport: ScriptedTransport, host: str = "127.0.0.1", port: int = 0):
    """Serve ``transport`` as an OpenAI-style streaming completions endpoint.

    Returns the running server; its base URL is ``http://host:server.server_port``.
    """

    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def do_POST(self):
            if not self.path.endswith("/completions"):
                self.send_error(404)
                return
            body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
            stop = tuple(body.get("stop") or ())
            probe = body["prompt"].endswith(transport.suffix)
            req = GenRequest(body["prompt"], body["max_tokens"], "probe" if probe else "generate",
                             stop=stop, seed=body.get("seed"))
            try:
                comp = transport.respond(req)
            except TransportError as exc:
                self.send_error(503 if exc.retryable else 400, str(exc))
                return
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.end_headers()
            finish = "stop" if comp.finished else "length"
            pieces = [comp.text[i:i + 64] for i in range(0, len(comp.text), 64)] or [""]
            for k, piece in enumerate(pieces):
                chunk = {"choices": [{"index": 0, "text": piece,
                                      "finish_reason": finish if k == len(pieces) - 1 else None}]}
                self.wfile.write(f"data: {json.dumps(chunk)}\n\n".encode())
            usage = {"choices": [], "usage": {"completion_tokens": comp.n_tokens}}
            self.wfile.write(f"data: {json.dumps(usage)}\n\n".encode())
            self.wfile.write(b"data: [DONE]\n\n")

    server = ThreadingHTTPServer((host, port), Handler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    return server
