"""OpenAI-style streaming ``/v1/completions`` transport."""

from __future__ import annotations

import json

import httpx

from .transport import Completion, EndpointConfig, GenRequest, TransportError


def completions_url(base_url: str) -> str:
    base = base_url.rstrip("/")
    if base.endswith("/completions"):
        return base
    if base.endswith("/v1"):
        return base + "/completions"
    return base + "/v1/completions"


class HttpTransport:
    """Streams completions over server-sent events.

    Token counts come from the streamed ``usage`` block when the server sends
    one, then from a ``/tokenize`` endpoint, then from a whitespace count
    (flagged as approximate).
    """

    def __init__(self, endpoint: EndpointConfig, client: httpx.AsyncClient | None = None):
        self.endpoint = endpoint
        self.url = completions_url(endpoint.base_url)
        self.tokenize_url = self.url.rsplit("/v1/", 1)[0] + "/tokenize"
        self._tokenize_ok = True
        self.client = client or httpx.AsyncClient(timeout=endpoint.request_timeout)

    def _headers(self) -> dict:
        h = {"Content-Type": "application/json", "Accept": "text/event-stream"}
        if self.endpoint.api_key:
            h["Authorization"] = f"Bearer {self.endpoint.api_key}"
        return h

    async def aclose(self):
        await self.client.aclose()

    async def _count(self, text: str) -> tuple[int, bool]:
        if self._tokenize_ok:
            try:
                r = await self.client.post(self.tokenize_url, headers=self._headers(),
                                           json={"model": self.endpoint.model_name, "prompt": text,
                                                 "add_special_tokens": False})
                if r.status_code == 200:
                    data = r.json()
                    if "count" in data:
                        return int(data["count"]), False
                    return len(data["tokens"]), False
            except (httpx.HTTPError, ValueError, KeyError):
                pass
            self._tokenize_ok = False
        return len(text.split()), True

    async def generate(self, req: GenRequest) -> Completion:
        s = self.endpoint.sampling
        payload = {
            "model": self.endpoint.model_name,
            "prompt": req.prompt,
            "max_tokens": req.max_tokens,
            "temperature": s.temperature,
            "top_p": s.top_p,
            "stream": True,
            "stream_options": {"include_usage": True},
        }
        if req.stop:
            payload["stop"] = list(req.stop)
        if req.seed is not None:
            payload["seed"] = req.seed
        parts: list[str] = []
        finish = None
        usage = None
        try:
            async with self.client.stream("POST", self.url, headers=self._headers(), json=payload) as r:
                if r.status_code >= 400:
                    await r.aread()
                    retryable = r.status_code == 429 or r.status_code >= 500
                    raise TransportError(f"HTTP {r.status_code}: {r.text[:200]}", retryable)
                async for line in r.aiter_lines():
                    if not line.startswith("data:"):
                        continue
                    data = line[5:].strip()
                    if data == "[DONE]":
                        break
                    event = json.loads(data)
                    if event.get("usage"):
                        usage = event["usage"]
                    for choice in event.get("choices") or ():
                        parts.append(choice.get("text") or "")
                        if choice.get("finish_reason"):
                            finish = choice["finish_reason"]
        except httpx.HTTPError as exc:
            raise TransportError(f"{type(exc).__name__}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise TransportError(f"malformed stream event: {exc}") from exc
        text = "".join(parts)
        if usage and usage.get("completion_tokens") is not None:
            n, approx = int(usage["completion_tokens"]), False
        else:
            n, approx = await self._count(text)
        return Completion(text, n, finish == "stop", approx)
