"""Completion providers and the retrying gateway in front of them."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Protocol, Sequence, runtime_checkable

from botender.errors import (
    EnvelopeError,
    GatewayError,
    ProviderError,
    ScriptedMissError,
)
from botender.gateway.envelopes import Envelope, EnvelopeSchema, parse_envelope

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChatRequest:
    """One completion request: a system prompt, a user prompt, and the expected envelope."""

    system_prompt: str
    user_prompt: str
    expects: EnvelopeSchema
    max_retries: int = 2

    def __post_init__(self) -> None:
        if not self.system_prompt.strip():
            raise ValueError("system_prompt must be non-empty")
        if not self.user_prompt.strip():
            raise ValueError("user_prompt must be non-empty")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def fingerprint(self) -> str:
        """Stable hash over both prompts, used by hash-matching script entries."""
        digest = hashlib.sha256()
        digest.update(self.system_prompt.encode("utf-8"))
        digest.update(b"\x00")
        digest.update(self.user_prompt.encode("utf-8"))
        return digest.hexdigest()


@runtime_checkable
class CompletionProvider(Protocol):
    """Anything that can answer a ChatRequest with raw text."""

    def complete(self, request: ChatRequest) -> str: ...


@dataclass(frozen=True)
class ScriptEntry:
    """One scripted response, keyed by prompt substrings or a prompt hash.

    ``match`` may be a single substring or a tuple of substrings that must
    all be present (checked over system + user prompt together).
    """

    response: str
    match: str | tuple[str, ...] | None = None
    sha256: str | None = None

    def __post_init__(self) -> None:
        if (self.match is None) == (self.sha256 is None):
            raise ValueError("script entry needs exactly one of 'match' or 'sha256'")

    def matches(self, request: ChatRequest) -> bool:
        if self.sha256 is not None:
            return request.fingerprint() == self.sha256
        text = request.system_prompt + "\n" + request.user_prompt
        needles = (self.match,) if isinstance(self.match, str) else self.match
        return all(needle in text for needle in needles)  # type: ignore[union-attr]


class ScriptedProvider:
    """Deterministic provider that replays canned responses.

    The entry table is ordered and immutable; the first matching entry wins,
    so replaying the same script over the same request sequence is
    byte-identical by construction. In strict mode an unmatched request is
    an error; otherwise ``default`` is returned.
    """

    def __init__(self, entries: Sequence[ScriptEntry], strict: bool = True,
                 default: str = "") -> None:
        self._entries = tuple(entries)
        self._strict = strict
        self._default = default

    @property
    def entries(self) -> tuple[ScriptEntry, ...]:
        return self._entries

    @classmethod
    def from_data(cls, data: Sequence[dict[str, Any]], strict: bool = True,
                  default: str = "") -> "ScriptedProvider":
        """Build from the script format: a JSON array of {match, response} objects.

        ``response`` may be given as an object, in which case it is serialized
        once at load time; ``sha256`` may replace ``match`` for exact-prompt
        pinning.
        """
        entries = []
        for row in data:
            response = row["response"]
            if not isinstance(response, str):
                response = json.dumps(response, ensure_ascii=False)
            match = row.get("match")
            if isinstance(match, list):
                match = tuple(match)
            entries.append(
                ScriptEntry(response=response, match=match, sha256=row.get("sha256"))
            )
        return cls(entries, strict=strict, default=default)

    @classmethod
    def from_file(cls, path: str | Path, strict: bool = True) -> "ScriptedProvider":
        with open(path, encoding="utf-8") as handle:
            return cls.from_data(json.load(handle), strict=strict)

    def complete(self, request: ChatRequest) -> str:
        for entry in self._entries:
            if entry.matches(request):
                return entry.response
        if self._strict:
            raise ScriptedMissError(
                "no script entry matches request "
                f"(user prompt starts: {request.user_prompt[:80]!r})"
            )
        return self._default


class HttpChatProvider:
    """Thin binding to an OpenAI-style chat completions endpoint."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 temperature: float = 0.0, timeout: float = 60.0) -> None:
        self._endpoint = endpoint
        self._model = model
        self._api_key = api_key
        self._temperature = temperature
        self._timeout = timeout

    def complete(self, request: ChatRequest) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        payload = {
            "model": self._model,
            "temperature": self._temperature,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
        }
        try:
            reply = httpx.post(self._endpoint, json=payload, headers=headers,
                               timeout=self._timeout)
            reply.raise_for_status()
            return reply.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise ProviderError(f"completion request failed: {exc}") from exc


@dataclass
class Gateway:
    """Retrying facade over one provider.

    Parse failures re-send the identical request (no corrective suffix) up
    to ``max_retries`` extra times, then surface a terminal GatewayError.
    Transport failures are not retried. Stateless, so safe for concurrent
    callers. ``max_retries`` is the configured default budget the runtime
    stamps onto the requests it builds.
    """

    provider: CompletionProvider
    max_retries: int = 2
    calls: int = field(default=0, repr=False)

    def complete(self, request: ChatRequest) -> str:
        """Raw completion; the provider's text comes back verbatim, unparsed."""
        self.calls += 1
        return self.provider.complete(request)

    def ask(self, request: ChatRequest) -> Envelope:
        """Completion plus envelope parsing with the re-ask policy."""
        last: EnvelopeError | None = None
        for attempt in range(request.max_retries + 1):
            raw = self.complete(request)
            try:
                return parse_envelope(raw, request.expects)
            except EnvelopeError as exc:
                last = exc
                logger.debug("envelope parse failed (attempt %d): %s", attempt + 1, exc)
        raise GatewayError(
            f"provider output never satisfied schema {request.expects.kind.value} "
            f"after {request.max_retries + 1} attempts: {last}"
        ) from last
