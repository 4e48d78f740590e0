"""Provider configuration: file- or env-driven, plus the CLI shorthand."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from botender.gateway.provider import CompletionProvider, HttpChatProvider, ScriptedProvider

DEFAULT_MAX_RETRIES = 2


@dataclass(frozen=True)
class ProviderConfig:
    kind: str  # "live" | "scripted"
    endpoint: str | None = None
    model: str | None = None
    credential_env: str = "BOTENDER_API_KEY"
    max_retries: int = DEFAULT_MAX_RETRIES
    temperature: float = 0.0
    script_path: str | None = None
    strict_script: bool = True

    def __post_init__(self) -> None:
        if self.kind not in ("live", "scripted"):
            raise ValueError(f"provider kind must be 'live' or 'scripted', got {self.kind!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path) -> "ProviderConfig":
        with open(path, encoding="utf-8") as handle:
            return cls(**json.load(handle))

    @classmethod
    def from_env(cls, prefix: str = "BOTENDER_") -> "ProviderConfig":
        def get(name: str, default: str | None = None) -> str | None:
            return os.environ.get(prefix + name, default)

        return cls(
            kind=get("PROVIDER", "scripted") or "scripted",
            endpoint=get("ENDPOINT"),
            model=get("MODEL"),
            max_retries=int(get("MAX_RETRIES", str(DEFAULT_MAX_RETRIES)) or DEFAULT_MAX_RETRIES),
            script_path=get("SCRIPT"),
        )

    @classmethod
    def from_cli_spec(cls, spec: str) -> "ProviderConfig":
        """Parse the CLI form: ``scripted:<script-file>`` or ``live``."""
        if spec == "live":
            return cls.from_env().with_kind("live")
        if spec.startswith("scripted:"):
            return cls(kind="scripted", script_path=spec.split(":", 1)[1])
        raise ValueError(f"provider spec must be 'scripted:<script-file>' or 'live', got {spec!r}")

    def with_kind(self, kind: str) -> "ProviderConfig":
        from dataclasses import replace

        return replace(self, kind=kind)

    def build(self) -> CompletionProvider:
        if self.kind == "scripted":
            if not self.script_path:
                raise ValueError("scripted provider needs a script_path")
            return ScriptedProvider.from_file(self.script_path, strict=self.strict_script)
        if not self.endpoint or not self.model:
            raise ValueError("live provider needs endpoint and model")
        return HttpChatProvider(
            endpoint=self.endpoint,
            model=self.model,
            api_key=os.environ.get(self.credential_env),
            temperature=self.temperature,
        )
