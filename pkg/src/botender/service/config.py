"""Service configuration: provider, thresholds, store path, bind address."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from botender.gateway.config import ProviderConfig
from botender.workflow.models import WorkflowConfig


@dataclass(frozen=True)
class ServerSeed:
    """A server the service hosts, installed at startup."""

    id: str
    channels: tuple[str, ...]
    members: tuple[str, ...]


@dataclass(frozen=True)
class ServiceConfig:
    provider: ProviderConfig
    workflow: WorkflowConfig = field(default_factory=WorkflowConfig)
    store_path: str | None = None
    bind_host: str = "127.0.0.1"
    bind_port: int = 8400
    servers: tuple[ServerSeed, ...] = ()
    sessions: tuple[dict[str, Any], ...] = ()

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "ServiceConfig":
        thresholds = doc.get("thresholds", {})
        return cls(
            provider=ProviderConfig(**doc["provider"]),
            workflow=WorkflowConfig(
                deployment_threshold=thresholds.get("deployment_threshold", 3),
                save_vote_gate=thresholds.get("save_vote_gate", 1),
                selector_count=thresholds.get("selector_count", 5),
            ),
            store_path=doc.get("store_path"),
            bind_host=doc.get("bind_host", "127.0.0.1"),
            bind_port=doc.get("bind_port", 8400),
            servers=tuple(
                ServerSeed(id=s["id"], channels=tuple(s["channels"]),
                           members=tuple(s.get("members", ())))
                for s in doc.get("servers", ())
            ),
            sessions=tuple(doc.get("sessions", ())),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_doc(json.load(handle))
