"""Scenario files drive the simulator end to end for golden transcripts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from botender.platform.models import PlatformEvent
from botender.platform.simulator import SimulatedPlatform, SimulatedServer


@dataclass
class Scenario:
    """Parsed scenario: a server layout plus an ordered event feed."""

    server: str
    channels: list[str]
    members: list[str]
    events: list[PlatformEvent] = field(default_factory=list)

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Scenario":
        server = doc["server"]
        events = [
            PlatformEvent(
                server_id=server,
                channel=entry["channel"],
                author=entry["author"],
                content=entry["content"],
                at=entry.get("at", index),
            )
            for index, entry in enumerate(doc.get("events", []))
        ]
        return cls(
            server=server,
            channels=list(doc.get("channels", [])),
            members=list(doc.get("members", [])),
            events=events,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        with open(path, encoding="utf-8") as handle:
            return cls.from_doc(json.load(handle))


def run_scenario(platform: SimulatedPlatform, scenario: Scenario) -> SimulatedServer:
    """Install the server, then feed every event through the listener in order."""
    server = platform.add_server(scenario.server, scenario.channels, scenario.members)
    platform.install(scenario.server)
    for event in scenario.events:
        platform.ingest(event)
    return server
