"""Deterministic in-memory chat platform: listener, executor, notifications.

The transcript is the single source of truth; entries carry a logical
sequence number instead of wall-clock time, so identical event sequences
over identical scripts replay byte-identically.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Any

from botender.agents.models import BotReply, PromptAssets, TaskSet, default_task
from botender.agents.runtime import handle_message
from botender.errors import AlreadyInstalledError, NotFoundError, NotInstalledError
from botender.gateway.provider import Gateway
from botender.platform.models import (
    CREATE_CHANNEL,
    CREATE_THREAD,
    POST_MESSAGE,
    PlatformAction,
    PlatformEvent,
)
from botender.platform.registry import TaskSetRegistry

logger = logging.getLogger(__name__)

BOT_CHANNEL = "#botender"

NOTICE_TEXT = {
    "created": 'New proposal: "{title}". Join the discussion in its thread.',
    "edit_saved": 'Proposal "{title}" has a new saved edit. Take a look and vote.',
    "deployed": 'Proposal "{title}" was deployed. The bot now runs the updated tasks.',
    "closed": 'Proposal "{title}" was closed.',
    "reopened": 'Proposal "{title}" was reopened.',
}


@dataclass
class SimulatedServer:
    """State of one simulated chat server."""

    server_id: str
    channels: list[str]
    members: list[str]
    installed: bool = False
    transcript: list[dict[str, Any]] = field(default_factory=list)
    threads: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    _seq: int = 0
    _thread_count: int = 0

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def next_thread_id(self) -> str:
        self._thread_count += 1
        return f"thread-{self._thread_count}"


class SimulatedPlatform:
    """Test double for the live platform; also the workflow's PlatformPort."""

    def __init__(self, gateway: Gateway) -> None:
        self.gateway = gateway
        self.registry = TaskSetRegistry()
        self.servers: dict[str, SimulatedServer] = {}
        self.anomalies: list[str] = []
        self._lock = threading.RLock()

    # -- setup ---------------------------------------------------------------

    def add_server(self, server_id: str, channels: list[str],
                   members: list[str]) -> SimulatedServer:
        server = SimulatedServer(server_id=server_id, channels=list(channels),
                                 members=list(members))
        self.servers[server_id] = server
        return server

    def _server(self, server_id: str) -> SimulatedServer:
        server = self.servers.get(server_id)
        if server is None:
            raise NotFoundError(f"no server {server_id!r}")
        return server

    def install(self, server_id: str) -> TaskSet:
        """Create the bot channel (reusing an existing one) and seed the
        default greeting task at version 0."""
        with self._lock:
            server = self._server(server_id)
            if server.installed:
                raise AlreadyInstalledError(f"server {server_id!r} is already installed")
            if BOT_CHANNEL not in server.channels:
                server.channels.append(BOT_CHANNEL)
                self._record(server, PlatformAction(kind=CREATE_CHANNEL, name=BOT_CHANNEL))
            task_set = TaskSet(server_id=server_id, tasks=(default_task(),), version=0)
            self.registry.set(server_id, task_set)
            server.installed = True
            return task_set

    def create_channel(self, server_id: str, name: str) -> None:
        """Add a channel to an installed server, recording the action."""
        with self._lock:
            server = self._server(server_id)
            if not server.installed:
                raise NotInstalledError(f"server {server_id!r} is not installed")
            if not name.startswith("#"):
                raise ValueError("channel names start with '#'")
            if name in server.channels:
                raise ValueError(f"channel {name!r} already exists on {server_id!r}")
            server.channels.append(name)
            self._record(server, PlatformAction(kind=CREATE_CHANNEL, name=name))

    # -- listener / executor ---------------------------------------------------

    def ingest(self, event: PlatformEvent) -> BotReply | None:
        """Forward a message event to the bot against the current task set.

        Events for unknown, uninstalled, or channel-less destinations are
        dropped with an anomaly; a reply becomes a labeled post_message.
        """
        with self._lock:
            server = self.servers.get(event.server_id)
            if server is None or not server.installed:
                self.anomalies.append(
                    f"dropped event for uninstalled server {event.server_id!r}")
                return None
            if event.channel not in server.channels:
                self.anomalies.append(
                    f"dropped event for unknown channel {event.channel!r} "
                    f"on {event.server_id!r}")
                return None
            task_set = self.registry.get(event.server_id)
            self._record_event(server, event)

        # The provider round-trip happens outside the transcript lock; the
        # per-platform lock above still serializes events per process, which
        # keeps reply ordering per (server, channel).
        exchange = handle_message(task_set, event.channel, event.content, self.gateway)

        with self._lock:
            self.anomalies.extend(exchange.anomalies)
            reply = exchange.reply
            if reply is not None:
                self._record(server, PlatformAction(
                    kind=POST_MESSAGE, target=event.channel,
                    text=reply.text, task_label=reply.task_name,
                ))
            return reply

    def notify(self, server_id: str, event: str, title: str,
               thread_ref: str | None) -> str | None:
        """Emit proposal-lifecycle notifications.

        "created" posts to the bot channel and opens a thread whose id comes
        back for the proposal to keep. Thread-targeted notices without a
        thread fall back to the bot channel with an anomaly.
        """
        if event not in NOTICE_TEXT:
            raise ValueError(f"unknown proposal event {event!r}")
        text = NOTICE_TEXT[event].format(title=title)
        with self._lock:
            server = self._server(server_id)
            if not server.installed:
                raise NotInstalledError(f"server {server_id!r} is not installed")

            if event == "created":
                anchor = self._record(server, PlatformAction(
                    kind=POST_MESSAGE, target=BOT_CHANNEL, text=text, notice=event))
                thread_id = server.next_thread_id()
                server.threads[thread_id] = []
                self._record(server, PlatformAction(
                    kind=CREATE_THREAD, target=BOT_CHANNEL,
                    thread_id=thread_id, anchor_seq=anchor["seq"]))
                return thread_id

            if event == "deployed":
                self._post_thread(server, thread_ref, text, event)
                self._record(server, PlatformAction(
                    kind=POST_MESSAGE, target=BOT_CHANNEL, text=text, notice=event))
                return thread_ref

            self._post_thread(server, thread_ref, text, event)
            return thread_ref

    def _post_thread(self, server: SimulatedServer, thread_ref: str | None,
                     text: str, notice: str) -> None:
        if thread_ref is None or thread_ref not in server.threads:
            self.anomalies.append(
                f"thread notification without a thread on {server.server_id!r}; "
                "fell back to the bot channel")
            self._record(server, PlatformAction(
                kind=POST_MESSAGE, target=BOT_CHANNEL, text=text, notice=notice))
            return
        entry = self._record(server, PlatformAction(
            kind=POST_MESSAGE, target=thread_ref, text=text, notice=notice))
        server.threads[thread_ref].append(entry)

    # -- queries ---------------------------------------------------------------

    def list_channels(self, server_id: str) -> list[str]:
        server = self._server(server_id)
        if not server.installed:
            raise NotInstalledError(f"server {server_id!r} is not installed")
        return list(server.channels)

    def assets(self, server_id: str) -> PromptAssets:
        return PromptAssets.for_channels(self.list_channels(server_id))

    def transcript_jsonl(self, server_id: str) -> str:
        """The golden-test export: one JSON entry per line, stable key order."""
        server = self._server(server_id)
        return "\n".join(
            json.dumps(entry, ensure_ascii=False) for entry in server.transcript
        ) + ("\n" if server.transcript else "")

    # -- workflow PlatformPort --------------------------------------------------

    def live_task_set(self, server_id: str) -> TaskSet:
        return self.registry.get(server_id)

    def set_task_set(self, server_id: str, task_set: TaskSet) -> None:
        self.registry.set(server_id, task_set)

    def server_lock(self, server_id: str) -> threading.RLock:
        return self.registry.lock(server_id)

    # -- internals ----------------------------------------------------------

    def _record_event(self, server: SimulatedServer, event: PlatformEvent) -> dict[str, Any]:
        entry = {"seq": server.next_seq(), **event.to_doc()}
        server.transcript.append(entry)
        return entry

    def _record(self, server: SimulatedServer, action: PlatformAction) -> dict[str, Any]:
        entry = {"seq": server.next_seq(), **action.to_doc()}
        server.transcript.append(entry)
        return entry
