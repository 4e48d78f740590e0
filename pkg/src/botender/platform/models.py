"""Adapter-level model of inbound chat events and outbound bot actions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

POST_MESSAGE = "post_message"
CREATE_THREAD = "create_thread"
CREATE_CHANNEL = "create_channel"


@dataclass(frozen=True)
class PlatformEvent:
    """One inbound message event as the listener hands it over."""

    server_id: str
    channel: str
    author: str
    content: str
    at: int = 0

    def __post_init__(self) -> None:
        if not self.channel.startswith("#"):
            raise ValueError("event channel must start with '#'")
        if not self.content.strip():
            raise ValueError("message events carry non-empty content")

    def to_doc(self) -> dict[str, Any]:
        return {
            "type": "event",
            "channel": self.channel,
            "author": self.author,
            "content": self.content,
            "at": self.at,
        }


@dataclass(frozen=True)
class PlatformAction:
    """One outbound action the executor performs on the platform.

    ``target`` is a channel name or thread id for posts and the anchor
    channel for thread creation; ``notice`` marks proposal-lifecycle
    notifications so they can be told apart from bot replies.
    """

    kind: str
    target: str | None = None
    text: str | None = None
    task_label: str | None = None
    notice: str | None = None
    name: str | None = None
    thread_id: str | None = None
    anchor_seq: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in (POST_MESSAGE, CREATE_THREAD, CREATE_CHANNEL):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind == POST_MESSAGE and (self.target is None or self.text is None):
            raise ValueError("post_message needs a target and text")
        if self.kind == CREATE_CHANNEL and not self.name:
            raise ValueError("create_channel needs a channel name")

    def to_doc(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"type": "action", "kind": self.kind}
        for field_name in ("target", "text", "task_label", "notice", "name",
                           "thread_id", "anchor_seq"):
            value = getattr(self, field_name)
            if value is not None:
                doc[field_name] = value
        return doc
