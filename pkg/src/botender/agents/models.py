"""Task definitions and the prompt assets shared with the provocation engine."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from botender import prompts

DEFAULT_TASK_NAME = "Hello Botender"
DEFAULT_TASK_TRIGGER = "When someone greets Botender in the #botender channel."
DEFAULT_TASK_ACTION = "Reply with a hello and a smiling emoji."


@dataclass(frozen=True)
class Task:
    """A named (trigger, action) prompt pair; the unit the bot executes."""

    id: str
    name: str
    trigger: str
    action: str

    def __post_init__(self) -> None:
        for field_name in ("id", "name", "trigger", "action"):
            if not getattr(self, field_name).strip():
                raise ValueError(f"task {field_name} must be non-empty")


def default_task(task_id: str = "hello-botender") -> Task:
    """The task every fresh install ships with."""
    return Task(
        id=task_id,
        name=DEFAULT_TASK_NAME,
        trigger=DEFAULT_TASK_TRIGGER,
        action=DEFAULT_TASK_ACTION,
    )


@dataclass(frozen=True)
class TaskSet:
    """Immutable snapshot of a server's deployed tasks.

    ``version`` increases by exactly one per deployment; snapshots are what
    routing and execution see, so a concurrent deployment never tears a
    single event's view.
    """

    server_id: str
    tasks: tuple[Task, ...] = ()
    version: int = 0

    def __post_init__(self) -> None:
        ids = [task.id for task in self.tasks]
        if len(ids) != len(set(ids)):
            raise ValueError("task ids must be distinct within a task set")
        if self.version < 0:
            raise ValueError("task set version must be >= 0")

    def get(self, task_id: str) -> Task | None:
        for task in self.tasks:
            if task.id == task_id:
                return task
        return None

    def with_tasks(self, tasks: Sequence[Task]) -> "TaskSet":
        """Next deployment snapshot: new task list, version bumped by one."""
        return replace(self, tasks=tuple(tasks), version=self.version + 1)


@dataclass(frozen=True)
class BotReply:
    """A reply the bot posts, labeled with the task that produced it."""

    text: str
    task_id: str
    task_name: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("bot reply text must be non-empty")
        if self.text.strip().casefold() == "n/a":
            raise ValueError("'n/a' means no reply and never becomes a BotReply")


@dataclass(frozen=True)
class PromptAssets:
    """The shared prompt blocks spliced into every pipeline stage."""

    bot_capability: str
    input_specification: str
    community_description: str
    channels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (self.bot_capability and self.input_specification and self.community_description):
            raise ValueError("prompt assets must all be non-empty")
        if not self.channels or not any(ch in self.input_specification for ch in self.channels):
            raise ValueError("input specification must embed at least one channel name")

    @classmethod
    def for_channels(cls, channels: Sequence[str],
                     community_description: str = prompts.DEFAULT_COMMUNITY_DESCRIPTION,
                     bot_capability: str = prompts.BOT_CAPABILITY) -> "PromptAssets":
        return cls(
            bot_capability=bot_capability,
            input_specification=prompts.render_input_specification(channels),
            community_description=community_description,
            channels=tuple(channels),
        )
