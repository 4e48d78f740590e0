"""Proposals, versioned edits, saved cases, votes, and the test report."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from botender.agents.models import Task
from botender.errors import ConflictError

OPEN = "open"
DEPLOYED = "deployed"
CLOSED = "closed"

UP = "up"
DOWN = "down"

ORIGIN_GENERATED = "generated"
ORIGIN_MANUAL = "manual"
ORIGIN_PLAYGROUND = "playground"


@dataclass(frozen=True)
class WorkflowConfig:
    deployment_threshold: int = 3
    save_vote_gate: int = 1
    selector_count: int = 5

    def __post_init__(self) -> None:
        for name in ("deployment_threshold", "save_vote_gate", "selector_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class TaskChange:
    """One add/edit/remove over the task set.

    add and edit carry a full task snapshot; remove carries only the id.
    """

    op: str
    task: Task | None = None
    task_id: str | None = None

    def __post_init__(self) -> None:
        if self.op not in ("add", "edit", "remove"):
            raise ValueError(f"change op must be add/edit/remove, got {self.op!r}")
        if self.op in ("add", "edit") and self.task is None:
            raise ValueError(f"{self.op} change needs a full task snapshot")
        if self.op == "remove" and not self.task_id:
            raise ValueError("remove change needs a task id")

    @property
    def target_id(self) -> str:
        return self.task.id if self.task is not None else self.task_id  # type: ignore[union-attr]

    def to_doc(self) -> dict[str, Any]:
        if self.op == "remove":
            return {"op": "remove", "task_id": self.task_id}
        assert self.task is not None
        return {"op": self.op, "task": {
            "id": self.task.id, "name": self.task.name,
            "trigger": self.task.trigger, "action": self.task.action,
        }}

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "TaskChange":
        if doc["op"] == "remove":
            return cls(op="remove", task_id=doc["task_id"])
        task = doc["task"]
        return cls(op=doc["op"], task=Task(
            id=task["id"], name=task["name"],
            trigger=task["trigger"], action=task["action"],
        ))


def draft_hash(changes: Sequence[TaskChange]) -> str:
    """Stable content hash binding a test report to the draft it tested."""
    canonical = json.dumps([change.to_doc() for change in changes],
                           sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def apply_changes(tasks: Sequence[Task], changes: Sequence[TaskChange]) -> list[Task]:
    """Apply a cumulative change-set to a task list, atomically.

    Raises ConflictError if any change is inapplicable (duplicate add,
    edit/remove of a missing id); on error the input is untouched.
    """
    result = list(tasks)
    ids = {task.id for task in result}
    for change in changes:
        if change.op == "add":
            assert change.task is not None
            if change.task.id in ids:
                raise ConflictError(f"add conflicts with existing task id {change.task.id!r}")
            result.append(change.task)
            ids.add(change.task.id)
        elif change.op == "edit":
            assert change.task is not None
            if change.task.id not in ids:
                raise ConflictError(f"edit targets missing task id {change.task.id!r}")
            result = [change.task if t.id == change.task.id else t for t in result]
        else:  # remove
            if change.task_id not in ids:
                raise ConflictError(f"remove targets missing task id {change.task_id!r}")
            result = [t for t in result if t.id != change.task_id]
            ids.discard(change.task_id)
    return result


@dataclass(frozen=True)
class HistoryEntry:
    """How the bot answered one saved case under one edit version."""

    version: int
    triggered_task: str | None
    bot_response: str | None

    def to_doc(self) -> dict[str, Any]:
        return {"version": self.version, "triggered_task": self.triggered_task,
                "bot_response": self.bot_response}

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "HistoryEntry":
        return cls(version=doc["version"], triggered_task=doc["triggered_task"],
                   bot_response=doc["bot_response"])


@dataclass
class SavedCase:
    id: str
    channel: str
    user_message: str
    origin: str
    created_version: int
    response_history: list[HistoryEntry] = field(default_factory=list)
    votes: dict[str, str] = field(default_factory=dict)
    kind: str | None = None
    reasoning: str | None = None

    def __post_init__(self) -> None:
        if self.origin not in (ORIGIN_GENERATED, ORIGIN_MANUAL, ORIGIN_PLAYGROUND):
            raise ValueError(f"unknown case origin {self.origin!r}")

    def tally(self) -> tuple[int, int]:
        ups = sum(1 for d in self.votes.values() if d == UP)
        return ups, len(self.votes) - ups

    def entry_for(self, version: int) -> HistoryEntry | None:
        for entry in self.response_history:
            if entry.version == version:
                return entry
        return None

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "channel": self.channel,
            "user_message": self.user_message,
            "origin": self.origin,
            "created_version": self.created_version,
            "response_history": [entry.to_doc() for entry in self.response_history],
            "votes": dict(self.votes),
            "kind": self.kind,
            "reasoning": self.reasoning,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "SavedCase":
        return cls(
            id=doc["id"],
            channel=doc["channel"],
            user_message=doc["user_message"],
            origin=doc["origin"],
            created_version=doc["created_version"],
            response_history=[HistoryEntry.from_doc(e) for e in doc["response_history"]],
            votes=dict(doc["votes"]),
            kind=doc.get("kind"),
            reasoning=doc.get("reasoning"),
        )


def case_status(case: SavedCase) -> str:
    """good on an up-majority, bad on a down-majority, tbd on a tie (0-0 included)."""
    ups, downs = case.tally()
    if ups > downs:
        return "good"
    if downs > ups:
        return "bad"
    return "tbd"


@dataclass(frozen=True)
class Counters:
    good: int
    bad: int
    tbd: int


@dataclass
class EditVersion:
    """One append-only snapshot of the proposal's complete change-set."""

    version: int
    author: str
    changes: list[TaskChange]
    created_at: float

    def to_doc(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "author": self.author,
            "changes": [change.to_doc() for change in self.changes],
            "created_at": self.created_at,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "EditVersion":
        return cls(
            version=doc["version"],
            author=doc["author"],
            changes=[TaskChange.from_doc(c) for c in doc["changes"]],
            created_at=doc["created_at"],
        )


@dataclass
class Proposal:
    id: str
    server_id: str
    title: str
    description: str
    status: str = OPEN
    edit_versions: list[EditVersion] = field(default_factory=list)
    saved_cases: list[SavedCase] = field(default_factory=list)
    deploy_votes: set[str] = field(default_factory=set)
    deploy_downvotes: set[str] = field(default_factory=set)
    thread_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.title.strip():
            raise ValueError("proposal title must be non-empty")

    @property
    def latest_version(self) -> int:
        return len(self.edit_versions) - 1

    def latest_changes(self) -> list[TaskChange]:
        return self.edit_versions[-1].changes if self.edit_versions else []

    def get_case(self, case_id: str) -> SavedCase | None:
        for case in self.saved_cases:
            if case.id == case_id:
                return case
        return None

    def clone(self) -> "Proposal":
        return copy.deepcopy(self)

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "server_id": self.server_id,
            "title": self.title,
            "description": self.description,
            "status": self.status,
            "edit_versions": [version.to_doc() for version in self.edit_versions],
            "saved_cases": [case.to_doc() for case in self.saved_cases],
            "deploy_votes": sorted(self.deploy_votes),
            "deploy_downvotes": sorted(self.deploy_downvotes),
            "thread_ref": self.thread_ref,
        }

    @classmethod
    def from_doc(cls, doc: dict[str, Any]) -> "Proposal":
        return cls(
            id=doc["id"],
            server_id=doc["server_id"],
            title=doc["title"],
            description=doc["description"],
            status=doc["status"],
            edit_versions=[EditVersion.from_doc(v) for v in doc["edit_versions"]],
            saved_cases=[SavedCase.from_doc(c) for c in doc["saved_cases"]],
            deploy_votes=set(doc["deploy_votes"]),
            deploy_downvotes=set(doc["deploy_downvotes"]),
            thread_ref=doc.get("thread_ref"),
        )


def counters(proposal: Proposal) -> Counters:
    """Component-wise count of case_status over the proposal's saved cases."""
    tallies = {"good": 0, "bad": 0, "tbd": 0}
    for case in proposal.saved_cases:
        tallies[case_status(case)] += 1
    return Counters(good=tallies["good"], bad=tallies["bad"], tbd=tallies["tbd"])


@dataclass(frozen=True)
class SeedCase:
    """A playground exchange attached to a brand-new proposal."""

    channel: str
    user_message: str
    triggered_task: str | None = None
    bot_response: str | None = None


@dataclass
class RegressionRow:
    """One saved case re-run against the draft's hypothetical task set."""

    case_id: str
    channel: str
    user_message: str
    triggered_task: str | None = None
    bot_response: str | None = None
    error: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "channel": self.channel,
            "user_message": self.user_message,
            "triggered_task": self.triggered_task,
            "bot_response": self.bot_response,
            "error": self.error,
        }


@dataclass
class GeneratedCase:
    """A fresh provocation produced for a draft, not yet saved anywhere."""

    case_id: str
    kind: str | None
    channel: str
    user_message: str
    triggered_task: str | None = None
    bot_response: str | None = None
    reasoning: str | None = None
    selection_reason: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "kind": self.kind,
            "channel": self.channel,
            "user_message": self.user_message,
            "triggered_task": self.triggered_task,
            "bot_response": self.bot_response,
            "reasoning": self.reasoning,
            "selection_reason": self.selection_reason,
        }


@dataclass
class TestReport:
    """Everything one Test + Generate run showed; nothing here is persisted."""

    proposal_id: str
    draft_hash: str
    base_version: int
    regressions: list[RegressionRow] = field(default_factory=list)
    generated: list[GeneratedCase] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)

    def regression_for(self, case_id: str) -> RegressionRow | None:
        for row in self.regressions:
            if row.case_id == case_id:
                return row
        return None

    def generated_for(self, case_id: str) -> GeneratedCase | None:
        for row in self.generated:
            if row.case_id == case_id:
                return row
        return None

    def to_doc(self) -> dict[str, Any]:
        return {
            "proposal_id": self.proposal_id,
            "draft_hash": self.draft_hash,
            "base_version": self.base_version,
            "regressions": [row.to_doc() for row in self.regressions],
            "generated": [row.to_doc() for row in self.generated],
            "anomalies": list(self.anomalies),
        }
