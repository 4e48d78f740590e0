"""Domain types for case-based provocation generation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Mapping

from botender.gateway.envelopes import FINDING_FIELDS


class PipelineKind(Enum):
    AMBIGUITY = "ambiguity"
    NARROWNESS = "narrowness"
    CONSEQUENCE = "consequence"


KIND_ORDER: tuple[PipelineKind, ...] = (
    PipelineKind.AMBIGUITY,
    PipelineKind.NARROWNESS,
    PipelineKind.CONSEQUENCE,
)


@dataclass(frozen=True)
class Finding:
    """One detector hit: the phrase in the prompt that the pipeline will probe.

    ``fields`` carries exactly the field set for its kind, all non-empty.
    The phrase-quotes-the-prompt check is advisory (models paraphrase), so
    membership in the prompt text is not enforced here.
    """

    kind: PipelineKind
    fields: Mapping[str, str]

    def __post_init__(self) -> None:
        required = set(FINDING_FIELDS[self.kind.value])
        present = set(self.fields)
        if present != required:
            raise ValueError(
                f"{self.kind.value} finding must carry exactly {sorted(required)}, "
                f"got {sorted(present)}"
            )
        for name, value in self.fields.items():
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"finding field {name!r} must be a non-empty string")


@dataclass(frozen=True)
class Evaluation:
    label: bool
    explanation: str


@dataclass(frozen=True)
class PromptUnderTest:
    """The (trigger, action) pair being probed; execution context travels separately."""

    trigger: str
    action: str

    def __post_init__(self) -> None:
        if not self.trigger.strip() or not self.action.strip():
            raise ValueError("prompt under test needs non-empty trigger and action")


@dataclass(frozen=True)
class CaseCandidate:
    """A pipeline-produced provocation at any stage of its life.

    Baseline generation produces kind-less candidates that never carry an
    evaluation or selection reason. Kind-specific fields are enforced both
    ways: interpretation exactly for ambiguity, uncovered_scenario exactly
    for narrowness.
    """

    channel: str
    user_message: str
    kind: PipelineKind | None = None
    finding: Finding | None = None
    interpretation: str | None = None
    uncovered_scenario: str | None = None
    reasoning: str | None = None
    executed: bool = False
    triggered_task: str | None = None
    bot_response: str | None = None
    evaluation: Evaluation | None = None
    selection_reason: str | None = None

    def __post_init__(self) -> None:
        if not self.channel.startswith("#"):
            raise ValueError("candidate channel must start with '#'")
        if not self.user_message.strip():
            raise ValueError("candidate user message must be non-empty")
        if (self.interpretation is not None) != (self.kind is PipelineKind.AMBIGUITY):
            raise ValueError("interpretation is carried exactly by ambiguity candidates")
        if (self.uncovered_scenario is not None) != (self.kind is PipelineKind.NARROWNESS):
            raise ValueError("uncovered_scenario is carried exactly by narrowness candidates")
        if self.finding is not None and self.finding.kind is not self.kind:
            raise ValueError("candidate finding kind must match candidate kind")
        if self.kind is None and (self.evaluation is not None or self.selection_reason is not None):
            raise ValueError("baseline candidates carry no evaluation or selection reason")

    def dedupe_key(self) -> tuple[str, str]:
        return (self.channel, self.user_message)

    def with_execution(self, triggered_task: str | None, bot_response: str | None) -> "CaseCandidate":
        return replace(self, executed=True, triggered_task=triggered_task,
                       bot_response=bot_response)

    def with_evaluation(self, evaluation: Evaluation) -> "CaseCandidate":
        return replace(self, evaluation=evaluation)

    def with_selection_reason(self, reason: str) -> "CaseCandidate":
        return replace(self, selection_reason=reason)

    def candidate_fields(self) -> dict[str, Any]:
        """Kind-specific generator fields, as the evaluator prompt needs them."""
        out: dict[str, Any] = {"reasoning": self.reasoning}
        if self.kind is PipelineKind.AMBIGUITY:
            out["interpretation"] = self.interpretation
        elif self.kind is PipelineKind.NARROWNESS:
            out["uncovered_scenario"] = self.uncovered_scenario
        return out


@dataclass
class PipelineOutcome:
    """What an engine run produced, plus everything odd it noticed on the way."""

    candidates: list[CaseCandidate] = field(default_factory=list)
    anomalies: list[str] = field(default_factory=list)
