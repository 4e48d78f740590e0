"""Strict envelope schemas and a total parser for model output.

Real models wrap JSON in fences or prose despite being told not to, so the
parser scans for the first balanced JSON value instead of trusting the raw
text. It never raises anything except the typed envelope errors.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from botender.errors import MalformedEnvelopeError, SchemaViolationError


class EnvelopeKind(Enum):
    TASK_ID = "task_id"
    TASK_RESPONSE = "task_response"
    FINDING_LIST = "finding_list"
    CANDIDATE_LIST = "candidate_list"
    EVALUATION = "evaluation"
    SELECTION = "selection"


# Per-variant required fields for finding lists and for the variant-specific
# extras carried by candidate lists (every candidate item also needs
# "reasoning" and "case").
FINDING_FIELDS: dict[str, tuple[str, ...]] = {
    "ambiguity": ("underspecified_phrase", "description"),
    "narrowness": ("broader_goal", "overspecified_phrase", "uncovered_scenarios"),
    "consequence": ("problematic_phrase", "consequence"),
}

CANDIDATE_EXTRA_FIELDS: dict[str | None, tuple[str, ...]] = {
    "ambiguity": ("underspecified_phrase", "interpretation"),
    "narrowness": ("uncovered_scenario",),
    "consequence": (),
    None: (),  # baseline generation: just reasoning + case
}


@dataclass(frozen=True)
class EnvelopeSchema:
    """Tag describing which envelope shape a request expects."""

    kind: EnvelopeKind
    variant: str | None = None

    def __post_init__(self) -> None:
        if self.kind is EnvelopeKind.FINDING_LIST and self.variant not in FINDING_FIELDS:
            raise ValueError(f"finding_list needs a pipeline variant, got {self.variant!r}")
        if self.kind is EnvelopeKind.CANDIDATE_LIST and self.variant not in CANDIDATE_EXTRA_FIELDS:
            raise ValueError(f"unknown candidate_list variant: {self.variant!r}")


@dataclass(frozen=True)
class TaskIdEnvelope:
    task_id: str


@dataclass(frozen=True)
class TaskResponseEnvelope:
    response: str


@dataclass(frozen=True)
class FindingListEnvelope:
    findings: tuple[dict[str, str], ...]


@dataclass(frozen=True)
class CandidateListEnvelope:
    items: tuple[dict[str, Any], ...]


@dataclass(frozen=True)
class EvaluationEnvelope:
    label: bool
    explanation: str


@dataclass(frozen=True)
class SelectionPick:
    case_id: int
    reason: str


@dataclass(frozen=True)
class SelectionEnvelope:
    picks: tuple[SelectionPick, ...]


Envelope = (
    TaskIdEnvelope
    | TaskResponseEnvelope
    | FindingListEnvelope
    | CandidateListEnvelope
    | EvaluationEnvelope
    | SelectionEnvelope
)

_LIST_KINDS = {EnvelopeKind.FINDING_LIST, EnvelopeKind.CANDIDATE_LIST, EnvelopeKind.SELECTION}

_CASE_STRING_RE = re.compile(r"\s*(#\S+)\s*[:,-]\s*(.+)", re.S)


def _locate_json(raw: str, allow_array: bool) -> Any:
    """Return the first balanced JSON value in ``raw``.

    Only objects are accepted for scalar envelopes; list envelopes also
    accept a bare array.
    """
    decoder = json.JSONDecoder()
    opens = "{[" if allow_array else "{"
    for idx, ch in enumerate(raw):
        if ch not in opens:
            continue
        try:
            value, _ = decoder.raw_decode(raw, idx)
        except ValueError:
            continue
        return value
    raise MalformedEnvelopeError("no JSON object found in provider output")


def _require_str(obj: Mapping[str, Any], field: str, where: str) -> str:
    if field not in obj:
        raise SchemaViolationError(f"{where}: missing required field {field!r}")
    value = obj[field]
    if not isinstance(value, str) or not value.strip():
        raise SchemaViolationError(f"{where}: field {field!r} must be a non-empty string")
    return value


def _as_item_list(value: Any, required: tuple[str, ...], where: str) -> list[Any]:
    """Normalize the model's list shapes.

    Accepts a bare array, an object keyed "0", "1", ... (the documented
    output format says items get unique keys starting from 0), an object
    wrapping a single array, or a lone item object carrying the required
    fields itself.
    """
    if isinstance(value, list):
        return value
    if isinstance(value, dict):
        keys = list(value.keys())
        if keys and all(isinstance(k, str) and k.isdigit() for k in keys):
            return [value[k] for k in sorted(keys, key=int)]
        if len(keys) == 1 and isinstance(value[keys[0]], list):
            return value[keys[0]]
        if required and all(field in value for field in required):
            return [value]
        if not keys:
            return []
    raise SchemaViolationError(f"{where}: expected an array of items")


def _normalize_case(value: Any, where: str) -> dict[str, str]:
    """Reduce a generated test-case payload to its channel and user message."""
    if isinstance(value, dict):
        channel = value.get("channel")
        message = value.get("user_message") or value.get("message") or value.get("userMessage")
        if not isinstance(channel, str) or not channel.strip():
            raise SchemaViolationError(f"{where}: case is missing a channel")
        if not isinstance(message, str) or not message.strip():
            raise SchemaViolationError(f"{where}: case is missing a user message")
        return {"channel": channel.strip(), "user_message": message}
    if isinstance(value, str):
        match = _CASE_STRING_RE.match(value)
        if match:
            return {"channel": match.group(1), "user_message": match.group(2).strip()}
        raise SchemaViolationError(f"{where}: case string lacks a '#channel: message' shape")
    raise SchemaViolationError(f"{where}: case must be an object or string")


def parse_envelope(raw: str, schema: EnvelopeSchema) -> Envelope:
    """Parse raw provider text into a typed envelope.

    Raises MalformedEnvelopeError when no JSON can be located and
    SchemaViolationError when the located JSON does not satisfy the schema.
    Both signal "re-ask" to the gateway.
    """
    if not isinstance(raw, str) or not raw.strip():
        raise MalformedEnvelopeError("empty provider output")

    value = _locate_json(raw, allow_array=schema.kind in _LIST_KINDS)
    kind = schema.kind

    if kind is EnvelopeKind.TASK_ID:
        if not isinstance(value, dict):
            raise SchemaViolationError("task id envelope must be a JSON object")
        return TaskIdEnvelope(task_id=_require_str(value, "taskId", "task id envelope"))

    if kind is EnvelopeKind.TASK_RESPONSE:
        if not isinstance(value, dict):
            raise SchemaViolationError("task response envelope must be a JSON object")
        return TaskResponseEnvelope(
            response=_require_str(value, "response", "task response envelope")
        )

    if kind is EnvelopeKind.EVALUATION:
        if not isinstance(value, dict):
            raise SchemaViolationError("evaluation envelope must be a JSON object")
        if "label" not in value:
            raise SchemaViolationError("evaluation envelope: missing required field 'label'")
        label = value["label"]
        if not isinstance(label, bool):
            raise SchemaViolationError("evaluation envelope: 'label' must be a boolean")
        explanation = _require_str(value, "label_explanation", "evaluation envelope")
        return EvaluationEnvelope(label=label, explanation=explanation)

    if kind is EnvelopeKind.FINDING_LIST:
        required = FINDING_FIELDS[schema.variant or ""]
        items = _as_item_list(value, required, "finding list")
        findings = []
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                raise SchemaViolationError(f"finding {i}: must be a JSON object")
            findings.append({field: _require_str(item, field, f"finding {i}") for field in required})
        return FindingListEnvelope(findings=tuple(findings))

    if kind is EnvelopeKind.CANDIDATE_LIST:
        extras = CANDIDATE_EXTRA_FIELDS[schema.variant]
        required = extras + ("reasoning", "case")
        items = _as_item_list(value, required, "candidate list")
        normalized = []
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                raise SchemaViolationError(f"candidate {i}: must be a JSON object")
            out: dict[str, Any] = {
                field: _require_str(item, field, f"candidate {i}") for field in extras
            }
            out["reasoning"] = _require_str(item, "reasoning", f"candidate {i}")
            if "case" not in item:
                raise SchemaViolationError(f"candidate {i}: missing required field 'case'")
            out["case"] = _normalize_case(item["case"], f"candidate {i}")
            normalized.append(out)
        return CandidateListEnvelope(items=tuple(normalized))

    if kind is EnvelopeKind.SELECTION:
        items = _as_item_list(value, ("caseId", "selection_reason"), "selection")
        picks = []
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                raise SchemaViolationError(f"selection {i}: must be a JSON object")
            if "caseId" not in item:
                raise SchemaViolationError(f"selection {i}: missing required field 'caseId'")
            case_id = item["caseId"]
            if isinstance(case_id, bool) or not isinstance(case_id, (int, str)):
                raise SchemaViolationError(f"selection {i}: 'caseId' must be an integer or digit string")
            if isinstance(case_id, str):
                if not case_id.strip().isdigit():
                    raise SchemaViolationError(f"selection {i}: 'caseId' must be an integer or digit string")
                case_id = int(case_id.strip())
            reason = _require_str(item, "selection_reason", f"selection {i}")
            picks.append(SelectionPick(case_id=case_id, reason=reason))
        return SelectionEnvelope(picks=tuple(picks))

    raise SchemaViolationError(f"unknown envelope kind: {kind!r}")
