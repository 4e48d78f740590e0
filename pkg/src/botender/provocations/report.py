"""The engine report format consumed by the workflow, the CLI, and the UI."""

from __future__ import annotations

import json
from typing import Any, Sequence

import jsonschema

from botender.provocations.models import CaseCandidate, PromptUnderTest

ENGINE_REPORT_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["prompt", "mode", "cases", "anomalies"],
    "additionalProperties": False,
    "properties": {
        "prompt": {
            "type": "object",
            "required": ["trigger", "action"],
            "additionalProperties": False,
            "properties": {
                "trigger": {"type": "string", "minLength": 1},
                "action": {"type": "string", "minLength": 1},
            },
        },
        "mode": {"enum": ["botender", "baseline"]},
        "cases": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["channel", "user_message"],
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["ambiguity", "narrowness", "consequence"]},
                    "channel": {"type": "string", "pattern": "^#"},
                    "user_message": {"type": "string", "minLength": 1},
                    "triggered_task": {"type": "string"},
                    "bot_response": {"type": "string"},
                    "reasoning": {"type": "string"},
                    "selection_reason": {"type": "string"},
                },
            },
        },
        "anomalies": {"type": "array", "items": {"type": "string"}},
    },
}


def case_to_doc(candidate: CaseCandidate) -> dict[str, Any]:
    """One case document; optional keys appear only when they have values."""
    doc: dict[str, Any] = {}
    if candidate.kind is not None:
        doc["kind"] = candidate.kind.value
    doc["channel"] = candidate.channel
    doc["user_message"] = candidate.user_message
    if candidate.triggered_task is not None:
        doc["triggered_task"] = candidate.triggered_task
    if candidate.bot_response is not None:
        doc["bot_response"] = candidate.bot_response
    if candidate.reasoning is not None:
        doc["reasoning"] = candidate.reasoning
    if candidate.selection_reason is not None:
        doc["selection_reason"] = candidate.selection_reason
    return doc


def build_report(prompt: PromptUnderTest, mode: str, cases: Sequence[CaseCandidate],
                 anomalies: Sequence[str]) -> dict[str, Any]:
    if mode not in ("botender", "baseline"):
        raise ValueError(f"report mode must be 'botender' or 'baseline', got {mode!r}")
    return {
        "prompt": {"trigger": prompt.trigger, "action": prompt.action},
        "mode": mode,
        "cases": [case_to_doc(candidate) for candidate in cases],
        "anomalies": list(anomalies),
    }


def validate_report(doc: dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError when the document is out of shape."""
    jsonschema.validate(doc, ENGINE_REPORT_SCHEMA)


def report_bytes(doc: dict[str, Any]) -> bytes:
    """Canonical serialization; key order is construction order, so runs
    over the same inputs are byte-identical."""
    return (json.dumps(doc, ensure_ascii=False, indent=2) + "\n").encode("utf-8")
