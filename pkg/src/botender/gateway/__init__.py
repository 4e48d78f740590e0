"""Provider-neutral completion gateway with strict envelope parsing."""

from botender.gateway.config import ProviderConfig
from botender.gateway.envelopes import (
    CandidateListEnvelope,
    Envelope,
    EnvelopeKind,
    EnvelopeSchema,
    EvaluationEnvelope,
    FindingListEnvelope,
    SelectionEnvelope,
    SelectionPick,
    TaskIdEnvelope,
    TaskResponseEnvelope,
    parse_envelope,
)
from botender.gateway.provider import (
    ChatRequest,
    CompletionProvider,
    Gateway,
    HttpChatProvider,
    ScriptEntry,
    ScriptedProvider,
)

__all__ = [
    "CandidateListEnvelope",
    "ChatRequest",
    "CompletionProvider",
    "Envelope",
    "EnvelopeKind",
    "EnvelopeSchema",
    "EvaluationEnvelope",
    "FindingListEnvelope",
    "Gateway",
    "HttpChatProvider",
    "ProviderConfig",
    "ScriptEntry",
    "ScriptedProvider",
    "SelectionEnvelope",
    "SelectionPick",
    "TaskIdEnvelope",
    "TaskResponseEnvelope",
    "parse_envelope",
]
