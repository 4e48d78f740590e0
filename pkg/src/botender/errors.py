"""Exception hierarchy shared across the package."""

from __future__ import annotations


class BotenderError(Exception):
    """Base class for every error this package raises on purpose."""


class ProviderError(BotenderError):
    """A completion provider failed to produce a response (transport-level)."""


class ScriptedMissError(ProviderError):
    """A strict scripted provider saw a request its script does not cover."""


class EnvelopeError(BotenderError):
    """Provider output could not be turned into a typed envelope."""


class MalformedEnvelopeError(EnvelopeError):
    """No parseable JSON object or array was found in the output."""


class SchemaViolationError(EnvelopeError):
    """JSON was found but required fields are missing or mistyped."""


class GatewayError(BotenderError):
    """Terminal gateway failure after the retry budget was spent."""


class PipelineStageError(BotenderError):
    """One stage of a provocation pipeline failed terminally."""

    def __init__(self, kind: str, stage: str, message: str = "") -> None:
        self.kind = kind
        self.stage = stage
        detail = f"pipeline {kind} failed at {stage}"
        if message:
            detail = f"{detail}: {message}"
        super().__init__(detail)


class EngineError(BotenderError):
    """Every provocation pipeline failed; no candidate pool exists."""


class WorkflowError(BotenderError):
    """Base class for proposal-workflow violations."""


class GateError(WorkflowError):
    """A vote gate or deployment threshold was not met."""

    def __init__(self, gate: str, needed: int, have: int) -> None:
        self.gate = gate
        self.needed = needed
        self.have = have
        super().__init__(f"gate {gate} not met: have {have}, need {needed}")


class StaleReportError(WorkflowError):
    """The submitted test report does not match the submitted draft."""


class IllegalTransitionError(WorkflowError):
    """A proposal status transition outside the allowed state machine."""


class ConflictError(BotenderError):
    """An optimistic-concurrency or deployment conflict; nothing was applied."""


class NotFoundError(BotenderError):
    """A referenced document, proposal, case, or server does not exist."""


class PlatformError(BotenderError):
    """Base class for chat-platform adapter failures."""


class AlreadyInstalledError(PlatformError):
    """Install was called twice for the same server."""


class NotInstalledError(PlatformError):
    """An operation needs an installed server."""
