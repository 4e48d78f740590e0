"""Proposal governance: versioned edits, case votes, gates, deployment."""

from botender.workflow.models import (
    CLOSED,
    DEPLOYED,
    DOWN,
    OPEN,
    ORIGIN_GENERATED,
    ORIGIN_MANUAL,
    ORIGIN_PLAYGROUND,
    UP,
    Counters,
    EditVersion,
    GeneratedCase,
    HistoryEntry,
    Proposal,
    RegressionRow,
    SavedCase,
    SeedCase,
    TaskChange,
    TestReport,
    WorkflowConfig,
    apply_changes,
    case_status,
    counters,
    draft_hash,
)
from botender.workflow.service import PlatformPort, ProposalWorkflow

__all__ = [
    "CLOSED",
    "Counters",
    "DEPLOYED",
    "DOWN",
    "EditVersion",
    "GeneratedCase",
    "HistoryEntry",
    "OPEN",
    "ORIGIN_GENERATED",
    "ORIGIN_MANUAL",
    "ORIGIN_PLAYGROUND",
    "PlatformPort",
    "Proposal",
    "ProposalWorkflow",
    "RegressionRow",
    "SavedCase",
    "SeedCase",
    "TaskChange",
    "TestReport",
    "UP",
    "WorkflowConfig",
    "apply_changes",
    "case_status",
    "counters",
    "draft_hash",
]
