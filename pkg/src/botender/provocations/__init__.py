"""Case-based provocation engine: three pipelines, execution, selection."""

from botender.provocations.models import (
    KIND_ORDER,
    CaseCandidate,
    Evaluation,
    Finding,
    PipelineKind,
    PipelineOutcome,
    PromptUnderTest,
)
from botender.provocations.pipeline import (
    BASELINE_CASE_COUNT,
    DEFAULT_PARALLELISM,
    DEFAULT_SELECTION_SIZE,
    detect,
    evaluate,
    execute_candidate,
    generate,
    generate_baseline_cases,
    run_pipelines,
    select_cases,
)
from botender.provocations.report import (
    ENGINE_REPORT_SCHEMA,
    build_report,
    case_to_doc,
    report_bytes,
    validate_report,
)

__all__ = [
    "BASELINE_CASE_COUNT",
    "CaseCandidate",
    "DEFAULT_PARALLELISM",
    "DEFAULT_SELECTION_SIZE",
    "ENGINE_REPORT_SCHEMA",
    "Evaluation",
    "Finding",
    "KIND_ORDER",
    "PipelineKind",
    "PipelineOutcome",
    "PromptUnderTest",
    "build_report",
    "case_to_doc",
    "detect",
    "evaluate",
    "execute_candidate",
    "generate",
    "generate_baseline_cases",
    "report_bytes",
    "run_pipelines",
    "select_cases",
    "validate_report",
]
