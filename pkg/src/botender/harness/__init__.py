"""Validation harness: engine vs. baseline over fixture prompts."""

from botender.harness.fixtures import (
    DEFAULT_FIXTURE_CHANNELS,
    FixturePrompt,
    FixtureSet,
    default_fixtures,
)
from botender.harness.runner import (
    MODE_BASELINE,
    MODE_BOTENDER,
    CompareSummary,
    PromptComparison,
    RunSummary,
    compare,
    run_prompt,
    run_validation,
)

__all__ = [
    "CompareSummary",
    "DEFAULT_FIXTURE_CHANNELS",
    "FixturePrompt",
    "FixtureSet",
    "MODE_BASELINE",
    "MODE_BOTENDER",
    "PromptComparison",
    "RunSummary",
    "compare",
    "default_fixtures",
    "run_prompt",
    "run_validation",
]
