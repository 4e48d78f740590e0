"""Shared test helpers: scripted gateways and stage-specific prompt markers."""

from __future__ import annotations

from typing import Any, Sequence

import pytest

from botender.gateway.provider import Gateway, ScriptedProvider

# Distinctive substrings of each stage's system prompt, for script matching.
ORCHESTRATOR = "determining whether a task should be triggered"
TASK_AGENT = "following the instructions provided in an assigned action"
DETECT_AMBIGUITY = "identifying critical ambiguities"
DETECT_NARROWNESS = "identifying critical overspecified phrases"
DETECT_CONSEQUENCE = "identifying potential unintended consequences"
GEN_AMBIGUITY = "explore how ambiguous phrases"
GEN_NARROWNESS = "might cause the bot to miss relevant situations"
GEN_CONSEQUENCE = "unintentionally cause harm to the online community"
EVAL_AMBIGUITY = "plausible and critical alternative interpretation"
EVAL_NARROWNESS = "effectively demonstrates an uncovered scenario"
EVAL_CONSEQUENCE = "unintended negative consequences for the online community"
SELECTOR = "selecting a small set of test cases"
BASELINE = "tasked with generating test cases for prompts written"

PASS_EVAL = {"label": True, "label_explanation": "clearly demonstrates the issue"}
NO_TRIGGER = {"taskId": "0"}


def make_gateway(entries: Sequence[tuple[Any, Any]], strict: bool = True,
                 default: str = "") -> Gateway:
    """Build a gateway over a scripted provider.

    Each entry is (match, response): match is a substring or a list that must
    all appear; a non-string response is serialized to JSON once.
    """
    rows = []
    for match, response in entries:
        if isinstance(match, (list, tuple)):
            match = list(match)
        rows.append({"match": match, "response": response})
    return Gateway(ScriptedProvider.from_data(rows, strict=strict, default=default))


_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _ACCEPTANCE_RESULTS[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:  # noqa: ARG001
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict} {name}")
