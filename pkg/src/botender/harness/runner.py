"""Run the engine vs. the baseline over fixture prompts; compare the outputs.

Each prompt runs against a singleton task set containing only that prompt's
task, mirroring how prompts were probed in isolation. Reports land one JSON
document per prompt, with a delimited summary and a figure alongside.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from botender.agents.models import PromptAssets, Task, TaskSet
from botender.errors import EngineError
from botender.gateway.provider import Gateway
from botender.provocations.models import PromptUnderTest
from botender.provocations.pipeline import (
    generate_baseline_cases,
    run_pipelines,
    select_cases,
)
from botender.provocations.report import build_report, report_bytes, validate_report
from botender.harness.fixtures import FixturePrompt, FixtureSet

logger = logging.getLogger(__name__)

MODE_BOTENDER = "botender"
MODE_BASELINE = "baseline"


@dataclass
class RunSummary:
    mode: str
    out_dir: Path
    documents: dict[str, Path] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def run_prompt(fixture: FixturePrompt, mode: str, gateway: Gateway,
               assets: PromptAssets, selection_size: int = 5) -> dict[str, Any]:
    """Produce one engine report document for one fixture prompt."""
    task_set = TaskSet(
        server_id="validation",
        tasks=(Task(id=fixture.id, name=fixture.label,
                    trigger=fixture.trigger, action=fixture.action),),
        version=0,
    )
    prompt = PromptUnderTest(trigger=fixture.trigger, action=fixture.action)
    if mode == MODE_BOTENDER:
        outcome = run_pipelines(prompt, task_set, assets, gateway)
        cases = select_cases(outcome.candidates, prompt, assets, gateway,
                             n=selection_size, anomalies=outcome.anomalies)
    elif mode == MODE_BASELINE:
        outcome = generate_baseline_cases(prompt, task_set, assets, gateway)
        cases = outcome.candidates
    else:
        raise ValueError(f"mode must be '{MODE_BOTENDER}' or '{MODE_BASELINE}', got {mode!r}")
    report = build_report(prompt, mode, cases, outcome.anomalies)
    validate_report(report)
    return report


def run_validation(fixtures: FixtureSet, mode: str, gateway: Gateway, out_dir: str | Path,
                   parallel: int = 1, selection_size: int = 5) -> RunSummary:
    """Run every fixture prompt in one mode, writing one document per prompt.

    Per-prompt failures are recorded (and the run continues); the summary
    says whether every prompt produced a document.
    """
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    assets = PromptAssets.for_channels(fixtures.channels)
    summary = RunSummary(mode=mode, out_dir=out_path)

    def one(fixture: FixturePrompt) -> tuple[str, dict[str, Any] | None, str | None]:
        try:
            return fixture.id, run_prompt(fixture, mode, gateway, assets, selection_size), None
        except (EngineError, Exception) as exc:  # noqa: BLE001 - per-prompt isolation
            logger.exception("prompt %s failed", fixture.id)
            return fixture.id, None, str(exc)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(one, fixtures.prompts))
    else:
        results = [one(fixture) for fixture in fixtures.prompts]

    for prompt_id, report, error in results:
        if report is None:
            summary.failures[prompt_id] = error or "unknown failure"
            continue
        doc_path = out_path / f"{prompt_id}.json"
        doc_path.write_bytes(report_bytes(report))
        summary.documents[prompt_id] = doc_path

    _write_run_summary(summary, fixtures)
    return summary


def _write_run_summary(summary: RunSummary, fixtures: FixtureSet) -> None:
    rows = []
    for fixture in fixtures.prompts:
        doc_path = summary.documents.get(fixture.id)
        if doc_path is None:
            rows.append({"prompt_id": fixture.id, "label": fixture.label,
                         "cases": 0, "kinds": "", "error": summary.failures.get(fixture.id, "")})
            continue
        doc = json.loads(doc_path.read_text(encoding="utf-8"))
        kinds = sorted({case["kind"] for case in doc["cases"] if "kind" in case})
        rows.append({"prompt_id": fixture.id, "label": fixture.label,
                     "cases": len(doc["cases"]), "kinds": "|".join(kinds), "error": ""})
    with open(summary.out_dir / "summary.csv", "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=["prompt_id", "label", "cases", "kinds", "error"])
        writer.writeheader()
        writer.writerows(rows)

    from botender.harness.figures import render_run_figure

    render_run_figure(rows, summary.mode, summary.out_dir / "summary.png")


@dataclass
class PromptComparison:
    prompt_id: str
    cases_a: int
    cases_b: int
    kinds_a: list[str]
    kinds_b: list[str]
    overlap: int


@dataclass
class CompareSummary:
    rows: list[PromptComparison] = field(default_factory=list)


def _load_reports(path: str | Path) -> dict[str, dict[str, Any]]:
    """Load every per-prompt document from a run directory (or a single file)."""
    source = Path(path)
    docs: dict[str, dict[str, Any]] = {}
    if source.is_dir():
        for doc_path in sorted(source.glob("*.json")):
            docs[doc_path.stem] = json.loads(doc_path.read_text(encoding="utf-8"))
    else:
        docs[source.stem] = json.loads(source.read_text(encoding="utf-8"))
    return docs


def compare(path_a: str | Path, path_b: str | Path,
            out_dir: str | Path | None = None) -> CompareSummary:
    """Side-by-side summary of two runs covering the same prompt ids."""
    docs_a = _load_reports(path_a)
    docs_b = _load_reports(path_b)
    missing_in_b = sorted(set(docs_a) - set(docs_b))
    missing_in_a = sorted(set(docs_b) - set(docs_a))
    if missing_in_a or missing_in_b:
        raise ValueError(
            "reports cover different prompt ids; "
            f"missing in first: {missing_in_a}, missing in second: {missing_in_b}")

    summary = CompareSummary()
    for prompt_id in sorted(docs_a):
        cases_a = docs_a[prompt_id]["cases"]
        cases_b = docs_b[prompt_id]["cases"]
        pairs_a = {(c["channel"], c["user_message"]) for c in cases_a}
        pairs_b = {(c["channel"], c["user_message"]) for c in cases_b}
        summary.rows.append(PromptComparison(
            prompt_id=prompt_id,
            cases_a=len(cases_a),
            cases_b=len(cases_b),
            kinds_a=sorted({c["kind"] for c in cases_a if "kind" in c}),
            kinds_b=sorted({c["kind"] for c in cases_b if "kind" in c}),
            overlap=len(pairs_a & pairs_b),
        ))

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        with open(out_path / "comparison.csv", "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle)
            writer.writerow(["prompt_id", "cases_a", "cases_b", "kinds_a", "kinds_b", "overlap"])
            for row in summary.rows:
                writer.writerow([row.prompt_id, row.cases_a, row.cases_b,
                                 "|".join(row.kinds_a), "|".join(row.kinds_b), row.overlap])

        from botender.harness.figures import render_compare_figure

        render_compare_figure(summary, out_path / "comparison.png")
    return summary
