"""Validation harness: both modes over the nine fixtures, comparison, CLI."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from botender.cli import main as cli_main
from botender.harness.fixtures import FixtureSet, default_fixtures
from botender.harness.runner import compare, run_validation
from botender.provocations.report import validate_report
from tests.conftest import (
    BASELINE,
    DETECT_AMBIGUITY,
    DETECT_CONSEQUENCE,
    DETECT_NARROWNESS,
    EVAL_AMBIGUITY,
    GEN_AMBIGUITY,
    NO_TRIGGER,
    ORCHESTRATOR,
    PASS_EVAL,
    make_gateway,
)

GENERIC_FINDING = {"underspecified_phrase": "a phrase in the prompt",
                   "description": "reads several ways"}
GENERIC_CASES = [
    {"underspecified_phrase": "a phrase in the prompt",
     "interpretation": "the broad reading",
     "reasoning": "stretches the wording",
     "case": {"channel": "#general", "user_message": "does this even count?"}},
    {"underspecified_phrase": "a phrase in the prompt",
     "interpretation": "the narrow reading",
     "reasoning": "stays inside the wording",
     "case": {"channel": "#general", "user_message": "a textbook example message"}},
]
BASELINE_FIVE = [
    {"reasoning": f"standard case {i}",
     "case": {"channel": "#general", "user_message": f"standard message {i}"}}
    for i in range(5)
]

HARNESS_SCRIPT = [
    (DETECT_AMBIGUITY, [GENERIC_FINDING]),
    (DETECT_NARROWNESS, []),
    (DETECT_CONSEQUENCE, []),
    (GEN_AMBIGUITY, GENERIC_CASES),
    (EVAL_AMBIGUITY, PASS_EVAL),
    (BASELINE, BASELINE_FIVE),
    (ORCHESTRATOR, NO_TRIGGER),
]

FORBIDDEN_IN_BASELINE = {"kind", "selection_reason", "evaluation", "label"}


def harness_gateway():
    return make_gateway(HARNESS_SCRIPT)


class TestRunValidation:
    def test_baseline_mode_emits_nine_clean_documents(self, tmp_path):
        summary = run_validation(default_fixtures(), "baseline", harness_gateway(),
                                 tmp_path / "baseline")
        assert summary.ok
        assert len(summary.documents) == 9
        for path in summary.documents.values():
            doc = json.loads(path.read_text(encoding="utf-8"))
            validate_report(doc)
            assert doc["mode"] == "baseline"
            assert len(doc["cases"]) == 5
            for case in doc["cases"]:
                assert not (set(case) & FORBIDDEN_IN_BASELINE)

    def test_botender_mode_documents_carry_kinds(self, tmp_path):
        summary = run_validation(default_fixtures(), "botender", harness_gateway(),
                                 tmp_path / "botender")
        assert summary.ok
        for path in summary.documents.values():
            doc = json.loads(path.read_text(encoding="utf-8"))
            validate_report(doc)
            assert doc["mode"] == "botender"
            assert all(case["kind"] == "ambiguity" for case in doc["cases"])

    def test_summary_csv_and_figure_land_beside_documents(self, tmp_path):
        out = tmp_path / "run"
        run_validation(default_fixtures(), "baseline", harness_gateway(), out)
        assert (out / "summary.csv").exists()
        assert (out / "summary.png").exists()

    def test_parallel_runs_produce_the_same_documents(self, tmp_path):
        sequential = run_validation(default_fixtures(), "baseline", harness_gateway(),
                                    tmp_path / "seq", parallel=1)
        parallel = run_validation(default_fixtures(), "baseline", harness_gateway(),
                                  tmp_path / "par", parallel=4)
        for prompt_id, path in sequential.documents.items():
            assert path.read_bytes() == parallel.documents[prompt_id].read_bytes()

    def test_empty_fixture_set_fails_before_any_provider_call(self):
        with pytest.raises(ValueError):
            FixtureSet.from_doc({"prompts": []})


class TestCompare:
    def test_identical_runs_overlap_fully(self, tmp_path):
        run_validation(default_fixtures(), "baseline", harness_gateway(), tmp_path / "a")
        run_validation(default_fixtures(), "baseline", harness_gateway(), tmp_path / "b")
        summary = compare(tmp_path / "a", tmp_path / "b", tmp_path / "cmp")
        assert len(summary.rows) == 9
        for row in summary.rows:
            assert row.overlap == row.cases_a == row.cases_b
        assert (tmp_path / "cmp" / "comparison.csv").exists()
        assert (tmp_path / "cmp" / "comparison.png").exists()

    def test_disjoint_modes_overlap_zero(self, tmp_path):
        run_validation(default_fixtures(), "botender", harness_gateway(), tmp_path / "a")
        run_validation(default_fixtures(), "baseline", harness_gateway(), tmp_path / "b")
        summary = compare(tmp_path / "a", tmp_path / "b")
        for row in summary.rows:
            assert row.overlap == 0
            assert row.kinds_a == ["ambiguity"] and row.kinds_b == []

    def test_mismatched_prompt_ids_error_lists_missing(self, tmp_path):
        run_validation(default_fixtures(), "baseline", harness_gateway(), tmp_path / "a")
        run_validation(default_fixtures(), "baseline", harness_gateway(), tmp_path / "b")
        (tmp_path / "b" / "p9.json").unlink()
        with pytest.raises(ValueError) as err:
            compare(tmp_path / "a", tmp_path / "b")
        assert "p9" in str(err.value)


@pytest.fixture()
def script_file(tmp_path):
    rows = []
    for match, response in HARNESS_SCRIPT:
        rows.append({"match": list(match) if isinstance(match, tuple) else match,
                     "response": response})
    path = tmp_path / "script.json"
    path.write_text(json.dumps(rows), encoding="utf-8")
    return path


class TestCli:
    def test_run_command_exits_zero_with_nine_documents(self, tmp_path, script_file):
        out = tmp_path / "docs"
        result = CliRunner().invoke(cli_main, [
            "run", "--mode", "baseline", "--provider", f"scripted:{script_file}",
            "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("p*.json"))) == 9

    def test_run_with_prompts_file(self, tmp_path, script_file):
        prompts = tmp_path / "prompts.json"
        prompts.write_text(json.dumps({
            "channels": ["#general"],
            "prompts": [{"id": "x1", "label": "One",
                         "trigger": "When someone says one.", "action": "Reply one."}],
        }), encoding="utf-8")
        out = tmp_path / "docs"
        result = CliRunner().invoke(cli_main, [
            "run", "--prompts", str(prompts), "--mode", "botender",
            "--provider", f"scripted:{script_file}", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        assert (out / "x1.json").exists()

    def test_empty_prompts_file_fails_fast(self, tmp_path, script_file):
        prompts = tmp_path / "prompts.json"
        prompts.write_text(json.dumps({"prompts": []}), encoding="utf-8")
        result = CliRunner().invoke(cli_main, [
            "run", "--prompts", str(prompts), "--mode", "baseline",
            "--provider", f"scripted:{script_file}", "--out", str(tmp_path / "docs"),
        ])
        assert result.exit_code != 0

    def test_compare_command(self, tmp_path, script_file):
        for name in ("a", "b"):
            CliRunner().invoke(cli_main, [
                "run", "--mode", "baseline", "--provider", f"scripted:{script_file}",
                "--out", str(tmp_path / name),
            ])
        result = CliRunner().invoke(cli_main, [
            "compare", str(tmp_path / "a"), str(tmp_path / "b"),
            "--out", str(tmp_path / "cmp"),
        ])
        assert result.exit_code == 0, result.output
        assert "p1:" in result.output
        assert (tmp_path / "cmp" / "comparison.png").exists()

    def test_simulate_command(self, tmp_path):
        script = tmp_path / "sim-script.json"
        script.write_text(json.dumps([
            {"match": "determining whether", "response": {"taskId": "hello-botender"}},
            {"match": "assigned action", "response": {"response": "Hello! 🙂"}},
        ]), encoding="utf-8")
        scenario = tmp_path / "scenario.json"
        scenario.write_text(json.dumps({
            "server": "s1", "channels": ["#general"], "members": ["alice"],
            "events": [{"channel": "#botender", "author": "alice",
                        "content": "hi botender", "at": 1}],
        }), encoding="utf-8")
        out = tmp_path / "transcript.jsonl"
        result = CliRunner().invoke(cli_main, [
            "simulate", "--scenario", str(scenario),
            "--provider", f"scripted:{script}", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        lines = out.read_text(encoding="utf-8").splitlines()
        assert any('"task_label": "Hello Botender"' in line for line in lines)

    def test_default_prompts_dump(self, tmp_path):
        out = tmp_path / "prompts.json"
        result = CliRunner().invoke(cli_main, ["default-prompts", "--out", str(out)])
        assert result.exit_code == 0
        doc = json.loads(out.read_text(encoding="utf-8"))
        assert len(doc["prompts"]) == 9
        assert doc["prompts"][0]["label"] == "Maintain Respectful Tone"
