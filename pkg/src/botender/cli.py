"""Command-line interface: validation runs, comparisons, simulation, serving."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from botender.gateway.config import ProviderConfig
from botender.gateway.provider import Gateway
from botender.harness.fixtures import FixtureSet, default_fixtures
from botender.harness.runner import compare as compare_reports
from botender.harness.runner import run_validation


@click.group()
def main() -> None:
    """Botender: collaboratively governed community bot tooling."""


@main.command()
@click.option("--prompts", "prompts_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Fixture prompt file (defaults to the shipped nine).")
@click.option("--mode", type=click.Choice(["botender", "baseline"]), required=True)
@click.option("--provider", "provider_spec", required=True,
              help="scripted:<script-file> or live")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@click.option("--parallel", type=int, default=1, show_default=True,
              help="Run up to N prompts concurrently.")
def run(prompts_path: str | None, mode: str, provider_spec: str, out_dir: str,
        parallel: int) -> None:
    """Generate case reports for every fixture prompt in one mode.

    Exits 0 only if every prompt produced a document.
    """
    fixtures = FixtureSet.from_file(prompts_path) if prompts_path else default_fixtures()
    provider_config = ProviderConfig.from_cli_spec(provider_spec)
    gateway = Gateway(provider_config.build(), max_retries=provider_config.max_retries)
    summary = run_validation(fixtures, mode, gateway, out_dir, parallel=parallel)
    for prompt_id, path in sorted(summary.documents.items()):
        click.echo(f"{prompt_id}: {path}")
    for prompt_id, error in sorted(summary.failures.items()):
        click.echo(f"{prompt_id}: FAILED ({error})", err=True)
    if not summary.ok:
        sys.exit(1)


@main.command()
@click.argument("report_a", type=click.Path(exists=True))
@click.argument("report_b", type=click.Path(exists=True))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Write comparison.csv and comparison.png here.")
def compare(report_a: str, report_b: str, out_dir: str | None) -> None:
    """Summarize two report runs side by side (counts, kinds, overlap)."""
    try:
        summary = compare_reports(report_a, report_b, out_dir)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    for row in summary.rows:
        click.echo(
            f"{row.prompt_id}: A={row.cases_a} ({','.join(row.kinds_a) or '-'}) "
            f"B={row.cases_b} ({','.join(row.kinds_b) or '-'}) overlap={row.overlap}"
        )


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Scenario file: {server, channels, members, events}.")
@click.option("--provider", "provider_spec", required=True,
              help="scripted:<script-file> or live")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the transcript (JSON lines) here instead of stdout.")
def simulate(scenario_path: str, provider_spec: str, out_path: str | None) -> None:
    """Replay a scenario on the simulated server and export its transcript."""
    from botender.platform.scenario import Scenario, run_scenario
    from botender.platform.simulator import SimulatedPlatform

    provider_config = ProviderConfig.from_cli_spec(provider_spec)
    gateway = Gateway(provider_config.build(), max_retries=provider_config.max_retries)
    platform = SimulatedPlatform(gateway)
    scenario = Scenario.from_file(scenario_path)
    run_scenario(platform, scenario)
    transcript = platform.transcript_jsonl(scenario.server)
    if out_path:
        Path(out_path).write_text(transcript, encoding="utf-8")
        click.echo(f"transcript written to {out_path}")
    else:
        click.echo(transcript, nl=False)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="Service config file (JSON).")
def serve(config_path: str) -> None:
    """Run the HTTP service for the web client."""
    import uvicorn

    from botender.service.app import AppRuntime, create_app
    from botender.service.config import ServiceConfig

    config = ServiceConfig.from_file(config_path)
    runtime = AppRuntime.build(config)
    click.echo(f"serving on http://{config.bind_host}:{config.bind_port}")
    uvicorn.run(create_app(runtime), host=config.bind_host, port=config.bind_port,
                log_level="info")


@main.command("default-prompts")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
def default_prompts(out_path: str | None) -> None:
    """Dump the shipped fixture prompts as a prompts file."""
    fixtures = default_fixtures()
    doc = {
        "channels": list(fixtures.channels),
        "prompts": [
            {"id": p.id, "label": p.label, "trigger": p.trigger,
             "action": p.action, "pitfall": p.pitfall}
            for p in fixtures.prompts
        ],
    }
    text = json.dumps(doc, ensure_ascii=False, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
        click.echo(f"prompts written to {out_path}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
