"""Command-line entry points: scenario replay, the golden suite, the live
gateway, and a one-shot classifier probe.

Session defaults can come from a JSON config file; external model credentials
may also be supplied through BARGEIN_LLM_* environment variables.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import llm
from .classify import ClassifierRequest, make_classifier
from .engine import SessionConfig
from .scenario import check_expectations, load_scenario, run_scenario, run_suite
from .types import BargeInError


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise click.ClickException(f"{path}: config must be a JSON object")
    return data


@click.group()
def main() -> None:
    """Interruption handling engine for conversational agents."""


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False),
              help="Write the session trace as ND-JSON.")
@click.option("--figure", "figure_path", type=click.Path(dir_okay=False),
              help="Render the session timeline to an image file.")
def run(scenario_path: str, trace_path: str | None, figure_path: str | None) -> None:
    """Replay one scenario on the virtual clock and check its expectations."""
    try:
        scenario = load_scenario(scenario_path)
        trace = run_scenario(scenario)
    except BargeInError as exc:
        raise click.ClickException(str(exc)) from exc
    report = check_expectations(trace, scenario)
    click.echo(report.summary())
    if trace_path:
        trace.write_ndjson(trace_path)
        click.echo(f"trace written to {trace_path}")
    if figure_path:
        from .report import render_session_timeline

        render_session_timeline(trace, figure_path, title=scenario.id)
        click.echo(f"figure written to {figure_path}")
    if not report.passed:
        sys.exit(1)


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False),
                default="scenarios")
@click.option("--report-dir", "report_dir", type=click.Path(file_okay=False),
              help="Write report.csv plus timeline figures into this directory.")
def suite(directory: str, report_dir: str | None) -> None:
    """Replay every scenario in a directory; nonzero exit on any failure."""
    try:
        results = run_suite(directory)
    except BargeInError as exc:
        raise click.ClickException(str(exc)) from exc
    failed = 0
    for _, _, report in results:
        click.echo(report.summary())
        if not report.passed:
            failed += 1
    if report_dir:
        from .report import write_suite_report

        for path in write_suite_report(results, report_dir):
            click.echo(f"wrote {path}")
    click.echo(f"{len(results) - failed}/{len(results)} scenarios fully matched")
    if failed:
        sys.exit(1)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8700, show_default=True, type=int)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON file with session config defaults.")
@click.option("--trace-dir", type=click.Path(file_okay=False),
              help="Flush each finished session's trace here as ND-JSON.")
def serve(host: str, port: int, config_path: str | None, trace_dir: str | None) -> None:
    """Start the streaming session gateway (websocket endpoint at /ws)."""
    import uvicorn

    from .gateway import create_app

    config = SessionConfig.from_dict(_load_config(config_path))
    app = create_app(default_config=config, trace_dir=trace_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--text", required=True, help="The overlapping user transcript.")
@click.option("--history", multiple=True,
              help="Prior turn as 'Speaker: text'; repeatable, oldest first.")
@click.option("--remaining", default="", help="The robot's unspoken content.")
@click.option("--spoken", default="", help="The robot's already-spoken content.")
@click.option("--elapsed", default=3.0, show_default=True, type=float,
              help="Seconds since the robot turn started.")
@click.option("--impl", default="rule", show_default=True,
              type=click.Choice(["rule", "external"]))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
def classify(text: str, history: tuple[str, ...], remaining: str, spoken: str,
             elapsed: float, impl: str, config_path: str | None) -> None:
    """Classify one overlap transcript and print the label."""
    config = _load_config(config_path)
    llm_config = llm.llm_config_from_env(config.get("llm", {}))
    try:
        classifier = make_classifier(impl, llm_config)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    request = ClassifierRequest(
        history_rendered="\n".join(history),
        overlap_text=text,
        elapsed_s=elapsed,
        robot_remaining_text=remaining,
        robot_spoken_text=spoken,
    )
    try:
        result = classifier.classify(request)
    except BargeInError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(result.label.value)


if __name__ == "__main__":
    main()
