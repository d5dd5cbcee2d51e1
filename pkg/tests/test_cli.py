import json
from pathlib import Path

from click.testing import CliRunner

from bargein.cli import main

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def test_run_writes_trace_and_figure(tmp_path):
    trace_path = tmp_path / "out.ndjson"
    figure_path = tmp_path / "out.png"
    result = CliRunner().invoke(main, [
        "run", str(SCENARIO_DIR / "golden_03_backchannel_continue.json"),
        "--trace", str(trace_path), "--figure", str(figure_path),
    ])
    assert result.exit_code == 0, result.output
    assert "1/1 expectations met" in result.output or "expectations met" in result.output
    lines = trace_path.read_text().splitlines()
    assert lines and all(json.loads(line) for line in lines)
    assert figure_path.stat().st_size > 0


def test_suite_passes_and_writes_report(tmp_path):
    result = CliRunner().invoke(main, [
        "suite", str(SCENARIO_DIR), "--report-dir", str(tmp_path / "report"),
    ])
    assert result.exit_code == 0, result.output
    assert "10/10 scenarios fully matched" in result.output
    assert (tmp_path / "report" / "report.csv").exists()


def test_suite_fails_on_mismatch(tmp_path):
    bad = {
        "id": "bad",
        "config": {"rate_wpm": 120, "classifier": "oracle"},
        "script": [
            {"kind": "robot_turn", "text": "One two three four five six seven eight."},
            {"kind": "user_event", "at_s": 1.0, "text": "Okay", "oracle_intent": "agreement"},
        ],
        "expectations": [{"step": 1, "decision": "yield_immediately"}],
    }
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    result = CliRunner().invoke(main, ["suite", str(tmp_path)])
    assert result.exit_code == 1
    assert "expected 'yield_immediately'" in result.output


def test_classify_one_shot():
    result = CliRunner().invoke(main, [
        "classify", "--text", "What percent?",
        "--remaining", "studies say about 40 percent of people agree.",
    ])
    assert result.exit_code == 0, result.output
    assert result.output.strip() == "clarification"


def test_classify_external_without_endpoint_errors():
    result = CliRunner().invoke(main, [
        "classify", "--text", "Okay", "--impl", "external",
    ])
    assert result.exit_code != 0
    assert "endpoint" in result.output
