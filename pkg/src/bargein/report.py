"""Suite reporting: delimited results plus rendered session timelines.

The suite's report path writes one CSV row per golden expectation and one PNG
timeline per scenario, with an aggregate decision chart for the whole run.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .scenario import Report, Scenario
from .trace import SessionTrace

_DECISION_COLORS = {
    "continue": "#4c9f70",
    "ack_and_continue": "#3a7ca5",
    "clarify_and_continue": "#8e6fb8",
    "ack_and_wrap_up": "#d98e04",
    "yield_immediately": "#c44536",
    "finish_up": "#777777",
}
_PHASE_COLORS = {"main": "#3a7ca5", "clarify": "#8e6fb8", "wrapup": "#d98e04"}


def write_suite_csv(results: list[tuple[Scenario, SessionTrace, Report]], path: str | Path) -> None:
    """One row per checked expectation: scenario, step, check, expected,
    actual, status."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scenario", "step", "check", "expected", "actual", "status"])
        for scenario, _, report in results:
            for r in report.results:
                writer.writerow([
                    scenario.id, r.step, r.check, r.expected, r.actual,
                    "pass" if r.passed else "FAIL",
                ])


def render_session_timeline(trace: SessionTrace, path: str | Path, title: str = "") -> None:
    """Draw robot speech spans, word ticks, user events, and decision labels
    on one time axis."""
    utterances: dict[int, dict] = {}
    for entry in trace:
        if entry.kind == "robot_plan":
            utterances[entry.payload["utt"]] = {
                "start": entry.t, "end": entry.t,
                "phase": entry.payload["phase"], "words": [],
            }
        elif entry.kind == "robot_word":
            utt = utterances.get(entry.payload["utt"])
            if utt is not None:
                utt["words"].append(entry.t)
                utt["end"] = max(utt["end"], entry.t)
        elif entry.kind in ("utterance_complete", "utterance_cut"):
            utt = utterances.get(entry.payload["utt"])
            if utt is not None:
                utt["end"] = entry.t

    fig, ax = plt.subplots(figsize=(10, 3.2))
    for utt in utterances.values():
        color = _PHASE_COLORS.get(utt["phase"], "#3a7ca5")
        ax.hlines(1.0, utt["start"], max(utt["end"], utt["start"] + 0.05),
                  colors=color, linewidth=8, alpha=0.55)
        if utt["words"]:
            ax.plot(utt["words"], [1.0] * len(utt["words"]), "|",
                    color=color, markersize=12)

    for entry in trace.of_kind("user_event"):
        marker = "v" if entry.payload.get("overlap") else "o"
        ax.plot([entry.t], [0.0], marker, color="#c44536", markersize=8)
        ax.annotate(entry.payload["text"][:28], (entry.t, 0.0),
                    textcoords="offset points", xytext=(0, -18),
                    fontsize=7, ha="center", color="#c44536")

    for entry in trace.of_kind("decision"):
        decision = entry.payload["decision"]
        ax.axvline(entry.t, color=_DECISION_COLORS.get(decision, "black"),
                   linestyle=":", linewidth=1)
        ax.annotate(decision, (entry.t, 0.55), rotation=90, fontsize=7,
                    ha="right", va="center",
                    color=_DECISION_COLORS.get(decision, "black"))

    ax.set_yticks([0.0, 1.0])
    ax.set_yticklabels(["user", "robot"])
    ax.set_ylim(-0.6, 1.4)
    ax.set_xlabel("session time (s)")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_suite_summary(results: list[tuple[Scenario, SessionTrace, Report]],
                         path: str | Path) -> None:
    """Bar chart of decision counts across the suite, annotated with the
    expectation pass rate."""
    counts: dict[str, int] = {}
    n_pass = n_total = 0
    for _, trace, report in results:
        n_pass += report.n_passed
        n_total += report.n_total
        for entry in trace.of_kind("decision"):
            decision = entry.payload["decision"]
            counts[decision] = counts.get(decision, 0) + 1

    names = sorted(counts)
    fig, ax = plt.subplots(figsize=(7, 3.4))
    ax.bar(names, [counts[n] for n in names],
           color=[_DECISION_COLORS.get(n, "#3a7ca5") for n in names])
    ax.set_ylabel("decisions in suite")
    ax.set_title(f"expectations met: {n_pass}/{n_total}", fontsize=10)
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_suite_report(results: list[tuple[Scenario, SessionTrace, Report]],
                       directory: str | Path) -> list[Path]:
    """Write the CSV plus all figures into a directory; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    csv_path = directory / "report.csv"
    write_suite_csv(results, csv_path)
    written.append(csv_path)
    summary_path = directory / "summary.png"
    render_suite_summary(results, summary_path)
    written.append(summary_path)
    for scenario, trace, _ in results:
        figure_path = directory / f"{scenario.id}.png"
        render_session_timeline(trace, figure_path, title=scenario.id)
        written.append(figure_path)
    return written
