"""Scenario files, deterministic replay, and golden-expectation checking.

A scenario is one human-writable JSON document: config overrides, a script of
robot turns and timed user events, and the expected gate outcomes, intents,
and decisions. Replay runs on the virtual clock, so identical scenarios yield
byte-identical traces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .engine import SessionConfig, SessionEngine
from .gate import GateOutcomeKind
from .trace import SessionTrace, TraceEntry
from .types import HandlingDecision, IntentLabel, ScenarioError

_GATE_VALUES = {k.value for k in GateOutcomeKind}
_INTENT_VALUES = {v.value for v in IntentLabel}
_DECISION_VALUES = {d.value for d in HandlingDecision}
_STEP_KINDS = {"robot_turn", "user_event", "user_turn"}
_EXPECTATION_FIELDS = {"gate", "intent", "decision", "resume_from"}


@dataclass(frozen=True)
class ScriptStep:
    kind: str
    text: str
    at_s: float | None = None
    oracle_intent: IntentLabel | None = None


@dataclass(frozen=True)
class Expectation:
    step: int
    gate: str | None = None
    intent: str | None = None
    decision: str | None = None
    resume_from: int | None = None


@dataclass(frozen=True)
class Scenario:
    id: str
    config: dict
    script: tuple[ScriptStep, ...]
    expectations: tuple[Expectation, ...] = ()


@dataclass(frozen=True)
class ExpectationResult:
    step: int
    check: str
    expected: object
    actual: object

    @property
    def passed(self) -> bool:
        return self.expected == self.actual


@dataclass
class Report:
    scenario_id: str
    results: list[ExpectationResult] = field(default_factory=list)

    @property
    def n_total(self) -> int:
        return len(self.results)

    @property
    def n_passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def passed(self) -> bool:
        return self.n_passed == self.n_total

    def summary(self) -> str:
        lines = [f"{self.scenario_id}: {self.n_passed}/{self.n_total} expectations met"]
        for r in self.results:
            if not r.passed:
                lines.append(
                    f"  step {r.step} {r.check}: expected {r.expected!r}, got {r.actual!r}"
                )
        return "\n".join(lines)


def _err(path: str | Path, where: str, message: str) -> ScenarioError:
    return ScenarioError(f"{path}: {where}: {message}")


def load_scenario(path: str | Path) -> Scenario:
    """Parse and validate one scenario file.

    Syntax errors carry the JSON line and column; semantic errors name the
    exact step and field.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ScenarioError(f"{path}: file not found") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc

    if not isinstance(raw, dict):
        raise _err(path, "document", "scenario must be a JSON object")
    scenario_id = raw.get("id")
    if not isinstance(scenario_id, str) or not scenario_id:
        raise _err(path, "id", "required non-empty string")
    config = raw.get("config", {})
    if not isinstance(config, dict):
        raise _err(path, "config", "must be an object")
    try:
        SessionConfig.from_dict(config)
    except (ValueError, TypeError) as exc:
        raise _err(path, "config", str(exc)) from exc

    script_raw = raw.get("script")
    if not isinstance(script_raw, list) or not script_raw:
        raise _err(path, "script", "required non-empty array")
    uses_oracle = config.get("classifier") == "oracle"
    steps = []
    for i, item in enumerate(script_raw):
        where = f"script[{i}]"
        if not isinstance(item, dict):
            raise _err(path, where, "step must be an object")
        kind = item.get("kind")
        if kind not in _STEP_KINDS:
            raise _err(path, f"{where}.kind", f"must be one of {sorted(_STEP_KINDS)}")
        text = item.get("text")
        if not isinstance(text, str) or not text.strip():
            raise _err(path, f"{where}.text", "required non-empty string")
        at_s = None
        oracle = None
        if kind == "user_event":
            at_s = item.get("at_s")
            if not isinstance(at_s, (int, float)) or isinstance(at_s, bool) or at_s < 0:
                raise _err(path, f"{where}.at_s", "must be a number >= 0")
            raw_intent = item.get("oracle_intent")
            if raw_intent is not None:
                if raw_intent not in _INTENT_VALUES:
                    raise _err(
                        path, f"{where}.oracle_intent",
                        f"unknown intent {raw_intent!r}; expected one of {sorted(_INTENT_VALUES)}",
                    )
                oracle = IntentLabel(raw_intent)
            elif uses_oracle:
                raise _err(
                    path, f"{where}.oracle_intent",
                    "required when the scenario selects the oracle classifier",
                )
        steps.append(ScriptStep(kind=kind, text=text, at_s=at_s, oracle_intent=oracle))

    expectations = []
    for i, item in enumerate(raw.get("expectations", [])):
        where = f"expectations[{i}]"
        if not isinstance(item, dict):
            raise _err(path, where, "expectation must be an object")
        step = item.get("step")
        if not isinstance(step, int) or isinstance(step, bool) or not 0 <= step < len(steps):
            raise _err(path, f"{where}.step", f"must be a step index in 0..{len(steps) - 1}")
        unknown = set(item) - _EXPECTATION_FIELDS - {"step"}
        if unknown:
            raise _err(path, where, f"unknown fields: {sorted(unknown)}")
        gate_v = item.get("gate")
        if gate_v is not None and gate_v not in _GATE_VALUES:
            raise _err(path, f"{where}.gate", f"unknown gate outcome {gate_v!r}")
        intent_v = item.get("intent")
        if intent_v is not None and intent_v not in _INTENT_VALUES:
            raise _err(path, f"{where}.intent", f"unknown intent {intent_v!r}")
        decision_v = item.get("decision")
        if decision_v is not None and decision_v not in _DECISION_VALUES:
            raise _err(path, f"{where}.decision", f"unknown decision {decision_v!r}")
        resume_v = item.get("resume_from")
        if resume_v is not None and (not isinstance(resume_v, int) or resume_v < 0):
            raise _err(path, f"{where}.resume_from", "must be an integer >= 0")
        expectations.append(Expectation(
            step=step, gate=gate_v, intent=intent_v,
            decision=decision_v, resume_from=resume_v,
        ))

    return Scenario(
        id=scenario_id, config=config,
        script=tuple(steps), expectations=tuple(expectations),
    )


def _drain(engine: SessionEngine, t: float) -> float:
    """Advance the virtual clock through every scheduled event."""
    while (due := engine.next_event_time()) is not None:
        t = max(t, due)
        engine.tick(t)
    return t


def run_scenario(scenario: Scenario) -> SessionTrace:
    """Replay a scenario on the virtual clock and return its trace.

    User events fire at exact virtual times relative to the enclosing robot
    turn's start; robot turns begin once the session is quiescent.
    """
    config = SessionConfig.from_dict(scenario.config)
    engine = SessionEngine(config, session_id=scenario.id)
    t = 0.0
    turn_start = 0.0
    for i, step in enumerate(scenario.script):
        if step.kind == "robot_turn":
            t = _drain(engine, t)
            engine.start_robot_turn(step.text, t)
            turn_start = t
        elif step.kind == "user_event":
            target = turn_start + step.at_s
            if target < t:
                raise ScenarioError(
                    f"{scenario.id}: script[{i}] fires at {target}s, before the "
                    f"session clock ({t}s); order user events by at_s"
                )
            engine.on_user_speech(step.text, target, final=True, oracle_intent=step.oracle_intent)
            t = target
        else:  # user_turn
            t = _drain(engine, t)
            engine.on_user_speech(step.text, t, final=True)
    t = _drain(engine, t)
    engine.end_session(t)
    return engine.trace


def _step_anchors(trace: SessionTrace, scenario: Scenario) -> dict[int, int]:
    """Map script step index -> trace index of its anchor entry.

    User steps anchor on user_event entries, robot turns on scripted
    robot_plan entries; both appear in script order by construction.
    """
    anchors: dict[int, int] = {}
    entry_indices = [
        i for i, e in enumerate(trace)
        if e.kind == "user_event"
        or (e.kind == "robot_plan" and e.payload.get("origin") == "scripted")
    ]
    for step_idx, trace_idx in zip(range(len(scenario.script)), entry_indices):
        anchors[step_idx] = trace_idx
    return anchors


def _first_kind_after(
    trace: SessionTrace, kind: str, start: int, stop: int
) -> TraceEntry | None:
    for i in range(start, stop):
        if trace[i].kind == kind:
            return trace[i]
    return None


def check_expectations(trace: SessionTrace, scenario: Scenario) -> Report:
    """Compare a replay trace against the scenario's golden expectations."""
    report = Report(scenario_id=scenario.id)
    anchors = _step_anchors(trace, scenario)
    bounds = sorted(anchors.values()) + [len(trace)]
    for exp in scenario.expectations:
        if exp.step not in anchors:
            report.results.append(
                ExpectationResult(exp.step, "anchor", "step present in trace", "missing")
            )
            continue
        start = anchors[exp.step]
        stop = next(b for b in bounds if b > start)
        window = (start, stop)
        if exp.gate is not None:
            entry = _first_kind_after(trace, "gate", *window)
            actual = entry.payload.get("outcome") if entry else None
            report.results.append(ExpectationResult(exp.step, "gate", exp.gate, actual))
        if exp.intent is not None:
            entry = _first_kind_after(trace, "intent", *window)
            actual = entry.payload.get("label") if entry else None
            report.results.append(ExpectationResult(exp.step, "intent", exp.intent, actual))
        if exp.decision is not None:
            entry = _first_kind_after(trace, "decision", *window)
            actual = entry.payload.get("decision") if entry else None
            report.results.append(ExpectationResult(exp.step, "decision", exp.decision, actual))
        if exp.resume_from is not None:
            entry = _first_kind_after(trace, "decision", *window)
            actual = entry.payload.get("resume_from") if entry else None
            report.results.append(
                ExpectationResult(exp.step, "resume_from", exp.resume_from, actual)
            )
    return report


def run_suite(directory: str | Path) -> list[tuple[Scenario, SessionTrace, Report]]:
    """Load, replay, and check every scenario in a directory (sorted by name)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.json"))
    if not paths:
        raise ScenarioError(f"{directory}: no scenario files found")
    out = []
    for path in paths:
        scenario = load_scenario(path)
        trace = run_scenario(scenario)
        out.append((scenario, trace, check_expectations(trace, scenario)))
    return out
