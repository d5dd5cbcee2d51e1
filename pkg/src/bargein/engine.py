"""Event-driven session engine.

Drives the robot's word schedule on an explicit clock (virtual in replay, wall
in the gateway), routes overlapping user speech through gate, classifier, and
dispatcher, keeps the dialogue history, and records everything to a trace.

One engine per session; all transitions are serialized by the caller (a
scenario runner or one asyncio event loop), so the engine itself holds no
locks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from . import llm
from .classify import (
    ClassifierImpl,
    ClassifierRequest,
    ClassifierResult,
    make_classifier,
)
from .dispatch import DispatchConfig, ExpandContext, StrategyDispatcher, decide
from .gate import GateOutcomeKind, WakewordConfig, contains_wakeword, gate
from .planner import PlannerKind, PlannerRequest, ResponsePlanner, make_planner
from .speech_clock import (
    SpeakingRateConfig,
    estimated_spoken_index,
    plan_utterance,
    remaining_duration,
    remaining_text,
    spoken_text,
)
from .trace import SessionTrace
from .types import (
    AnswerClarification,
    ClassifierError,
    ContractViolation,
    DialogueHistory,
    HandlingDecision,
    IntentLabel,
    OverlapEvent,
    PlannedUtterance,
    PlannerError,
    RobotAction,
    Speak,
    Speaker,
    WrapUpSummary,
    Yield,
    action_to_dict,
    append_turn,
    count_words,
    render_history,
)


class SessionStateName(Enum):
    IDLE = "idle"
    ROBOT_SPEAKING = "robot_speaking"
    AWAITING_CLASSIFICATION = "awaiting_classification"
    EXECUTING_ACTIONS = "executing_actions"
    AWAITING_USER = "awaiting_user"


class Phase(Enum):
    """What kind of speech the robot is currently producing.

    MAIN covers planned content (original, resumed, or a fresh reply);
    CLARIFY is an answer utterance; WRAPUP speech is yield-committed and is
    interruptible only by wakeword.
    """

    MAIN = "main"
    CLARIFY = "clarify"
    WRAPUP = "wrapup"


@dataclass
class SessionConfig:
    rate: SpeakingRateConfig = field(default_factory=SpeakingRateConfig)
    wakewords: WakewordConfig = field(default_factory=WakewordConfig)
    dispatch: DispatchConfig = field(default_factory=DispatchConfig)
    classifier: str = "rule"
    planner: str = "template"
    clock: str = "virtual"
    history_max_turns: int = 10
    classifier_timeout_s: float = 2.0
    auto_respond: bool = False
    llm: dict = field(default_factory=dict)

    _FLAT_KEYS = {
        "rate_wpm", "floor_s", "wakewords", "backchannel_max_words",
        "aggressive_window_s", "agreement_ack_lexicon", "assistance_ack_lexicon",
        "ack_seed", "classifier", "planner", "clock", "history_max_turns",
        "classifier_timeout_s", "auto_respond", "llm",
    }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        unknown = set(data) - cls._FLAT_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        base = cls()
        rate = SpeakingRateConfig(
            rate_wpm=data.get("rate_wpm", base.rate.rate_wpm),
            floor_s=data.get("floor_s", base.rate.floor_s),
        )
        wakewords = WakewordConfig(
            frozenset(w.lower() for w in data["wakewords"])
        ) if "wakewords" in data else base.wakewords
        dispatch = DispatchConfig(
            backchannel_max_words=data.get("backchannel_max_words", base.dispatch.backchannel_max_words),
            aggressive_window_s=data.get("aggressive_window_s", base.dispatch.aggressive_window_s),
            agreement_ack_lexicon=tuple(data.get("agreement_ack_lexicon", base.dispatch.agreement_ack_lexicon)),
            assistance_ack_lexicon=tuple(data.get("assistance_ack_lexicon", base.dispatch.assistance_ack_lexicon)),
            ack_seed=data.get("ack_seed", base.dispatch.ack_seed),
        )
        return cls(
            rate=rate,
            wakewords=wakewords,
            dispatch=dispatch,
            classifier=data.get("classifier", base.classifier),
            planner=data.get("planner", base.planner),
            clock=data.get("clock", base.clock),
            history_max_turns=data.get("history_max_turns", base.history_max_turns),
            classifier_timeout_s=data.get("classifier_timeout_s", base.classifier_timeout_s),
            auto_respond=data.get("auto_respond", base.auto_respond),
            llm=data.get("llm", {}),
        )

    def to_dict(self) -> dict:
        return {
            "rate_wpm": self.rate.rate_wpm,
            "floor_s": self.rate.floor_s,
            "wakewords": sorted(self.wakewords.wakewords),
            "backchannel_max_words": self.dispatch.backchannel_max_words,
            "aggressive_window_s": self.dispatch.aggressive_window_s,
            "agreement_ack_lexicon": list(self.dispatch.agreement_ack_lexicon),
            "assistance_ack_lexicon": list(self.dispatch.assistance_ack_lexicon),
            "ack_seed": self.dispatch.ack_seed,
            "classifier": self.classifier,
            "planner": self.planner,
            "clock": self.clock,
            "history_max_turns": self.history_max_turns,
            "classifier_timeout_s": self.classifier_timeout_s,
            "auto_respond": self.auto_respond,
            "llm": dict(self.llm),
        }


@dataclass(frozen=True)
class _Step:
    """A queued robot action; speech-bearing steps know their phase and
    whether they open a fresh logical turn."""

    action: RobotAction
    phase: Phase | None = None
    new_turn: bool = False


@dataclass
class _Speech:
    plan: PlannedUtterance
    utt_started_at: float
    turn_origin: float
    turn_id: int
    utt_id: int
    phase: Phase
    next_word: int = 0
    resume_from: Optional[int] = None
    queue: deque = field(default_factory=deque)


@dataclass
class _Pending:
    serial: int
    overlap: OverlapEvent
    request: ClassifierRequest
    issued_at: float
    utt_id: int
    turn_id: int
    turn_origin: float


class SessionEngine:
    def __init__(
        self,
        config: SessionConfig | None = None,
        classifier: ClassifierImpl | None = None,
        planner: ResponsePlanner | None = None,
        session_id: str = "session",
    ):
        self.config = config or SessionConfig()
        self.session_id = session_id
        llm_config = llm.llm_config_from_env(self.config.llm)
        log_io = bool(self.config.llm.get("trace_io", False))
        self.classifier = classifier or make_classifier(
            self.config.classifier, llm_config, log_io=log_io
        )
        self.planner = planner or make_planner(self.config.planner, llm_config)
        self.dispatcher = StrategyDispatcher(self.config.dispatch, self.planner)
        self.trace = SessionTrace()
        self._history: DialogueHistory = ()
        self._t = 0.0
        self._speech: _Speech | None = None
        self._pending: _Pending | None = None
        self._pending_serial = 0
        self._served_serials: set[int] = set()
        self._turn_seq = 0
        self._utt_seq = 0
        self._started = False
        self._interim: str | None = None
        # User speech heard during an utterance that plays out (finish-up,
        # ignored wrap-up overlaps) enters history after the robot's entry.
        self._deferred_user_entries: list[tuple[str, float]] = []

    # -- observability ---------------------------------------------------

    @property
    def now(self) -> float:
        return self._t

    @property
    def history(self) -> DialogueHistory:
        return self._history

    @property
    def state(self) -> SessionStateName:
        if self._speech is None:
            if not self._started:
                return SessionStateName.IDLE
            return SessionStateName.AWAITING_USER
        if self._pending is not None:
            return SessionStateName.AWAITING_CLASSIFICATION
        if self._speech.phase is Phase.MAIN:
            return SessionStateName.ROBOT_SPEAKING
        return SessionStateName.EXECUTING_ACTIONS

    def pending_request(self) -> tuple[int, ClassifierRequest, IntentLabel | None] | None:
        """The classification awaiting an asynchronous driver, if any."""
        p = self._pending
        if p is None or self.classifier.synchronous or p.serial in self._served_serials:
            return None
        return (p.serial, p.request, p.overlap.oracle_intent)

    def mark_request_served(self, serial: int) -> None:
        self._served_serials.add(serial)

    def next_event_time(self) -> float | None:
        """When the next scheduled thing happens (word, utterance end, or
        classification deadline); None when quiescent."""
        times = []
        if self._pending is not None and not self.classifier.synchronous:
            times.append(self._pending.issued_at + self.config.classifier_timeout_s)
        sp = self._speech
        if sp is not None:
            if sp.next_word < sp.plan.n_words:
                times.append(sp.utt_started_at + sp.plan.tokens[sp.next_word].start_s)
            else:
                times.append(sp.utt_started_at + sp.plan.total_duration_s)
        return min(times) if times else None

    # -- clock -----------------------------------------------------------

    def tick(self, now: float) -> None:
        """Advance the session clock, emitting every event due by now."""
        if now < self._t:
            raise ContractViolation(f"clock moved backwards: {now} < {self._t}")
        self._run_until(now)
        self._t = max(self._t, now)

    def _run_until(self, now: float) -> None:
        while True:
            due = self.next_event_time()
            if due is None or due > now:
                break
            self._t = max(self._t, due)
            if (
                self._pending is not None
                and not self.classifier.synchronous
                and due >= self._pending.issued_at + self.config.classifier_timeout_s
            ):
                timeout = self.config.classifier_timeout_s
                self._handle_classifier_failure(
                    f"classifier timed out after {timeout}s", due
                )
                continue
            sp = self._speech
            if sp.next_word < sp.plan.n_words:
                token = sp.plan.tokens[sp.next_word]
                self.trace.append(
                    due, "robot_word",
                    turn=sp.turn_id, utt=sp.utt_id, index=token.index, text=token.text,
                )
                sp.next_word += 1
            else:
                self._complete_utterance(due)

    # -- public operations -------------------------------------------------

    def start_robot_turn(self, text: str, now: float | None = None) -> None:
        """Begin a scripted robot turn; only valid while the robot is silent."""
        now = self._t if now is None else now
        self.tick(now)
        if self._speech is not None:
            raise ContractViolation("start_robot_turn called while robot is speaking")
        if self._pending is not None:
            self._cancel_pending("superseded_by_robot_turn", now)
        self._started = True
        self._begin_utterance(
            text, Phase.MAIN, at=now, turn_id=self._next_turn(), turn_origin=now,
            queue=deque(), origin="scripted",
        )
        self._run_until(self._t)

    def on_user_speech(
        self,
        text: str,
        now: float,
        final: bool = True,
        oracle_intent: IntentLabel | None = None,
    ) -> None:
        """Route finalized user speech; interim fragments are buffered."""
        self.tick(now)
        self._started = True
        if not text.strip():
            self.trace.append(now, "overlap_ignored", reason="empty_transcript")
            return
        if not final:
            self._interim = text
            self.trace.append(now, "user_interim", text=text)
            return
        self._interim = None
        words = count_words(text)

        sp = self._speech
        if sp is not None:
            onset = now - sp.turn_origin
            event = OverlapEvent(text, onset, words, True, oracle_intent)
            self.trace.append(
                now, "user_event",
                text=text, overlap=True, onset_s=onset, word_count=words,
            )
            if sp.phase is Phase.WRAPUP:
                # Wrap-up speech is already yield-committed; only the
                # wakeword override is honored.
                if contains_wakeword(text, self.config.wakewords):
                    self.trace.append(now, "gate", outcome=GateOutcomeKind.WAKEWORD_YIELD.value,
                                      remaining_s=remaining_duration(sp.plan, now - sp.utt_started_at))
                    self._wakeword_yield(event, now)
                else:
                    self.trace.append(now, "overlap_ignored", reason="wrapup_committed")
                    self._deferred_user_entries.append((text, now))
                self._run_until(self._t)
                return
            if self._pending is not None:
                # A newer overlap supersedes the one still being classified.
                if contains_wakeword(text, self.config.wakewords):
                    self._cancel_pending("superseded_by_wakeword", now, defer_entry=True)
                    self.trace.append(now, "gate", outcome=GateOutcomeKind.WAKEWORD_YIELD.value,
                                      remaining_s=remaining_duration(sp.plan, now - sp.utt_started_at))
                    self._wakeword_yield(event, now)
                    self._run_until(self._t)
                    return
                self._cancel_pending("superseded_by_new_overlap", now, defer_entry=True)
            outcome = gate(event, sp.plan, now - sp.utt_started_at, self.config.wakewords)
            self.trace.append(
                now, "gate",
                outcome=outcome.kind.value,
                remaining_s=remaining_duration(sp.plan, now - sp.utt_started_at),
            )
            if outcome.kind is GateOutcomeKind.WAKEWORD_YIELD:
                self._wakeword_yield(event, now)
            elif outcome.kind is GateOutcomeKind.FINISH_UP:
                self.trace.append(
                    now, "decision",
                    decision=HandlingDecision.FINISH_UP.value, via="finish_up_gate",
                    intent=None, word_count=words, elapsed_s=onset,
                    degraded=False, fallback=False, resume_from=None,
                )
                self._deferred_user_entries.append((text, now))
            else:
                self._request_classification(event, now)
            self._run_until(self._t)
            return

        # Robot silent: an ordinary user turn, no interruption machinery.
        if self._pending is not None:
            self._cancel_pending("superseded_by_user_turn", now)
        self.trace.append(
            now, "user_event", text=text, overlap=False, onset_s=0.0, word_count=words,
        )
        self._history = append_turn(self._history, Speaker.USER, text, now)
        if self.config.auto_respond:
            self._respond_to_user_turn(text, now)
        self._run_until(self._t)

    def on_classifier_result(
        self, result: ClassifierResult, now: float, serial: int | None = None
    ) -> None:
        """Apply a classification; elapsed time and resume indices are
        computed here, at application time, because the robot kept speaking
        while the classifier ran."""
        self.tick(now)
        if self._pending is None or (serial is not None and self._pending.serial != serial):
            self.trace.append(now, "failure", stage="classifier",
                              error="stale result ignored (no matching pending classification)")
            return
        pending = self._pending
        self._pending = None
        self.trace.append(
            now, "intent",
            label=result.label.value, source=result.source.value,
            latency_s=result.latency_s,
        )
        if result.raw_io is not None:
            self.trace.append(now, "llm_io", stage="classifier", **result.raw_io)
        self._apply_decision(pending, result.label, now, fallback=False)
        self._run_until(self._t)

    def on_classifier_failure(self, error: str, now: float, serial: int | None = None) -> None:
        self.tick(now)
        if serial is not None and (self._pending is None or self._pending.serial != serial):
            self.trace.append(now, "failure", stage="classifier",
                              error=f"stale failure ignored: {error}")
            return
        self._handle_classifier_failure(error, now)
        self._run_until(self._t)

    def end_session(self, now: float | None = None) -> None:
        now = self._t if now is None else now
        self.tick(now)
        self.trace.append(now, "session_end")

    # -- internals ---------------------------------------------------------

    def _next_turn(self) -> int:
        self._turn_seq += 1
        return self._turn_seq

    def _next_utt(self) -> int:
        self._utt_seq += 1
        return self._utt_seq

    def _begin_utterance(
        self,
        text: str,
        phase: Phase,
        at: float,
        turn_id: int,
        turn_origin: float,
        queue: deque,
        origin: str,
        resume_from: int | None = None,
    ) -> None:
        plan = plan_utterance(text, self.config.rate)
        utt_id = self._next_utt()
        self._speech = _Speech(
            plan=plan, utt_started_at=at, turn_origin=turn_origin,
            turn_id=turn_id, utt_id=utt_id, phase=phase,
            resume_from=resume_from, queue=queue,
        )
        self.trace.append(
            at, "robot_plan",
            turn=turn_id, utt=utt_id, phase=phase.value, origin=origin,
            text=plan.full_text, n_words=plan.n_words, resume_from=resume_from,
        )

    def _complete_utterance(self, at: float) -> None:
        sp = self._speech
        self.trace.append(at, "utterance_complete", turn=sp.turn_id, utt=sp.utt_id)
        self._history = append_turn(
            self._history, Speaker.ROBOT, sp.plan.full_text, sp.utt_started_at, complete=True,
        )
        self._flush_deferred_entries()
        self._speech = None
        if sp.queue:
            self._execute_steps(sp.queue, at, turn_origin=sp.turn_origin, turn_id=sp.turn_id)

    def _flush_deferred_entries(self) -> None:
        for text, at in self._deferred_user_entries:
            self._history = append_turn(self._history, Speaker.USER, text, at)
        self._deferred_user_entries.clear()

    def _cut_current(self, now: float, overlap_text: str | None, overlap_at: float | None) -> _Speech:
        """Stop the current utterance, recording the estimated-spoken prefix
        as a truncated history entry, then the overlap that cut it."""
        sp = self._speech
        spoken_idx = estimated_spoken_index(sp.plan, now - sp.utt_started_at)
        prefix = spoken_text(sp.plan, spoken_idx)
        self.trace.append(
            now, "utterance_cut",
            turn=sp.turn_id, utt=sp.utt_id, spoken_index=spoken_idx,
        )
        if prefix:
            self._history = append_turn(
                self._history, Speaker.ROBOT, prefix, sp.utt_started_at, complete=False,
            )
        self._flush_deferred_entries()
        if overlap_text is not None:
            self._history = append_turn(self._history, Speaker.USER, overlap_text, overlap_at)
        self._speech = None
        return sp

    def _request_classification(self, event: OverlapEvent, now: float) -> None:
        sp = self._speech
        spoken_idx = estimated_spoken_index(sp.plan, now - sp.utt_started_at)
        request = ClassifierRequest(
            history_rendered=render_history(self._history, self.config.history_max_turns),
            overlap_text=event.transcript,
            elapsed_s=now - sp.turn_origin,
            robot_remaining_text=remaining_text(sp.plan, spoken_idx),
            robot_spoken_text=spoken_text(sp.plan, spoken_idx),
        )
        self._pending_serial += 1
        self._pending = _Pending(
            serial=self._pending_serial, overlap=event, request=request,
            issued_at=now, utt_id=sp.utt_id, turn_id=sp.turn_id,
            turn_origin=sp.turn_origin,
        )
        if self.classifier.synchronous:
            try:
                result = self.classifier.classify(request, oracle_intent=event.oracle_intent)
            except ClassifierError as exc:
                self._handle_classifier_failure(str(exc), now)
                return
            self.on_classifier_result(result, now)

    def _cancel_pending(self, reason: str, now: float, defer_entry: bool = False) -> None:
        pending = self._pending
        self._pending = None
        self.trace.append(now, "classification_cancelled", reason=reason)
        text = pending.overlap.transcript
        at = pending.turn_origin + pending.overlap.onset_s
        if defer_entry:
            self._deferred_user_entries.append((text, at))
        else:
            self._history = append_turn(self._history, Speaker.USER, text, at)

    def _handle_classifier_failure(self, error: str, now: float) -> None:
        if self._pending is None:
            self.trace.append(now, "failure", stage="classifier",
                              error=f"stale failure ignored: {error}")
            return
        pending = self._pending
        self._pending = None
        self.trace.append(now, "failure", stage="classifier", error=error)
        self._apply_decision(pending, None, now, fallback=True)

    def _apply_decision(
        self,
        pending: _Pending,
        label: IntentLabel | None,
        now: float,
        fallback: bool,
    ) -> None:
        sp = self._speech
        still_speaking = sp is not None and sp.utt_id == pending.utt_id
        turn_origin = sp.turn_origin if still_speaking else pending.turn_origin
        elapsed = now - turn_origin
        if fallback:
            decision = HandlingDecision.YIELD_IMMEDIATELY
        else:
            decision = decide(label, pending.overlap.word_count, elapsed, self.config.dispatch)
        via = "classifier_fallback" if fallback else "pipeline"

        if not still_speaking:
            self._apply_degraded_decision(pending, label, decision, elapsed, now, via)
            return

        old = self._cut_current(now, pending.overlap.transcript,
                                pending.turn_origin + pending.overlap.onset_s)
        ctx = ExpandContext(
            plan=old.plan,
            elapsed_in_utterance_s=now - old.utt_started_at,
            overlap_text=pending.overlap.transcript,
            history_rendered=render_history(self._history, self.config.history_max_turns),
            intent=label,
        )
        expansion = self.dispatcher.expand(decision, ctx)
        self.trace.append(
            now, "decision",
            decision=decision.value, via=via,
            intent=label.value if label else None,
            word_count=pending.overlap.word_count, elapsed_s=elapsed,
            degraded=False, fallback=fallback, resume_from=expansion.resume_index,
        )
        if expansion.planner_failure:
            self.trace.append(now, "failure", stage="planner", error=expansion.planner_failure)
        steps = deque(self._wrap_actions(expansion.actions))
        if not any(isinstance(a, Yield) for a in expansion.actions):
            # Cooperative handling composes with whatever was already queued
            # (e.g. the resume of an outer utterance); yields drop it.
            steps.extend(old.queue)
        self._execute_steps(steps, now, turn_origin=old.turn_origin, turn_id=old.turn_id)

    def _apply_degraded_decision(
        self,
        pending: _Pending,
        label: IntentLabel | None,
        decision: HandlingDecision,
        elapsed: float,
        now: float,
        via: str,
    ) -> None:
        """The classified utterance already ended: nothing to resume, nothing
        to yield. Continues become no-ops, clarifications are answered as a
        fresh turn, disruptive content gets a fresh reply."""
        self.trace.append(
            now, "decision",
            decision=decision.value, via=via,
            intent=label.value if label else None,
            word_count=pending.overlap.word_count, elapsed_s=elapsed,
            degraded=True, fallback=via == "classifier_fallback",
            resume_from=None,
        )
        self._history = append_turn(
            self._history, Speaker.USER, pending.overlap.transcript,
            pending.turn_origin + pending.overlap.onset_s,
        )
        steps: deque[_Step] = deque()
        if label is IntentLabel.CLARIFICATION:
            try:
                answer = self.planner.plan_clarify_answer(PlannerRequest(
                    kind=PlannerKind.CLARIFY_ANSWER,
                    history_rendered=render_history(self._history, self.config.history_max_turns),
                    trigger_text=pending.overlap.transcript,
                ))
            except PlannerError as exc:
                self.trace.append(now, "failure", stage="planner", error=str(exc))
                return
            steps.append(_Step(AnswerClarification(answer), Phase.CLARIFY, new_turn=True))
        elif label is IntentLabel.DISRUPTIVE or via == "classifier_fallback":
            try:
                reply = self.planner.plan_new_response(PlannerRequest(
                    kind=PlannerKind.NEW_RESPONSE,
                    history_rendered=render_history(self._history, self.config.history_max_turns),
                    trigger_text=pending.overlap.transcript,
                ))
            except PlannerError as exc:
                self.trace.append(now, "failure", stage="planner", error=str(exc))
                return
            steps.append(_Step(Speak(reply), Phase.MAIN, new_turn=True))
        if self._speech is not None:
            # A queued utterance (e.g. a resume) is already playing; the
            # degraded reply waits its turn instead of clobbering it.
            self._speech.queue.extend(steps)
        else:
            self._execute_steps(steps, now, turn_origin=None, turn_id=None)

    def _wakeword_yield(self, event: OverlapEvent, now: float) -> None:
        """The wakeword override: treated as the strongest disruptive
        interruption, bypassing classification entirely."""
        sp = self._speech
        onset = now - sp.turn_origin
        old = self._cut_current(now, event.transcript, now)
        self.trace.append(
            now, "decision",
            decision=HandlingDecision.YIELD_IMMEDIATELY.value, via="wakeword_gate",
            intent=None, word_count=event.word_count, elapsed_s=onset,
            degraded=False, fallback=False, resume_from=None,
        )
        ctx = ExpandContext(
            plan=old.plan,
            elapsed_in_utterance_s=now - old.utt_started_at,
            overlap_text=event.transcript,
            history_rendered=render_history(self._history, self.config.history_max_turns),
        )
        expansion = self.dispatcher.expand(HandlingDecision.YIELD_IMMEDIATELY, ctx)
        if expansion.planner_failure:
            self.trace.append(now, "failure", stage="planner", error=expansion.planner_failure)
        self._execute_steps(
            deque(self._wrap_actions(expansion.actions)), now,
            turn_origin=old.turn_origin, turn_id=old.turn_id,
        )

    def _respond_to_user_turn(self, text: str, now: float) -> None:
        try:
            reply = self.planner.plan_new_response(PlannerRequest(
                kind=PlannerKind.NEW_RESPONSE,
                history_rendered=render_history(self._history, self.config.history_max_turns),
                trigger_text=text,
            ))
        except PlannerError as exc:
            self.trace.append(now, "failure", stage="planner", error=str(exc))
            return
        self._execute_steps(
            deque([_Step(Speak(reply), Phase.MAIN, new_turn=True)]), now,
            turn_origin=None, turn_id=None,
        )

    @staticmethod
    def _wrap_actions(actions: list[RobotAction], degraded: bool = False) -> list[_Step]:
        steps = []
        for action in actions:
            if isinstance(action, Speak):
                new_turn = action.resume_token_index is None
                steps.append(_Step(action, Phase.MAIN, new_turn=new_turn))
            elif isinstance(action, AnswerClarification):
                steps.append(_Step(action, Phase.CLARIFY, new_turn=degraded))
            elif isinstance(action, WrapUpSummary):
                steps.append(_Step(action, Phase.WRAPUP))
            else:
                steps.append(_Step(action))
        return steps

    def _execute_steps(
        self,
        steps: deque,
        at: float,
        turn_origin: float | None,
        turn_id: int | None,
    ) -> None:
        """Pop queued actions: instantaneous ones are traced in place; the
        first speech-bearing step starts speaking and holds the rest."""
        while steps:
            step = steps.popleft()
            action = step.action
            self.trace.append(at, "action", action=action_to_dict(action))
            if step.phase is None:
                continue
            if step.new_turn or turn_origin is None or turn_id is None:
                new_turn_id = self._next_turn()
                new_origin = at
            else:
                new_turn_id = turn_id
                new_origin = turn_origin
            text = action.text
            resume = action.resume_token_index if isinstance(action, Speak) else None
            self._begin_utterance(
                text, step.phase, at=at, turn_id=new_turn_id,
                turn_origin=new_origin, queue=steps, origin="engine",
                resume_from=resume,
            )
            return
