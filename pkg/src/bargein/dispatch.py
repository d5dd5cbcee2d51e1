"""Second stage of overlap handling: map an intent to a handling decision and
expand decisions into concrete robot action sequences.

The timing branch lives here, not in the classifier: disruptive interruptions
within the aggressive window (measured from the start of the logical turn,
surviving resumes) are met with a wrap-up instead of an immediate yield.
"""

from __future__ import annotations

from dataclasses import dataclass

from .planner import PlannerKind, PlannerRequest, ResponsePlanner
from .speech_clock import remaining_text, resume_point
from .types import (
    AnswerClarification,
    ContractViolation,
    HandlingDecision,
    IntentLabel,
    Nod,
    PlannedUtterance,
    PlannerError,
    RobotAction,
    Speak,
    VerbalAck,
    WrapUpSummary,
    Yield,
)


@dataclass(frozen=True)
class DispatchConfig:
    backchannel_max_words: int = 2
    aggressive_window_s: float = 5.0
    agreement_ack_lexicon: tuple[str, ...] = ("ya", "yes", "uhhum", "sure")
    assistance_ack_lexicon: tuple[str, ...] = ("yeah", "yes", "thanks")
    ack_seed: int = 0

    def __post_init__(self) -> None:
        if self.backchannel_max_words < 1:
            raise ValueError("backchannel_max_words must be >= 1")
        if self.aggressive_window_s <= 0:
            raise ValueError("aggressive_window_s must be > 0")
        if not self.agreement_ack_lexicon or not self.assistance_ack_lexicon:
            raise ValueError("ack lexicons must be non-empty")


def decide(
    label: IntentLabel,
    word_count: int,
    elapsed_s: float,
    cfg: DispatchConfig,
) -> HandlingDecision:
    """Total, pure decision table.

    An agreement of at most backchannel_max_words is a backchannel and is
    simply talked through; "within the aggressive window" is inclusive at the
    boundary.
    """
    if word_count < 1:
        raise ValueError("word_count must be >= 1")
    if elapsed_s < 0:
        raise ValueError("elapsed_s must be >= 0")
    if label is IntentLabel.AGREEMENT:
        if word_count <= cfg.backchannel_max_words:
            return HandlingDecision.CONTINUE
        return HandlingDecision.ACK_AND_CONTINUE
    if label is IntentLabel.ASSISTANCE:
        return HandlingDecision.ACK_AND_CONTINUE
    if label is IntentLabel.CLARIFICATION:
        return HandlingDecision.CLARIFY_AND_CONTINUE
    if elapsed_s <= cfg.aggressive_window_s:
        return HandlingDecision.ACK_AND_WRAP_UP
    return HandlingDecision.YIELD_IMMEDIATELY


@dataclass
class ExpandContext:
    """Everything expansion needs about the moment a decision is applied.

    elapsed_in_utterance_s is relative to the current utterance (it drives
    resume-point estimation); the aggressive-window elapsed time was already
    consumed by decide().
    """

    plan: PlannedUtterance
    elapsed_in_utterance_s: float
    overlap_text: str
    history_rendered: str = ""
    intent: IntentLabel | None = None


@dataclass
class Expansion:
    actions: list[RobotAction]
    resume_index: int | None = None
    planner_failure: str | None = None


class StrategyDispatcher:
    """Expands decisions into action sequences; holds the per-session
    round-robin state for acknowledgment picks."""

    def __init__(self, cfg: DispatchConfig, planner: ResponsePlanner):
        self.cfg = cfg
        self.planner = planner
        self._ack_counters: dict[IntentLabel, int] = {}

    def pick_ack(self, label: IntentLabel) -> str:
        """Seeded round-robin over the label's lexicon, so traces replay
        identically."""
        if label is IntentLabel.AGREEMENT:
            lexicon = self.cfg.agreement_ack_lexicon
        elif label is IntentLabel.ASSISTANCE:
            lexicon = self.cfg.assistance_ack_lexicon
        else:
            raise ContractViolation(f"no ack lexicon for intent {label.value}")
        count = self._ack_counters.get(label, 0)
        self._ack_counters[label] = count + 1
        return lexicon[(self.cfg.ack_seed + count) % len(lexicon)]

    def expand(self, decision: HandlingDecision, ctx: ExpandContext) -> Expansion:
        """Produce the action sequence for a decision.

        Planner failures degrade to a bare yield (the user gets the floor)
        and are reported back for the trace; they never crash the session.
        """
        if decision is HandlingDecision.FINISH_UP:
            return Expansion([])

        if decision is HandlingDecision.YIELD_IMMEDIATELY:
            try:
                reply = self.planner.plan_new_response(
                    PlannerRequest(
                        kind=PlannerKind.NEW_RESPONSE,
                        history_rendered=ctx.history_rendered,
                        trigger_text=ctx.overlap_text,
                    )
                )
            except PlannerError as exc:
                return Expansion([Yield()], planner_failure=str(exc))
            return Expansion([Yield(), Speak(reply)])

        resume = resume_point(ctx.plan, ctx.elapsed_in_utterance_s)
        rest = remaining_text(ctx.plan, resume)

        if decision is HandlingDecision.CONTINUE:
            actions: list[RobotAction] = [Speak(rest, resume)] if rest else []
            return Expansion(actions, resume_index=resume)

        if decision is HandlingDecision.ACK_AND_CONTINUE:
            label = ctx.intent if ctx.intent in (IntentLabel.AGREEMENT, IntentLabel.ASSISTANCE) else IntentLabel.AGREEMENT
            actions = [VerbalAck(self.pick_ack(label)), Nod()]
            if rest:
                actions.append(Speak(rest, resume))
            return Expansion(actions, resume_index=resume)

        if decision is HandlingDecision.CLARIFY_AND_CONTINUE:
            try:
                answer = self.planner.plan_clarify_answer(
                    PlannerRequest(
                        kind=PlannerKind.CLARIFY_ANSWER,
                        history_rendered=ctx.history_rendered,
                        trigger_text=ctx.overlap_text,
                        remaining_text=rest,
                    )
                )
            except PlannerError as exc:
                return Expansion([Yield()], planner_failure=str(exc))
            actions = [AnswerClarification(answer)]
            if rest:
                actions.append(Speak(rest, resume))
            return Expansion(actions, resume_index=resume)

        if decision is HandlingDecision.ACK_AND_WRAP_UP:
            try:
                summary = self.planner.plan_wrapup(
                    PlannerRequest(
                        kind=PlannerKind.WRAP_UP,
                        history_rendered=ctx.history_rendered,
                        remaining_text=rest,
                    )
                )
            except PlannerError as exc:
                return Expansion([Yield()], planner_failure=str(exc))
            return Expansion([WrapUpSummary(summary), Yield()], resume_index=resume)

        raise ContractViolation(f"unhandled decision {decision!r}")
