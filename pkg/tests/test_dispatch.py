import itertools

import pytest

from bargein.dispatch import DispatchConfig, ExpandContext, StrategyDispatcher, decide
from bargein.planner import HOLD_PHRASE, TemplatePlanner
from bargein.speech_clock import SpeakingRateConfig, plan_utterance
from bargein.types import (
    AnswerClarification,
    ContractViolation,
    HandlingDecision,
    IntentLabel,
    Nod,
    PlannerError,
    Speak,
    VerbalAck,
    WrapUpSummary,
    Yield,
)

CFG = DispatchConfig()


class TestDecide:
    def test_backchannel_continues(self):
        assert decide(IntentLabel.AGREEMENT, 1, 9.0, CFG) is HandlingDecision.CONTINUE

    def test_long_agreement_acks(self):
        assert decide(IntentLabel.AGREEMENT, 5, 9.0, CFG) is HandlingDecision.ACK_AND_CONTINUE

    def test_assistance_acks(self):
        assert decide(IntentLabel.ASSISTANCE, 8, 1.0, CFG) is HandlingDecision.ACK_AND_CONTINUE

    def test_clarification(self):
        assert decide(IntentLabel.CLARIFICATION, 3, 7.0, CFG) is (
            HandlingDecision.CLARIFY_AND_CONTINUE
        )

    def test_early_disruptive_wraps_up(self):
        assert decide(IntentLabel.DISRUPTIVE, 6, 3.0, CFG) is HandlingDecision.ACK_AND_WRAP_UP

    def test_late_disruptive_yields(self):
        assert decide(IntentLabel.DISRUPTIVE, 6, 12.0, CFG) is (
            HandlingDecision.YIELD_IMMEDIATELY
        )

    def test_word_count_boundary(self):
        assert decide(IntentLabel.AGREEMENT, 2, 0.0, CFG) is HandlingDecision.CONTINUE
        assert decide(IntentLabel.AGREEMENT, 3, 0.0, CFG) is HandlingDecision.ACK_AND_CONTINUE

    def test_aggressive_window_boundary_inclusive(self):
        assert decide(IntentLabel.DISRUPTIVE, 4, 5.0, CFG) is HandlingDecision.ACK_AND_WRAP_UP
        assert decide(IntentLabel.DISRUPTIVE, 4, 5.001, CFG) is (
            HandlingDecision.YIELD_IMMEDIATELY
        )

    def test_exhaustive_and_total(self):
        for label, wc, elapsed in itertools.product(
            IntentLabel, [1, 2, 3, 50], [0.0, 4.9, 5.0, 5.1, 60.0]
        ):
            assert decide(label, wc, elapsed, CFG) in HandlingDecision

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            decide(IntentLabel.AGREEMENT, 0, 1.0, CFG)
        with pytest.raises(ValueError):
            decide(IntentLabel.AGREEMENT, 1, -1.0, CFG)


def ctx(plan_text="One two three. Four five six.", elapsed=2.0, overlap="hm okay sure",
        intent=None, history=""):
    plan = plan_utterance(plan_text, SpeakingRateConfig(rate_wpm=120))
    return ExpandContext(
        plan=plan, elapsed_in_utterance_s=elapsed, overlap_text=overlap,
        history_rendered=history, intent=intent,
    )


def dispatcher(planner=None):
    return StrategyDispatcher(CFG, planner or TemplatePlanner())


class TestPickAck:
    def test_agreement_first_pick(self):
        assert dispatcher().pick_ack(IntentLabel.AGREEMENT) == "ya"

    def test_assistance_first_pick(self):
        assert dispatcher().pick_ack(IntentLabel.ASSISTANCE) == "yeah"

    def test_round_robin_varies(self):
        d = dispatcher()
        first = d.pick_ack(IntentLabel.AGREEMENT)
        second = d.pick_ack(IntentLabel.AGREEMENT)
        assert first != second

    def test_seed_shifts_start(self):
        d = StrategyDispatcher(DispatchConfig(ack_seed=1), TemplatePlanner())
        assert d.pick_ack(IntentLabel.AGREEMENT) == "yes"

    def test_other_labels_rejected(self):
        with pytest.raises(ContractViolation):
            dispatcher().pick_ack(IntentLabel.DISRUPTIVE)


class TestExpand:
    def test_finish_up_is_empty(self):
        exp = dispatcher().expand(HandlingDecision.FINISH_UP, ctx())
        assert exp.actions == []

    def test_continue_resumes_from_clause_boundary(self):
        # elapsed 2.0 covers 4 tokens; last boundary is "three." at index 2
        exp = dispatcher().expand(HandlingDecision.CONTINUE, ctx())
        assert exp.resume_index == 3
        assert exp.actions == [Speak("Four five six.", 3)]

    def test_ack_and_continue_sequence(self):
        exp = dispatcher().expand(
            HandlingDecision.ACK_AND_CONTINUE, ctx(intent=IntentLabel.AGREEMENT)
        )
        assert isinstance(exp.actions[0], VerbalAck)
        assert exp.actions[0].token in CFG.agreement_ack_lexicon
        assert isinstance(exp.actions[1], Nod)
        assert exp.actions[2] == Speak("Four five six.", 3)

    def test_assistance_ack_uses_its_lexicon(self):
        exp = dispatcher().expand(
            HandlingDecision.ACK_AND_CONTINUE, ctx(intent=IntentLabel.ASSISTANCE)
        )
        assert exp.actions[0].token in CFG.assistance_ack_lexicon

    def test_clarify_then_resume(self):
        exp = dispatcher().expand(
            HandlingDecision.CLARIFY_AND_CONTINUE,
            ctx(overlap="what about four five?", intent=IntentLabel.CLARIFICATION),
        )
        assert isinstance(exp.actions[0], AnswerClarification)
        assert exp.actions[1] == Speak("Four five six.", 3)

    def test_wrap_up_holds_then_yields(self):
        exp = dispatcher().expand(HandlingDecision.ACK_AND_WRAP_UP, ctx())
        assert isinstance(exp.actions[0], WrapUpSummary)
        assert exp.actions[0].text.startswith(HOLD_PHRASE)
        assert isinstance(exp.actions[1], Yield)

    def test_yield_immediately_generates_new_reply(self):
        exp = dispatcher().expand(
            HandlingDecision.YIELD_IMMEDIATELY,
            ctx(overlap="what do you think about adding the pistol to the list?"),
        )
        assert isinstance(exp.actions[0], Yield)
        assert isinstance(exp.actions[1], Speak)
        assert exp.actions[1].resume_token_index is None
        assert "pistol" in exp.actions[1].text

    def test_yield_never_followed_by_resumed_content(self):
        for decision in HandlingDecision:
            exp = dispatcher().expand(decision, ctx(intent=IntentLabel.AGREEMENT))
            yielded = False
            for action in exp.actions:
                if isinstance(action, Yield):
                    yielded = True
                if yielded and isinstance(action, Speak):
                    assert action.resume_token_index is None

    def test_planner_failure_degrades_to_yield(self):
        class FailingPlanner(TemplatePlanner):
            def plan_wrapup(self, req):
                raise PlannerError("boom")

        exp = dispatcher(FailingPlanner()).expand(HandlingDecision.ACK_AND_WRAP_UP, ctx())
        assert exp.actions == [Yield()]
        assert exp.planner_failure == "boom"
