import pytest
from hypothesis import given, strategies as st

from bargein.speech_clock import (
    SpeakingRateConfig,
    estimated_spoken_index,
    plan_utterance,
    remaining_duration,
    remaining_text,
    resume_point,
    spoken_text,
)
from bargein.types import InvalidUtteranceError

WORDS = st.lists(
    st.sampled_from(["alpha", "beta", "gamma,", "delta.", "rain", "knife!", "go;"]),
    min_size=1,
    max_size=40,
)


def plan_of(words, wpm=150.0):
    return plan_utterance(" ".join(words), SpeakingRateConfig(rate_wpm=wpm))


class TestPlanUtterance:
    def test_three_words_at_120(self):
        plan = plan_utterance("Hello there, friend.", SpeakingRateConfig(rate_wpm=120))
        assert plan.n_words == 3
        assert all(t.duration_s == 0.5 for t in plan.tokens)
        assert plan.total_duration_s == pytest.approx(1.5)
        assert [t.ends_clause for t in plan.tokens] == [False, True, True]

    def test_single_word(self):
        plan = plan_utterance("Yes.", SpeakingRateConfig(rate_wpm=60))
        assert plan.n_words == 1
        assert plan.tokens[0].duration_s == 1.0
        assert plan.tokens[0].ends_clause

    def test_twenty_words_at_150(self):
        plan = plan_of(["word"] * 20)
        assert plan.total_duration_s == pytest.approx(8.0)

    def test_empty_rejected(self):
        with pytest.raises(InvalidUtteranceError):
            plan_utterance("   ")

    def test_floor_clamps_duration(self):
        plan = plan_utterance("a b", SpeakingRateConfig(rate_wpm=100000, floor_s=0.05))
        assert all(t.duration_s == 0.05 for t in plan.tokens)

    def test_bad_config(self):
        with pytest.raises(ValueError):
            SpeakingRateConfig(rate_wpm=0)
        with pytest.raises(ValueError):
            SpeakingRateConfig(floor_s=0)


class TestEstimatedSpokenIndex:
    def test_zero_elapsed(self):
        assert estimated_spoken_index(plan_of(["w"] * 5), 0.0) == 0

    def test_halfway(self):
        # 20 words at 150 wpm is 0.4 s/word; 4.0 s covers 10 words
        assert estimated_spoken_index(plan_of(["w"] * 20), 4.0) == 10

    def test_clamped_at_end(self):
        plan = plan_of(["w"] * 7)
        assert estimated_spoken_index(plan, plan.total_duration_s + 100) == 7

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            estimated_spoken_index(plan_of(["w"]), -0.1)


class TestRemainingDuration:
    def test_subtraction(self):
        plan = plan_of(["w"] * 20)  # 8.0 s total
        assert remaining_duration(plan, 6.5) == pytest.approx(1.5)

    def test_zero_elapsed(self):
        plan = plan_of(["w"] * 20)
        assert remaining_duration(plan, 0.0) == plan.total_duration_s

    def test_clamped(self):
        plan = plan_of(["w"] * 3)
        assert remaining_duration(plan, 100.0) == 0.0


class TestResumePoint:
    def test_after_clause_boundary(self):
        # boundary at token 4; elapsed covers 7 tokens -> resume at 5
        words = ["a", "b", "c", "d", "e,", "f", "g", "h", "i"]
        words[4] = "e,"
        plan = plan_utterance(" ".join(words), SpeakingRateConfig(rate_wpm=120))
        elapsed = 7 * 0.5
        assert estimated_spoken_index(plan, elapsed) == 7
        assert resume_point(plan, elapsed) == 5

    def test_nothing_spoken(self):
        plan = plan_of(["a.", "b"])
        assert resume_point(plan, 0.0) == 0

    def test_no_punctuation_falls_back_to_start(self):
        plan = plan_of(["w"] * 15)
        assert resume_point(plan, plan.total_duration_s) == 0


class TestRemainingText:
    def test_from_zero_is_full_text(self):
        plan = plan_utterance("A,  b   c. d e")
        assert remaining_text(plan, 0) == plan.full_text == "A, b c. d e"

    def test_from_end_is_empty(self):
        plan = plan_utterance("a b c")
        assert remaining_text(plan, 3) == ""

    def test_from_resume_point(self):
        plan = plan_utterance("A, b c. d e", SpeakingRateConfig(rate_wpm=120))
        elapsed = 4 * 0.5  # covers "A, b c. d"
        assert remaining_text(plan, resume_point(plan, elapsed)) == "d e"

    def test_out_of_range(self):
        plan = plan_utterance("a b")
        with pytest.raises(ValueError):
            remaining_text(plan, 3)


class TestScheduleInvariants:
    @given(WORDS, st.floats(min_value=40, max_value=400))
    def test_contiguous_schedule(self, words, wpm):
        plan = plan_of(words, wpm)
        for prev, cur in zip(plan.tokens, plan.tokens[1:]):
            assert cur.start_s == prev.start_s + prev.duration_s
        assert plan.total_duration_s == sum(t.duration_s for t in plan.tokens)
        assert [t.index for t in plan.tokens] == list(range(len(words)))

    @given(WORDS)
    def test_token_join_round_trip(self, words):
        text = " ".join(words)
        plan = plan_utterance(text)
        assert " ".join(t.text for t in plan.tokens) == " ".join(text.split())

    @given(WORDS, st.lists(st.floats(min_value=0, max_value=30), min_size=2, max_size=10))
    def test_monotone_in_elapsed(self, words, times):
        plan = plan_of(words)
        times = sorted(times)
        indices = [estimated_spoken_index(plan, t) for t in times]
        assert indices == sorted(indices)
        spoken_amounts = [plan.total_duration_s - remaining_duration(plan, t) for t in times]
        assert spoken_amounts == sorted(spoken_amounts)

    @given(WORDS, st.floats(min_value=0, max_value=30))
    def test_resume_never_skips(self, words, elapsed):
        plan = plan_of(words)
        resume = resume_point(plan, elapsed)
        spoken = estimated_spoken_index(plan, elapsed)
        assert resume <= spoken
        # resume lands on a clause boundary or at the very start
        assert resume == 0 or plan.tokens[resume - 1].ends_clause

    @given(WORDS, st.floats(min_value=0, max_value=30))
    def test_coverage(self, words, elapsed):
        plan = plan_of(words)
        resume = resume_point(plan, elapsed)
        covered = spoken_text(plan, resume).split() + remaining_text(plan, resume).split()
        assert covered == [t.text for t in plan.tokens]
