import pytest

from bargein.types import (
    OrderingError,
    Speaker,
    append_turn,
    count_words,
    render_history,
)


class TestAppendTurn:
    def test_base_case(self):
        history = append_turn((), Speaker.ROBOT, "Hi", 0.0, complete=True)
        assert len(history) == 1
        assert history[0].speaker is Speaker.ROBOT
        assert history[0].text == "Hi"

    def test_append_keeps_prefix(self):
        history = ()
        for i, text in enumerate(["a", "b", "c"]):
            history = append_turn(history, Speaker.USER, text, float(i))
        before = history
        history = append_turn(history, Speaker.ROBOT, "d", 3.0)
        assert len(history) == 4
        assert history[:3] == before

    def test_out_of_order_rejected(self):
        history = append_turn((), Speaker.USER, "hello", 5.0)
        with pytest.raises(OrderingError):
            append_turn(history, Speaker.ROBOT, "late", 4.0)

    def test_equal_timestamp_allowed(self):
        history = append_turn((), Speaker.USER, "a", 2.0)
        history = append_turn(history, Speaker.ROBOT, "b", 2.0)
        assert len(history) == 2

    def test_append_returns_new_value(self):
        history = append_turn((), Speaker.USER, "a", 0.0)
        append_turn(history, Speaker.USER, "b", 1.0)
        assert len(history) == 1


class TestRenderHistory:
    def test_empty(self):
        assert render_history((), 5) == ""

    def test_windowing(self):
        history = append_turn((), Speaker.USER, "first", 0.0)
        history = append_turn(history, Speaker.ROBOT, "second", 1.0)
        assert render_history(history, 1) == "Robot: second"

    def test_truncation_marker(self):
        history = append_turn((), Speaker.ROBOT, "I was saying", 0.0, complete=False)
        rendered = render_history(history, 10)
        assert rendered == "Robot: I was saying [interrupted]"

    def test_user_turns_never_marked(self):
        history = append_turn((), Speaker.USER, "short", 0.0, complete=False)
        assert "[interrupted]" not in render_history(history, 10)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            render_history((), 0)


def test_count_words_counts_fillers():
    assert count_words("uh, Luna we we don't have time") == 7
    assert count_words("Yeah") == 1
