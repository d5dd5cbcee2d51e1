"""Shared domain vocabulary: turns, utterances, events, labels, decisions, history.

Everything here is an immutable value; history updates return new tuples.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

# Punctuation marks that close a clause; commas included because resumption
# is clause-grained, not sentence-grained.
CLAUSE_PUNCTUATION = frozenset({".", ",", "!", "?", ";", ":"})

# Suffix appended to truncated robot turns in rendered history so classifiers
# can see which turns were cut off.
TRUNCATION_MARKER = "[interrupted]"


class BargeInError(Exception):
    """Base class for all errors raised by this package."""


class OrderingError(BargeInError):
    """A history append went backwards in time."""


class InvalidUtteranceError(BargeInError):
    """Robot speech text was empty or whitespace-only."""


class ContractViolation(BargeInError):
    """An operation was called in a state its contract forbids."""


class ClassifierError(BargeInError):
    """The intent classifier timed out or produced unusable output."""


class PlannerError(BargeInError):
    """The response planner failed or produced invalid text."""


class ScenarioError(BargeInError):
    """A scenario file failed to parse or validate."""


class IntentLabel(Enum):
    """Interrupter intent. Backchannels are Agreement with word_count <= 2."""

    AGREEMENT = "agreement"
    ASSISTANCE = "assistance"
    CLARIFICATION = "clarification"
    DISRUPTIVE = "disruptive"


class HandlingDecision(Enum):
    """Strategy chosen for an overlap, including the two gate early-exits."""

    FINISH_UP = "finish_up"
    YIELD_IMMEDIATELY = "yield_immediately"
    CONTINUE = "continue"
    ACK_AND_CONTINUE = "ack_and_continue"
    CLARIFY_AND_CONTINUE = "clarify_and_continue"
    ACK_AND_WRAP_UP = "ack_and_wrap_up"


class Speaker(Enum):
    USER = "User"
    ROBOT = "Robot"


@dataclass(frozen=True)
class WordToken:
    """One scheduled word of robot speech."""

    text: str
    index: int
    start_s: float
    duration_s: float
    ends_clause: bool


@dataclass(frozen=True)
class PlannedUtterance:
    """Robot speech as a contiguous word-level schedule."""

    full_text: str
    tokens: tuple[WordToken, ...]
    total_duration_s: float
    rate_wpm: float

    @property
    def n_words(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class OverlapEvent:
    """Finalized user speech that arrived while the robot was talking.

    onset_s is measured from the start of the robot's current logical turn.
    oracle_intent is a scenario-only annotation consumed by the fixture
    classifier; live classifiers ignore it.
    """

    transcript: str
    onset_s: float
    word_count: int
    is_final: bool = True
    oracle_intent: IntentLabel | None = None


@dataclass(frozen=True)
class HistoryEntry:
    speaker: Speaker
    text: str
    start_s: float
    complete: bool = True


DialogueHistory = tuple[HistoryEntry, ...]


def count_words(text: str) -> int:
    """Whitespace token count; fillers like "uh" count as words."""
    return len(text.split())


def append_turn(
    history: DialogueHistory,
    speaker: Speaker,
    text: str,
    start_s: float,
    complete: bool = True,
) -> DialogueHistory:
    """Return a new history with one entry appended.

    Raises:
        OrderingError: if start_s precedes the last recorded timestamp.
    """
    if history and start_s < history[-1].start_s:
        raise OrderingError(
            f"history append at {start_s:.3f}s precedes last entry at "
            f"{history[-1].start_s:.3f}s"
        )
    return history + (HistoryEntry(speaker, text, start_s, complete),)


def render_history(history: DialogueHistory, max_turns: int = 10) -> str:
    """Render the last max_turns entries, one "Speaker: text" line each.

    Truncated robot turns carry the truncation marker.
    """
    if max_turns < 1:
        raise ValueError("max_turns must be >= 1")
    lines = []
    for entry in history[-max_turns:]:
        line = f"{entry.speaker.value}: {entry.text}"
        if entry.speaker is Speaker.ROBOT and not entry.complete:
            line += f" {TRUNCATION_MARKER}"
        lines.append(line)
    return "\n".join(lines)


# --- Robot actions -----------------------------------------------------------


@dataclass(frozen=True)
class Speak:
    """Speak text; resume_token_index marks resumed planned content (None for
    fresh turns such as post-yield responses)."""

    text: str
    resume_token_index: int | None = None


@dataclass(frozen=True)
class VerbalAck:
    token: str


@dataclass(frozen=True)
class Nod:
    pass


@dataclass(frozen=True)
class Yield:
    pass


@dataclass(frozen=True)
class AnswerClarification:
    text: str


@dataclass(frozen=True)
class WrapUpSummary:
    text: str


RobotAction = Union[Speak, VerbalAck, Nod, Yield, AnswerClarification, WrapUpSummary]


def action_to_dict(action: RobotAction) -> dict:
    """JSON-safe representation used in traces and on the wire."""
    if isinstance(action, Speak):
        return {
            "kind": "speak",
            "text": action.text,
            "resume_token_index": action.resume_token_index,
        }
    if isinstance(action, VerbalAck):
        return {"kind": "verbal_ack", "token": action.token}
    if isinstance(action, Nod):
        return {"kind": "nod"}
    if isinstance(action, Yield):
        return {"kind": "yield"}
    if isinstance(action, AnswerClarification):
        return {"kind": "answer_clarification", "text": action.text}
    if isinstance(action, WrapUpSummary):
        return {"kind": "wrap_up_summary", "text": action.text}
    raise TypeError(f"unknown action type: {type(action)!r}")
