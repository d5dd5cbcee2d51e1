"""Word-level speech schedules: how much is left, what was said, where to resume.

Schedules use uniform per-word durations derived from a words-per-minute rate;
there are no word-level timestamps from a synthesizer, so spoken position is
estimated from the rate and elapsed time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .types import (
    CLAUSE_PUNCTUATION,
    InvalidUtteranceError,
    PlannedUtterance,
    WordToken,
)

# Guards against float accumulation noise when comparing token end times to an
# elapsed time computed along a different arithmetic path.
SCHEDULE_EPS = 1e-9


@dataclass(frozen=True)
class SpeakingRateConfig:
    rate_wpm: float = 150.0
    floor_s: float = 0.05

    def __post_init__(self) -> None:
        if self.rate_wpm <= 0:
            raise ValueError("rate_wpm must be > 0")
        if self.floor_s <= 0:
            raise ValueError("floor_s must be > 0")


def plan_utterance(text: str, cfg: SpeakingRateConfig | None = None) -> PlannedUtterance:
    """Build a uniform word schedule for text at the configured speaking rate.

    Each word lasts 60/rate_wpm seconds (clamped below by floor_s); a token
    ends a clause when its last character is a clause punctuation mark.

    Raises:
        InvalidUtteranceError: for empty or whitespace-only text.
    """
    cfg = cfg or SpeakingRateConfig()
    words = text.split()
    if not words:
        raise InvalidUtteranceError("utterance text is empty")
    word_duration = max(60.0 / cfg.rate_wpm, cfg.floor_s)
    tokens = []
    start = 0.0
    for i, word in enumerate(words):
        tokens.append(
            WordToken(
                text=word,
                index=i,
                start_s=start,
                duration_s=word_duration,
                ends_clause=word[-1] in CLAUSE_PUNCTUATION,
            )
        )
        start += word_duration
    return PlannedUtterance(
        full_text=" ".join(words),
        tokens=tuple(tokens),
        total_duration_s=start,
        rate_wpm=cfg.rate_wpm,
    )


def estimated_spoken_index(plan: PlannedUtterance, elapsed_s: float) -> int:
    """Count of tokens fully spoken by elapsed_s, clamped to [0, n_words]."""
    if elapsed_s < 0:
        raise ValueError("elapsed_s must be >= 0")
    n = 0
    for token in plan.tokens:
        if token.start_s + token.duration_s <= elapsed_s + SCHEDULE_EPS:
            n += 1
        else:
            break
    return n


def remaining_duration(plan: PlannedUtterance, elapsed_s: float) -> float:
    """Seconds of planned speech left at elapsed_s; never negative."""
    if elapsed_s < 0:
        raise ValueError("elapsed_s must be >= 0")
    return max(0.0, plan.total_duration_s - elapsed_s)


def resume_point(plan: PlannedUtterance, elapsed_s: float) -> int:
    """Token index to restart from: just after the last clause boundary
    already spoken, or 0 when no boundary has been passed.

    Repetition of the current clause is deliberate; skipping content is not
    allowed.
    """
    spoken = estimated_spoken_index(plan, elapsed_s)
    for i in range(spoken - 1, -1, -1):
        if plan.tokens[i].ends_clause:
            return i + 1
    return 0


def remaining_text(plan: PlannedUtterance, from_index: int) -> str:
    """Tokens from_index..end joined by single spaces."""
    if not 0 <= from_index <= plan.n_words:
        raise ValueError(f"from_index {from_index} out of range 0..{plan.n_words}")
    return " ".join(t.text for t in plan.tokens[from_index:])


def spoken_text(plan: PlannedUtterance, upto_index: int) -> str:
    """Tokens 0..upto_index-1 joined by single spaces (the spoken prefix)."""
    if not 0 <= upto_index <= plan.n_words:
        raise ValueError(f"upto_index {upto_index} out of range 0..{plan.n_words}")
    return " ".join(t.text for t in plan.tokens[:upto_index])
