"""First stage of overlap handling: wakeword override and end-of-turn rule.

Both checks run before any intent classification. The wakeword check always
wins; overlaps near the end of the robot's turn are ignored (finish-up)
because overlapping speech during floor exchange is normal, not interruption.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from enum import Enum

from .speech_clock import remaining_duration
from .types import ContractViolation, OverlapEvent, PlannedUtterance

# Overlaps with strictly less than this much planned speech left are ignored.
FINISH_UP_THRESHOLD_S = 2.0

_STRIP_CHARS = string.punctuation


class GateOutcomeKind(Enum):
    WAKEWORD_YIELD = "wakeword_yield"
    FINISH_UP = "finish_up"
    NEEDS_CLASSIFICATION = "needs_classification"


@dataclass(frozen=True)
class GateOutcome:
    kind: GateOutcomeKind
    overlap: OverlapEvent | None = None


@dataclass(frozen=True)
class WakewordConfig:
    """Lowercase single-token wakewords; defaults to the agent's name plus
    the universal "stop"."""

    wakewords: frozenset[str] = field(default_factory=lambda: frozenset({"luna", "stop"}))

    def __post_init__(self) -> None:
        if not self.wakewords:
            raise ValueError("wakeword set must be non-empty")
        for w in self.wakewords:
            if not w or w != w.lower() or len(w.split()) != 1:
                raise ValueError(f"wakewords must be single lowercase tokens, got {w!r}")


def contains_wakeword(transcript: str, cfg: WakewordConfig) -> bool:
    """Whole-token wakeword match on the lowercased, punctuation-stripped
    transcript. "Luna," matches "luna"; "lunar" does not."""
    for raw in transcript.lower().split():
        if raw.strip(_STRIP_CHARS) in cfg.wakewords:
            return True
    return False


def gate(
    overlap: OverlapEvent,
    plan: PlannedUtterance,
    elapsed_s: float,
    cfg: WakewordConfig,
) -> GateOutcome:
    """Route an overlap heard mid-utterance.

    Wakeword first (it always forces a yield), then the end-of-turn rule
    (strictly less than two seconds left means finish-up), else the overlap
    needs intent classification.

    Raises:
        ContractViolation: if called while the robot is not mid-utterance or
            with a non-final transcript.
    """
    if not overlap.is_final:
        raise ContractViolation("gate only accepts finalized transcripts")
    if elapsed_s >= plan.total_duration_s:
        raise ContractViolation("gate called while robot is not mid-utterance")
    if contains_wakeword(overlap.transcript, cfg):
        return GateOutcome(GateOutcomeKind.WAKEWORD_YIELD)
    if remaining_duration(plan, elapsed_s) < FINISH_UP_THRESHOLD_S:
        return GateOutcome(GateOutcomeKind.FINISH_UP)
    return GateOutcome(GateOutcomeKind.NEEDS_CLASSIFICATION, overlap=overlap)
