"""Intent classification for overlapping user speech.

Maps (history, overlap transcript, elapsed turn time) to one of four labels:
agreement, assistance, clarification, disruptive. Three interchangeable
implementations: a deterministic rule-based reference (default, offline), an
external chat-completion client, and a fixture oracle for scenario replay.
"""

from __future__ import annotations

import string
import time
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from . import llm
from .types import ClassifierError, ContractViolation, IntentLabel

AGREEMENT_TOKENS = frozenset(
    {"yeah", "okay", "ok", "yes", "right", "sure", "uh-huh", "mm-hmm", "mhm", "yep", "yup"}
)

# Leading token that signals concurrence when nothing in the rest of the
# transcript negates it ("Alright, I'm taking your suggestions").
AGREEMENT_OPENERS = AGREEMENT_TOKENS | frozenset({"alright", "agreed", "exactly", "totally"})

AGREEMENT_PHRASES = (
    "good idea",
    "great idea",
    "good point",
    "i agree",
    "that's right",
    "thats right",
    "makes sense",
    "sounds good",
)

NEGATION_TOKENS = frozenset(
    {"no", "not", "never", "don't", "dont", "can't", "cant", "won't", "wont",
     "isn't", "isnt", "didn't", "didnt", "doesn't", "doesnt", "shouldn't", "shouldnt"}
)

INTERROGATIVES = frozenset(
    {"what", "why", "how", "do", "did", "does", "is", "are", "can", "could", "would"}
)

# Short words and frequent function words excluded from lexical overlap.
STOPWORDS = frozenset(
    {"this", "that", "with", "have", "what", "your", "from", "they", "will",
     "would", "could", "should", "about", "there", "their", "were", "been",
     "being", "into", "also", "than", "then", "them", "these", "those",
     "some", "when", "where", "which", "while", "many", "much", "very",
     "just", "like", "want", "need", "going", "think", "really"}
)

_LABEL_TOKENS = {label.value: label for label in IntentLabel}

LABEL_DEFINITIONS = {
    IntentLabel.AGREEMENT: (
        "the user concurs with or signals understanding of what the agent is "
        "saying, including short backchannels like 'yeah' or 'okay'"
    ),
    IntentLabel.ASSISTANCE: (
        "the user supplies a word, fact, or idea intended to help the agent "
        "complete its current point"
    ),
    IntentLabel.CLARIFICATION: (
        "the user asks the agent to clarify, repeat, or elaborate on something "
        "it is currently saying"
    ),
    IntentLabel.DISRUPTIVE: (
        "the user challenges the agent's hold on the floor: disagreeing, "
        "taking over, changing the subject, or cutting the point short"
    ),
}

EMPTY_HISTORY_MARKER = "(no prior turns)"


class ClassifierSource(Enum):
    RULE_BASED = "rule_based"
    EXTERNAL = "external"
    ORACLE_FIXTURE = "oracle_fixture"


@dataclass(frozen=True)
class ClassifierRequest:
    """Inputs available when an overlap needs classification.

    robot_spoken_text is the estimated already-spoken prefix of the current
    utterance; with robot_remaining_text it gives the spoken/unspoken split.
    """

    history_rendered: str
    overlap_text: str
    elapsed_s: float
    robot_remaining_text: str
    robot_spoken_text: str = ""

    def __post_init__(self) -> None:
        if not self.overlap_text.strip():
            raise ValueError("overlap_text must be non-empty")


@dataclass(frozen=True)
class ClassifierResult:
    label: IntentLabel
    source: ClassifierSource
    latency_s: float = 0.0
    # request/response bodies, carried back for trace logging when enabled
    raw_io: dict | None = None


class ClassifierImpl(Protocol):
    synchronous: bool

    def classify(
        self, req: ClassifierRequest, oracle_intent: IntentLabel | None = None
    ) -> ClassifierResult: ...


def classify(
    req: ClassifierRequest,
    impl: ClassifierImpl,
    oracle_intent: IntentLabel | None = None,
) -> ClassifierResult:
    """Run a classifier implementation; always yields one of the four labels
    or raises ClassifierError for the session engine's fallback to handle."""
    return impl.classify(req, oracle_intent=oracle_intent)


def _clean_tokens(text: str) -> list[str]:
    return [t.strip(string.punctuation) for t in text.lower().split()]


def content_words(text: str) -> set[str]:
    """Tokens of length >= 4 that are not stopwords; crude but deterministic."""
    return {t for t in _clean_tokens(text) if len(t) >= 4 and t not in STOPWORDS}


def _is_agreement(tokens: list[str], text_lower: str) -> bool:
    if any(t in NEGATION_TOKENS for t in tokens):
        return False
    nonempty = [t for t in tokens if t]
    if nonempty and all(t in AGREEMENT_TOKENS for t in nonempty):
        return True
    if nonempty and nonempty[0] in AGREEMENT_OPENERS:
        return True
    return any(phrase in text_lower for phrase in AGREEMENT_PHRASES)


def rule_based_classify(req: ClassifierRequest) -> IntentLabel:
    """Deterministic reference classifier.

    Ordered heuristics: (1) agreement tokens, openers, or agreement phrases
    with no negation; (2) a question that lexically overlaps the robot's
    current content is a clarification; (3) a declarative that overlaps the
    robot's content without negation extends it (assistance); (4) everything
    else is disruptive.
    """
    text = req.overlap_text.strip()
    tokens = _clean_tokens(text)
    text_lower = text.lower()

    if _is_agreement(tokens, text_lower):
        return IntentLabel.AGREEMENT

    robot_context = f"{req.robot_spoken_text} {req.robot_remaining_text}"
    shared = content_words(text) & content_words(robot_context)
    is_question = text.rstrip().endswith("?") or (tokens and tokens[0] in INTERROGATIVES)

    if is_question and shared:
        return IntentLabel.CLARIFICATION
    if not is_question and shared and not any(t in NEGATION_TOKENS for t in tokens):
        return IntentLabel.ASSISTANCE
    return IntentLabel.DISRUPTIVE


def build_prompt(req: ClassifierRequest) -> str:
    """Classification prompt: history, in-progress utterance split into spoken
    and unspoken parts, the overlap, elapsed time, label definitions, and a
    one-token answer instruction."""
    history = req.history_rendered if req.history_rendered.strip() else EMPTY_HISTORY_MARKER
    definitions = "\n".join(
        f"- {label.value}: {desc}" for label, desc in LABEL_DEFINITIONS.items()
    )
    return (
        "You decide why a user spoke over a conversational agent mid-sentence.\n"
        "\n"
        "Conversation so far:\n"
        f"{history}\n"
        "\n"
        "The agent is currently speaking.\n"
        f"Already said: {req.robot_spoken_text or '(nothing yet)'}\n"
        f"Not yet said: {req.robot_remaining_text or '(nothing left)'}\n"
        "\n"
        f"{req.elapsed_s} seconds into the agent's turn, the user said:\n"
        f"{req.overlap_text}\n"
        "\n"
        "Label definitions:\n"
        f"{definitions}\n"
        "\n"
        "Answer with exactly one word: agreement, assistance, clarification, "
        "or disruptive."
    )


def parse_label(raw: str) -> IntentLabel | None:
    """Extract the single label named in raw, case-insensitively.

    Returns None when no label token is present or more than one distinct
    label is mentioned (ambiguous output is a failure, not a guess).
    """
    found = []
    for token in _clean_tokens(raw):
        label = _LABEL_TOKENS.get(token)
        if label is not None and label not in found:
            found.append(label)
    if len(found) == 1:
        return found[0]
    return None


class RuleBasedClassifier:
    synchronous = True
    source = ClassifierSource.RULE_BASED

    def classify(
        self, req: ClassifierRequest, oracle_intent: IntentLabel | None = None
    ) -> ClassifierResult:
        return ClassifierResult(rule_based_classify(req), self.source)


class OracleClassifier:
    """Replays scenario-specified labels; simulation only."""

    synchronous = True
    source = ClassifierSource.ORACLE_FIXTURE

    def classify(
        self, req: ClassifierRequest, oracle_intent: IntentLabel | None = None
    ) -> ClassifierResult:
        if oracle_intent is None:
            raise ContractViolation(
                "oracle classifier requires an oracle_intent on the user event"
            )
        return ClassifierResult(oracle_intent, self.source)


class ExternalClassifier:
    """One chat-completion call per overlap; strict label parsing."""

    synchronous = False
    source = ClassifierSource.EXTERNAL

    def __init__(self, config: llm.LlmConfig, log_io: bool = False):
        self._config = config
        self._log_io = log_io

    def classify(
        self, req: ClassifierRequest, oracle_intent: IntentLabel | None = None
    ) -> ClassifierResult:
        prompt = build_prompt(req)
        started = time.monotonic()
        try:
            raw = llm.chat_completion(self._config, [{"role": "user", "content": prompt}])
        except llm.LlmError as exc:
            raise ClassifierError(str(exc)) from exc
        label = parse_label(raw)
        if label is None:
            raise ClassifierError(f"unparseable classifier output: {raw[:120]!r}")
        return ClassifierResult(
            label,
            self.source,
            latency_s=time.monotonic() - started,
            raw_io={"request": prompt, "response": raw} if self._log_io else None,
        )


def make_classifier(
    name: str, llm_config: llm.LlmConfig | None = None, log_io: bool = False
) -> ClassifierImpl:
    if name == "rule":
        return RuleBasedClassifier()
    if name == "oracle":
        return OracleClassifier()
    if name == "external":
        if llm_config is None:
            raise ValueError("external classifier requires an LLM endpoint configuration")
        return ExternalClassifier(llm_config, log_io=log_io)
    raise ValueError(f"unknown classifier implementation: {name!r}")
