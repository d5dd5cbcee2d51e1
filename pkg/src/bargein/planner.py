"""Response generation behind clarify answers, wrap-up summaries, and
post-yield replies.

A deterministic template implementation is the default; an external
chat-completion client can be swapped in per session. All outputs pass the
same validation; anything invalid becomes a planner failure rather than
emitted speech.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Protocol

from . import llm
from .classify import content_words
from .types import ContractViolation, PlannerError

HOLD_PHRASE = "Let me finish my thought."
WRAPUP_SUMMARY_MAX_WORDS = 30
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


class PlannerKind(Enum):
    CLARIFY_ANSWER = "clarify_answer"
    WRAP_UP = "wrap_up"
    NEW_RESPONSE = "new_response"


@dataclass(frozen=True)
class PlannerRequest:
    kind: PlannerKind
    history_rendered: str = ""
    trigger_text: str = ""
    remaining_text: str = ""

    def __post_init__(self) -> None:
        if self.kind in (PlannerKind.CLARIFY_ANSWER, PlannerKind.NEW_RESPONSE):
            if not self.trigger_text.strip():
                raise ContractViolation(f"{self.kind.value} requires trigger_text")


class ResponsePlanner(Protocol):
    synchronous: bool

    def plan_clarify_answer(self, req: PlannerRequest) -> str: ...
    def plan_wrapup(self, req: PlannerRequest) -> str: ...
    def plan_new_response(self, req: PlannerRequest) -> str: ...


def validate_output(text: str) -> str:
    """Planner outputs must be non-empty single paragraphs free of control
    characters; violations raise PlannerError."""
    if not text or not text.strip():
        raise PlannerError("planner produced empty output")
    if "\n" in text or "\r" in text:
        raise PlannerError("planner output must be a single paragraph")
    if any(ord(c) < 32 for c in text):
        raise PlannerError("planner output contains control characters")
    return text.strip()


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]


def _collapse(text: str) -> str:
    return " ".join(text.split())


class TemplatePlanner:
    """Pure, deterministic templates; identical output on identical input."""

    synchronous = True

    def plan_clarify_answer(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.CLARIFY_ANSWER:
            raise ContractViolation("plan_clarify_answer requires kind=clarify_answer")
        question_words = content_words(req.trigger_text)
        candidates = split_sentences(req.remaining_text)
        for line in reversed(req.history_rendered.splitlines()):
            if line.startswith("Robot:"):
                candidates.extend(split_sentences(line[len("Robot:"):]))
        for sentence in candidates:
            if question_words & content_words(sentence):
                return validate_output(_collapse(sentence))
        last_robot = next(
            (s for s in candidates if s), "let me restate the point."
        )
        return validate_output(f"Good question. Here is the context: {_collapse(last_robot)}")

    def plan_wrapup(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.WRAP_UP:
            raise ContractViolation("plan_wrapup requires kind=wrap_up")
        sentences = split_sentences(req.remaining_text)
        if not sentences:
            return validate_output(HOLD_PHRASE)
        words = _collapse(sentences[0]).split()
        summary = " ".join(words[:WRAPUP_SUMMARY_MAX_WORDS])
        if len(words) > WRAPUP_SUMMARY_MAX_WORDS:
            summary += " ..."
        return validate_output(f"{HOLD_PHRASE} {summary}")

    def plan_new_response(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.NEW_RESPONSE:
            raise ContractViolation("plan_new_response requires kind=new_response")
        trigger = _collapse(req.trigger_text)
        return validate_output(f'I hear you. You said: "{trigger}". Tell me more.')


_EXTERNAL_PROMPTS = {
    PlannerKind.CLARIFY_ANSWER: (
        "You are a conversational agent that was just interrupted by a "
        "clarifying question. Answer the question briefly in one or two "
        "sentences; the agent will resume its planned content afterwards, "
        "so do not repeat it.\n\nConversation:\n{history}\n\n"
        "Still unspoken content: {remaining}\n\nQuestion: {trigger}\n\nAnswer:"
    ),
    PlannerKind.WRAP_UP: (
        "You are a conversational agent interrupted early in its turn and "
        "about to hand over the floor. First state briefly that you want to "
        "finish your thought, then summarize the unspoken content in one or "
        "two sentences.\n\nConversation:\n{history}\n\n"
        "Unspoken content: {remaining}\n\nReply:"
    ),
    PlannerKind.NEW_RESPONSE: (
        "You are a conversational agent. The user just said the following; "
        "reply to it directly in a short paragraph.\n\nConversation:\n"
        "{history}\n\nUser: {trigger}\n\nReply:"
    ),
}


class ExternalPlanner:
    synchronous = False

    def __init__(self, config: llm.LlmConfig):
        self._config = config

    def _generate(self, req: PlannerRequest) -> str:
        prompt = _EXTERNAL_PROMPTS[req.kind].format(
            history=req.history_rendered or "(no prior turns)",
            remaining=req.remaining_text,
            trigger=req.trigger_text,
        )
        try:
            raw = llm.chat_completion(self._config, [{"role": "user", "content": prompt}])
        except llm.LlmError as exc:
            raise PlannerError(str(exc)) from exc
        return validate_output(_collapse(raw))

    def plan_clarify_answer(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.CLARIFY_ANSWER:
            raise ContractViolation("plan_clarify_answer requires kind=clarify_answer")
        return self._generate(req)

    def plan_wrapup(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.WRAP_UP:
            raise ContractViolation("plan_wrapup requires kind=wrap_up")
        text = self._generate(req)
        # The hold phrase is the contract of a wrap-up; prepend when missing.
        if not text.lower().startswith(HOLD_PHRASE.lower().rstrip(".")):
            text = f"{HOLD_PHRASE} {text}"
        return text

    def plan_new_response(self, req: PlannerRequest) -> str:
        if req.kind is not PlannerKind.NEW_RESPONSE:
            raise ContractViolation("plan_new_response requires kind=new_response")
        return self._generate(req)


def make_planner(name: str, llm_config: llm.LlmConfig | None = None) -> ResponsePlanner:
    if name == "template":
        return TemplatePlanner()
    if name == "external":
        if llm_config is None:
            raise ValueError("external planner requires an LLM endpoint configuration")
        return ExternalPlanner(llm_config)
    raise ValueError(f"unknown planner implementation: {name!r}")
