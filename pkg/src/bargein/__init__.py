"""Interruption handling for conversational agents.

Detects user barge-ins during agent speech, classifies the interrupter's
intent, and executes a handling strategy: continue, acknowledge and continue,
clarify and continue, wrap up, or yield. Ships with a deterministic scenario
replayer, a streaming session gateway, and an interactive console client.
"""

from .classify import (
    ClassifierRequest,
    ClassifierResult,
    ClassifierSource,
    build_prompt,
    classify,
    make_classifier,
    parse_label,
    rule_based_classify,
)
from .dispatch import DispatchConfig, ExpandContext, Expansion, StrategyDispatcher, decide
from .engine import Phase, SessionConfig, SessionEngine, SessionStateName
from .gate import (
    FINISH_UP_THRESHOLD_S,
    GateOutcome,
    GateOutcomeKind,
    WakewordConfig,
    contains_wakeword,
    gate,
)
from .planner import (
    HOLD_PHRASE,
    PlannerKind,
    PlannerRequest,
    TemplatePlanner,
    make_planner,
)
from .scenario import (
    Report,
    Scenario,
    check_expectations,
    load_scenario,
    run_scenario,
    run_suite,
)
from .speech_clock import (
    SpeakingRateConfig,
    estimated_spoken_index,
    plan_utterance,
    remaining_duration,
    remaining_text,
    resume_point,
    spoken_text,
)
from .trace import SessionTrace, TraceEntry
from .types import (
    AnswerClarification,
    BargeInError,
    ClassifierError,
    ContractViolation,
    DialogueHistory,
    HandlingDecision,
    HistoryEntry,
    IntentLabel,
    InvalidUtteranceError,
    Nod,
    OrderingError,
    OverlapEvent,
    PlannedUtterance,
    PlannerError,
    RobotAction,
    ScenarioError,
    Speak,
    Speaker,
    VerbalAck,
    WordToken,
    WrapUpSummary,
    Yield,
    append_turn,
    count_words,
    render_history,
)

__version__ = "0.1.0"
