/**
 * Pure view-state reducer for the console.
 *
 * The console never computes gate outcomes, intents, or decisions locally; it
 * only folds server messages into a renderable state. Every message type has
 * either a visible representation or a line in the debug log.
 */

import type {
  DecisionPayload,
  RobotPlanPayload,
  RobotWordPayload,
  ServerMessage,
} from "./protocol.js";

const CLAUSE_MARKS = new Set([".", ",", "!", "?", ";", ":"]);

export interface WordView {
  index: number;
  text: string;
  endsClause: boolean;
}

export interface RobotUtteranceItem {
  lane: "robot";
  kind: "utterance";
  turnId: number;
  logicalTurn: number;
  phase: string;
  fullText: string;
  nWords: number;
  resumeFrom: number | null;
  words: WordView[];
  status: "speaking" | "complete" | "cut";
}

export interface RobotCueItem {
  lane: "robot";
  kind: "cue";
  text: string;
}

export interface UserMessageItem {
  lane: "user";
  kind: "message";
  text: string;
  overlap: boolean;
  /** Robot word index already streamed when the user sent this; null when idle. */
  atWordIndex: number | null;
  pending: boolean;
}

export type TranscriptItem = RobotUtteranceItem | RobotCueItem | UserMessageItem;

export interface PipelineView {
  gate: string | null;
  intent: string | null;
  intentSource: string | null;
  decision: string | null;
  decisionLabel: string | null;
  via: string | null;
  resumeFrom: number | null;
  degraded: boolean;
}

export interface ViewState {
  connection: "idle" | "connecting" | "connected" | "disconnected";
  floor: "robot" | "user" | "none";
  items: TranscriptItem[];
  pipeline: PipelineView;
  errors: string[];
  log: string[];
}

const DECISION_LABELS: Record<string, string> = {
  continue: "continue",
  ack_and_continue: "ack + continue",
  clarify_and_continue: "clarify + continue",
  ack_and_wrap_up: "hold floor: wrap-up",
  yield_immediately: "yield",
  finish_up: "finish up",
};

export function decisionLabel(decision: string): string {
  return DECISION_LABELS[decision] ?? decision;
}

export function initialState(): ViewState {
  return {
    connection: "idle",
    floor: "none",
    items: [],
    pipeline: {
      gate: null,
      intent: null,
      intentSource: null,
      decision: null,
      decisionLabel: null,
      via: null,
      resumeFrom: null,
      degraded: false,
    },
    errors: [],
    log: [],
  };
}

function endsClause(text: string): boolean {
  return text.length > 0 && CLAUSE_MARKS.has(text[text.length - 1]);
}

export function currentUtterance(state: ViewState): RobotUtteranceItem | null {
  for (let i = state.items.length - 1; i >= 0; i--) {
    const item = state.items[i];
    if (item.lane === "robot" && item.kind === "utterance") {
      return item.status === "speaking" ? item : null;
    }
  }
  return null;
}

function cloneItems(state: ViewState): TranscriptItem[] {
  return state.items.map((item) =>
    item.kind === "utterance" ? { ...item, words: [...item.words] } : { ...item },
  );
}

function withUtterance(
  state: ViewState,
  turnId: number,
  update: (utt: RobotUtteranceItem) => void,
): ViewState {
  const items = cloneItems(state);
  for (let i = items.length - 1; i >= 0; i--) {
    const item = items[i];
    if (item.kind === "utterance" && item.turnId === turnId) {
      update(item);
      break;
    }
  }
  return { ...state, items };
}

/** Record what the user typed before the server echoes it back. */
export function applyLocalEcho(state: ViewState, text: string): ViewState {
  const speaking = currentUtterance(state);
  const echo: UserMessageItem = {
    lane: "user",
    kind: "message",
    text,
    overlap: speaking !== null,
    atWordIndex: speaking ? speaking.words.length - 1 : null,
    pending: true,
  };
  return { ...state, items: [...cloneItems(state), echo] };
}

export function setConnection(
  state: ViewState,
  connection: ViewState["connection"],
): ViewState {
  if (connection === "disconnected") {
    // session state is gone with the socket; keep only the banner
    return { ...initialState(), connection, log: [...state.log, "disconnected"] };
  }
  return { ...state, connection };
}

export function applyServerMessage(state: ViewState, msg: ServerMessage): ViewState {
  switch (msg.type) {
    case "robot.plan": {
      const p = msg.payload as unknown as RobotPlanPayload;
      const item: RobotUtteranceItem = {
        lane: "robot",
        kind: "utterance",
        turnId: p.turn_id,
        logicalTurn: p.logical_turn,
        phase: p.phase,
        fullText: p.full_text,
        nWords: p.n_words,
        resumeFrom: p.resume_from,
        words: [],
        status: "speaking",
      };
      return { ...state, floor: "robot", items: [...cloneItems(state), item] };
    }
    case "robot.word": {
      const p = msg.payload as unknown as RobotWordPayload;
      const next = withUtterance(state, p.turn_id, (utt) => {
        const word: WordView = {
          index: p.index,
          text: p.text,
          endsClause: endsClause(p.text),
        };
        utt.words.push(word);
        utt.words.sort((a, b) => a.index - b.index);
      });
      return { ...next, floor: "robot" };
    }
    case "engine.gate":
      return {
        ...state,
        pipeline: { ...state.pipeline, gate: String(msg.payload.outcome) },
      };
    case "engine.intent":
      return {
        ...state,
        pipeline: {
          ...state.pipeline,
          intent: String(msg.payload.label),
          intentSource: String(msg.payload.source),
        },
      };
    case "engine.decision": {
      const p = msg.payload as unknown as DecisionPayload;
      return {
        ...state,
        pipeline: {
          ...state.pipeline,
          decision: p.decision,
          decisionLabel: decisionLabel(p.decision),
          via: p.via,
          resumeFrom: p.resume_from,
          degraded: p.degraded,
        },
      };
    }
    case "robot.yield":
      return { ...state, floor: "user" };
    case "robot.action": {
      const action = msg.payload.action as Record<string, unknown>;
      const kind = String(action.kind);
      if (kind === "verbal_ack") {
        const cue: RobotCueItem = { lane: "robot", kind: "cue", text: `"${action.token}"` };
        return { ...state, items: [...cloneItems(state), cue] };
      }
      if (kind === "nod") {
        const cue: RobotCueItem = { lane: "robot", kind: "cue", text: "(nods)" };
        return { ...state, items: [...cloneItems(state), cue] };
      }
      // speak / answer_clarification / wrap_up_summary arrive again as
      // robot.plan utterances; log them rather than doubling the lane
      return { ...state, log: [...state.log, `action ${kind}`] };
    }
    case "error":
      return {
        ...state,
        errors: [...state.errors, `${msg.payload.code}: ${msg.payload.message}`],
      };
    case "engine.trace": {
      const kind = String(msg.payload.kind);
      if (kind === "utterance_cut") {
        const next = withUtterance(state, Number(msg.payload.utt), (utt) => {
          utt.status = "cut";
        });
        return { ...next, log: [...next.log, "utterance cut"] };
      }
      if (kind === "utterance_complete") {
        const next = withUtterance(state, Number(msg.payload.utt), (utt) => {
          utt.status = "complete";
        });
        return { ...next, floor: "user" };
      }
      if (kind === "user_event") {
        return confirmUserEcho(
          state,
          String(msg.payload.text),
          Boolean(msg.payload.overlap),
        );
      }
      return { ...state, log: [...state.log, `trace ${kind}`] };
    }
    default:
      return { ...state, log: [...state.log, `unhandled ${msg.type}`] };
  }
}

function confirmUserEcho(state: ViewState, text: string, overlap: boolean): ViewState {
  const items = cloneItems(state);
  const pending = items.find(
    (item): item is UserMessageItem =>
      item.kind === "message" && item.pending && item.text === text,
  );
  if (pending) {
    pending.pending = false;
    pending.overlap = overlap;
  } else {
    items.push({
      lane: "user",
      kind: "message",
      text,
      overlap,
      atWordIndex: null,
      pending: false,
    });
  }
  return { ...state, items };
}
