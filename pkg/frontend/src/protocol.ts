/**
 * Wire types for the gateway protocol (see ../PROTOCOL.md).
 * Single-line JSON messages; every message carries the session id.
 */

export const PROTOCOL_VERSION = 1;

export interface ServerMessage {
  type: string;
  session: string;
  t?: number;
  payload: Record<string, unknown>;
}

export interface RobotPlanPayload {
  turn_id: number;
  logical_turn: number;
  full_text: string;
  n_words: number;
  phase: string;
  resume_from: number | null;
}

export interface RobotWordPayload {
  turn_id: number;
  index: number;
  text: string;
  t: number;
}

export interface DecisionPayload {
  decision: string;
  via: string;
  intent: string | null;
  word_count: number;
  elapsed_s: number;
  degraded: boolean;
  fallback: boolean;
  resume_from: number | null;
}

export function isServerMessage(value: unknown): value is ServerMessage {
  if (typeof value !== "object" || value === null) return false;
  const msg = value as Record<string, unknown>;
  return typeof msg.type === "string" && typeof msg.session === "string";
}

export function sessionStart(session: string, config: Record<string, unknown> = {}): string {
  return JSON.stringify({
    type: "session.start",
    session,
    payload: { protocol: PROTOCOL_VERSION, config },
  });
}

export function userSpeech(session: string, text: string, final = true): string {
  return JSON.stringify({ type: "user.speech", session, payload: { text, final } });
}

export function sessionEnd(session: string): string {
  return JSON.stringify({ type: "session.end", session });
}
