/**
 * Gateway websocket client: connect, start a session, barge in, tear down.
 * Works in the browser (native WebSocket) and in node tests through an
 * injected socket factory.
 */

import {
  isServerMessage,
  sessionEnd,
  sessionStart,
  userSpeech,
  type ServerMessage,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, listener: (event: any) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

function browserSocketFactory(url: string): SocketLike {
  return new WebSocket(url) as unknown as SocketLike;
}

export function newSessionId(): string {
  return `console-${Date.now().toString(36)}-${Math.floor(Math.random() * 1e6).toString(36)}`;
}

export class GatewayClient {
  readonly endpoint: string;
  readonly sessionId: string;

  private factory: SocketFactory;
  private socket: SocketLike | null = null;
  private messageHandlers: Array<(msg: ServerMessage) => void> = [];
  private statusHandlers: Array<(status: ConnectionStatus) => void> = [];
  private open = false;

  constructor(endpoint: string, sessionId: string = newSessionId(),
              factory: SocketFactory = browserSocketFactory) {
    this.endpoint = endpoint;
    this.sessionId = sessionId;
    this.factory = factory;
  }

  onMessage(handler: (msg: ServerMessage) => void): void {
    this.messageHandlers.push(handler);
  }

  onStatus(handler: (status: ConnectionStatus) => void): void {
    this.statusHandlers.push(handler);
  }

  get isOpen(): boolean {
    return this.open;
  }

  connect(config: Record<string, unknown> = {}): void {
    this.emitStatus("connecting");
    const socket = this.factory(this.endpoint);
    this.socket = socket;
    socket.addEventListener("open", () => {
      this.open = true;
      socket.send(sessionStart(this.sessionId, config));
      this.emitStatus("connected");
    });
    socket.addEventListener("message", (event: { data: unknown }) => {
      let parsed: unknown;
      try {
        parsed = JSON.parse(String(event.data));
      } catch {
        return;
      }
      if (!isServerMessage(parsed)) return;
      // a connection can host several sessions; only ours matters here
      if (parsed.session !== this.sessionId && parsed.session !== "") return;
      for (const handler of this.messageHandlers) handler(parsed);
    });
    socket.addEventListener("close", () => {
      this.open = false;
      this.emitStatus("disconnected");
    });
    socket.addEventListener("error", () => {
      this.open = false;
      this.emitStatus("disconnected");
    });
  }

  /** Send one finalized user utterance; empty input is ignored. */
  bargeIn(text: string): boolean {
    const trimmed = text.trim();
    if (!trimmed || !this.socket || !this.open) return false;
    this.socket.send(userSpeech(this.sessionId, trimmed, true));
    return true;
  }

  endSession(): void {
    if (this.socket && this.open) {
      this.socket.send(sessionEnd(this.sessionId));
    }
  }

  close(): void {
    this.endSession();
    this.socket?.close();
    this.socket = null;
  }

  private emitStatus(status: ConnectionStatus): void {
    for (const handler of this.statusHandlers) handler(status);
  }
}
