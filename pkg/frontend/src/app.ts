/**
 * DOM console: two transcript lanes, a live pipeline panel, and an input box
 * that barges in on Enter. Word streaming is driven purely by server
 * robot.word arrivals, so what you see matches the engine's schedule.
 */

import { GatewayClient, newSessionId, type ConnectionStatus } from "./client.js";
import {
  applyLocalEcho,
  applyServerMessage,
  currentUtterance,
  initialState,
  setConnection,
  type RobotUtteranceItem,
  type ViewState,
} from "./state.js";

export interface ConsoleHandle {
  client: GatewayClient;
  getState(): ViewState;
  bargeIn(text: string): void;
}

export function defaultEndpoint(): string {
  const params = new URLSearchParams(window.location.search);
  const fromQuery = params.get("gateway");
  if (fromQuery) return fromQuery;
  const scheme = window.location.protocol === "https:" ? "wss" : "ws";
  const host = window.location.hostname || "127.0.0.1";
  return `${scheme}://${host}:8700/ws`;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderUtterance(item: RobotUtteranceItem): HTMLElement {
  const bubble = el("div", `utterance phase-${item.phase} status-${item.status}`);
  if (item.resumeFrom !== null) {
    bubble.appendChild(el("span", "badge", `resume @${item.resumeFrom}`));
  }
  const tokens = item.fullText.split(/\s+/);
  const spoken = item.words.length;
  tokens.forEach((token, i) => {
    const word = el("span", i < spoken ? "word spoken" : "word remaining", token);
    if (/[.,!?;:]$/.test(token)) word.classList.add("clause");
    bubble.appendChild(word);
    bubble.appendChild(document.createTextNode(" "));
  });
  if (item.status === "cut") bubble.appendChild(el("span", "badge cut", "[cut]"));
  return bubble;
}

function render(root: HTMLElement, state: ViewState): void {
  const banner = root.querySelector(".banner") as HTMLElement;
  banner.textContent = `gateway: ${state.connection} | floor: ${state.floor}`;
  banner.dataset.connection = state.connection;
  (root.querySelector(".reconnect") as HTMLElement).style.display =
    state.connection === "disconnected" ? "inline-block" : "none";

  const robotLane = root.querySelector(".lane-robot .items") as HTMLElement;
  const userLane = root.querySelector(".lane-user .items") as HTMLElement;
  robotLane.textContent = "";
  userLane.textContent = "";
  for (const item of state.items) {
    if (item.lane === "robot") {
      robotLane.appendChild(
        item.kind === "utterance" ? renderUtterance(item) : el("div", "cue", item.text),
      );
    } else {
      const bubble = el("div", item.overlap ? "message overlap" : "message", item.text);
      if (item.overlap) bubble.appendChild(el("span", "badge", " [overlap]"));
      if (item.pending) bubble.classList.add("pending");
      userLane.appendChild(bubble);
    }
  }

  const panel = root.querySelector(".pipeline") as HTMLElement;
  panel.textContent = "";
  const rows: Array<[string, string]> = [
    ["gate", state.pipeline.gate ?? "-"],
    ["intent", state.pipeline.intent ?? "-"],
    ["decision", state.pipeline.decisionLabel ?? "-"],
    ["resume", state.pipeline.resumeFrom === null ? "-" : `token ${state.pipeline.resumeFrom}`],
  ];
  for (const [name, value] of rows) {
    const row = el("div", `pipeline-row pipeline-${name}`);
    row.appendChild(el("span", "k", name));
    row.appendChild(el("span", "v", value));
    panel.appendChild(row);
  }
  for (const err of state.errors.slice(-3)) {
    panel.appendChild(el("div", "pipeline-error", err));
  }

  robotLane.scrollTop = robotLane.scrollHeight;
  userLane.scrollTop = userLane.scrollHeight;
}

function buildSkeleton(root: HTMLElement): void {
  root.textContent = "";
  root.appendChild(el("div", "banner", "gateway: idle"));
  const reconnect = el("button", "reconnect", "reconnect");
  root.appendChild(reconnect);
  const lanes = el("div", "lanes");
  for (const lane of ["robot", "user"]) {
    const box = el("div", `lane lane-${lane}`);
    box.appendChild(el("div", "lane-title", lane));
    box.appendChild(el("div", "items"));
    lanes.appendChild(box);
  }
  root.appendChild(lanes);
  root.appendChild(el("div", "pipeline"));
  const form = el("div", "composer");
  const input = document.createElement("input");
  input.className = "say";
  input.placeholder = "speak (Enter sends, mid-stream sends barge in)";
  const send = el("button", "send", "send");
  form.appendChild(input);
  form.appendChild(send);
  root.appendChild(form);
}

export function connectAndRun(root: HTMLElement, endpoint: string): ConsoleHandle {
  buildSkeleton(root);
  let state = initialState();
  let client = new GatewayClient(endpoint, newSessionId());

  const repaint = () => render(root, state);

  const wire = (c: GatewayClient) => {
    c.onMessage((msg) => {
      state = applyServerMessage(state, msg);
      // render within the next animation frame of arrival
      if (typeof requestAnimationFrame === "function") {
        requestAnimationFrame(repaint);
      } else {
        repaint();
      }
    });
    c.onStatus((status: ConnectionStatus) => {
      state = setConnection(state, status);
      repaint();
    });
    c.connect();
  };
  wire(client);

  const bargeIn = (text: string) => {
    if (!client.bargeIn(text)) return;
    state = applyLocalEcho(state, text);
    repaint();
  };

  const input = root.querySelector("input.say") as HTMLInputElement;
  const submit = () => {
    bargeIn(input.value);
    input.value = "";
  };
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") submit();
  });
  (root.querySelector("button.send") as HTMLElement).addEventListener("click", submit);
  (root.querySelector("button.reconnect") as HTMLElement).addEventListener("click", () => {
    state = initialState();
    client = new GatewayClient(endpoint, newSessionId());
    wire(client);
    repaint();
  });

  window.addEventListener("beforeunload", () => client.endSession());
  return { client, getState: () => state, bargeIn };
}

declare global {
  interface Window {
    bargeinConsole?: ConsoleHandle;
  }
}

const mount = typeof document !== "undefined" ? document.getElementById("bargein-console") : null;
if (mount) {
  window.bargeinConsole = connectAndRun(mount, defaultEndpoint());
}

export { currentUtterance };
