"""Streaming session gateway: the engine behind a websocket, one wall-clock
session per session id, every trace entry mirrored to the client in order.

The gateway adds no decision logic of its own; overlap onset times come from
server-side arrival against the robot's schedule, never from the client.
Protocol reference: PROTOCOL.md.
"""

from __future__ import annotations

import asyncio
import json
import re
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .engine import SessionConfig, SessionEngine
from .trace import TraceEntry

PROTOCOL_VERSION = 1

_SESSION_ID_RE = re.compile(r"^[A-Za-z0-9._-]{1,64}$")


def entry_to_message(session_id: str, entry: TraceEntry) -> dict:
    """Map one trace entry to its wire message."""
    p = entry.payload
    kind = entry.kind
    if kind == "robot_plan":
        msg_type, payload = "robot.plan", {
            "turn_id": p["utt"], "logical_turn": p["turn"],
            "full_text": p["text"], "n_words": p["n_words"],
            "phase": p["phase"], "resume_from": p["resume_from"],
        }
    elif kind == "robot_word":
        msg_type, payload = "robot.word", {
            "turn_id": p["utt"], "index": p["index"], "text": p["text"], "t": entry.t,
        }
    elif kind == "gate":
        msg_type, payload = "engine.gate", {
            "outcome": p["outcome"], "remaining_s": p["remaining_s"],
        }
    elif kind == "intent":
        msg_type, payload = "engine.intent", {"label": p["label"], "source": p["source"]}
    elif kind == "decision":
        msg_type, payload = "engine.decision", dict(p)
    elif kind == "action" and p["action"]["kind"] == "yield":
        msg_type, payload = "robot.yield", {}
    elif kind == "action":
        msg_type, payload = "robot.action", {"action": p["action"]}
    elif kind == "failure":
        msg_type, payload = "error", {
            "code": f"engine.{p['stage']}_failure", "message": p["error"],
        }
    else:
        msg_type, payload = "engine.trace", {"kind": kind, **p}
    return {"type": msg_type, "session": session_id, "t": entry.t, "payload": payload}


class _LiveSession:
    """One engine on the wall clock plus the pump that streams its trace."""

    def __init__(self, session_id: str, config: SessionConfig,
                 websocket: WebSocket, send_lock: asyncio.Lock,
                 trace_dir: str | None):
        self.id = session_id
        self.engine = SessionEngine(config, session_id=session_id)
        self.websocket = websocket
        self.send_lock = send_lock
        self.trace_dir = trace_dir
        self.t0 = time.monotonic()
        self.cursor = 0
        self.waker = asyncio.Event()
        self.closed = False
        self._task: asyncio.Task | None = None

    def now(self) -> float:
        return time.monotonic() - self.t0

    def start(self) -> None:
        self._task = asyncio.create_task(self._pump())

    def wake(self) -> None:
        self.waker.set()

    async def _flush(self) -> None:
        entries = self.engine.trace.entries
        while self.cursor < len(entries):
            message = entry_to_message(self.id, entries[self.cursor])
            self.cursor += 1
            async with self.send_lock:
                await self.websocket.send_text(json.dumps(message, sort_keys=True))

    def _serve_classification(self) -> None:
        pending = self.engine.pending_request()
        if pending is None:
            return
        serial, request, oracle = pending
        self.engine.mark_request_served(serial)
        asyncio.create_task(self._classify(serial, request, oracle))

    async def _classify(self, serial, request, oracle) -> None:
        loop = asyncio.get_running_loop()
        try:
            result = await asyncio.wait_for(
                loop.run_in_executor(
                    None, lambda: self.engine.classifier.classify(request, oracle_intent=oracle)
                ),
                timeout=self.engine.config.classifier_timeout_s,
            )
        except asyncio.TimeoutError:
            self.engine.on_classifier_failure("classifier call timed out", self.now(), serial=serial)
        except Exception as exc:  # classifier bugs must degrade, never crash
            self.engine.on_classifier_failure(str(exc), self.now(), serial=serial)
        else:
            self.engine.on_classifier_result(result, self.now(), serial=serial)
        self.wake()

    async def _pump(self) -> None:
        try:
            while not self.closed:
                self.engine.tick(self.now())
                self._serve_classification()
                await self._flush()
                due = self.engine.next_event_time()
                timeout = None if due is None else max(0.0, due - self.now())
                try:
                    await asyncio.wait_for(self.waker.wait(), timeout)
                except asyncio.TimeoutError:
                    pass
                self.waker.clear()
        except (WebSocketDisconnect, RuntimeError):
            self.closed = True

    async def end(self) -> None:
        """Graceful end: finish the trace, flush it, then stop."""
        self.engine.end_session(self.now())
        try:
            await self._flush()
        except (WebSocketDisconnect, RuntimeError):
            pass
        await self.dispose()

    async def dispose(self) -> None:
        self.closed = True
        self.waker.set()
        if self._task is not None:
            self._task.cancel()
            try:
                await self._task
            except (asyncio.CancelledError, Exception):
                pass
        if self.trace_dir:
            directory = Path(self.trace_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self.engine.trace.write_ndjson(directory / f"{self.id}.ndjson")


def create_app(default_config: SessionConfig | None = None,
               trace_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="bargein gateway")
    defaults = (default_config or SessionConfig()).to_dict()

    async def send_error(websocket: WebSocket, lock: asyncio.Lock,
                         session: str, code: str, message: str) -> None:
        async with lock:
            await websocket.send_text(json.dumps({
                "type": "error", "session": session,
                "payload": {"code": code, "message": message},
            }, sort_keys=True))

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        sessions: dict[str, _LiveSession] = {}
        send_lock = asyncio.Lock()
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await send_error(websocket, send_lock, "", "bad_json",
                                     "message is not valid JSON")
                    continue
                if not isinstance(msg, dict):
                    await send_error(websocket, send_lock, "", "bad_message",
                                     "message must be a JSON object")
                    continue
                msg_type = msg.get("type")
                session_id = msg.get("session", "")
                payload = msg.get("payload") or {}

                if msg_type == "session.start":
                    if not isinstance(session_id, str) or not _SESSION_ID_RE.match(session_id):
                        await send_error(websocket, send_lock, str(session_id),
                                         "bad_session_id",
                                         "session.start requires a short alphanumeric session id")
                        continue
                    if session_id in sessions:
                        await send_error(websocket, send_lock, session_id,
                                         "session_exists", "session id already active")
                        continue
                    # Live sessions converse by default; scripted replay is
                    # the harness's business.
                    merged = {**defaults, "auto_respond": True,
                              **payload.get("config", {})}
                    try:
                        config = SessionConfig.from_dict(merged)
                    except (ValueError, TypeError) as exc:
                        await send_error(websocket, send_lock, session_id,
                                         "bad_config", str(exc))
                        continue
                    live = _LiveSession(session_id, config, websocket, send_lock, trace_dir)
                    sessions[session_id] = live
                    live.start()
                elif msg_type == "user.speech":
                    live = sessions.get(session_id)
                    if live is None:
                        await send_error(websocket, send_lock, session_id,
                                         "unknown_session", "no such session")
                        continue
                    text = payload.get("text", "")
                    final = bool(payload.get("final", True))
                    if not isinstance(text, str):
                        await send_error(websocket, send_lock, session_id,
                                         "bad_payload", "user.speech text must be a string")
                        continue
                    live.engine.on_user_speech(text, live.now(), final=final)
                    live.wake()
                elif msg_type == "session.end":
                    live = sessions.pop(session_id, None)
                    if live is None:
                        await send_error(websocket, send_lock, session_id,
                                         "unknown_session", "no such session")
                        continue
                    await live.end()
                else:
                    await send_error(websocket, send_lock, session_id,
                                     "unknown_type", f"unknown message type {msg_type!r}")
        except WebSocketDisconnect:
            pass
        finally:
            for live in sessions.values():
                await live.dispose()

    return app
