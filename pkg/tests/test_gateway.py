import json

from fastapi.testclient import TestClient

from bargein.gateway import create_app, entry_to_message
from bargein.trace import TraceEntry

# 600 wpm = 0.1 s/word: fast enough for tests, slow enough to barge in
FAST = {"rate_wpm": 600, "floor_s": 0.001}
ROBOT_TEXT = (
    "Let me explain the whole plan now. We pack the flashlight for the night, "
    "the rope for the cliffs, and the mirror for signaling."
)


def client():
    return TestClient(create_app())


def start(ws, session="s1", config=None):
    ws.send_text(json.dumps({
        "type": "session.start", "session": session,
        "payload": {"protocol": 1, "config": {**FAST, **(config or {})}},
    }))


def speak(ws, text, session="s1", final=True):
    ws.send_text(json.dumps({
        "type": "user.speech", "session": session,
        "payload": {"text": text, "final": final},
    }))


def collect_until(ws, predicate, limit=400):
    seen = []
    for _ in range(limit):
        msg = json.loads(ws.receive_text())
        seen.append(msg)
        if predicate(msg):
            return seen
    raise AssertionError(f"no matching message in {limit}; kinds={[m['type'] for m in seen[-20:]]}")


class TestOrdinaryTurn:
    def test_user_turn_streams_robot_reply(self):
        with client().websocket_connect("/ws") as ws:
            start(ws)
            speak(ws, "hello there robot")
            seen = collect_until(ws, lambda m: m["type"] == "robot.plan")
            assert seen[-1]["payload"]["n_words"] > 0
            words = collect_until(ws, lambda m: m["type"] == "robot.word")
            assert words[-1]["payload"]["index"] == 0
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))

    def test_word_indices_strictly_increase_per_turn(self):
        with client().websocket_connect("/ws") as ws:
            start(ws)
            speak(ws, "hello there robot")
            seen = collect_until(
                ws,
                lambda m: m["type"] == "engine.trace"
                and m["payload"]["kind"] == "utterance_complete",
            )
            per_turn: dict = {}
            for msg in seen:
                if msg["type"] == "robot.word":
                    per_turn.setdefault(msg["payload"]["turn_id"], []).append(
                        msg["payload"]["index"]
                    )
            for indices in per_turn.values():
                assert indices == sorted(set(indices))
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))


class TestBargeIn:
    def test_pipeline_message_order_on_overlap(self):
        with client().websocket_connect("/ws") as ws:
            # 0.2 s/word and a long echo reply keep well over 2 s of speech
            # remaining when the barge-in lands
            start(ws, config={"rate_wpm": 300})
            speak(ws, ("walk me through the plan for the desert trip with every "
                       "single item and the reasoning behind each of them"))
            collect_until(ws, lambda m: m["type"] == "robot.word")
            speak(ws, "Yeah")
            seen = collect_until(ws, lambda m: m["type"] == "engine.decision")
            kinds = [m["type"] for m in seen]
            gate_at = kinds.index("engine.gate")
            intent_at = kinds.index("engine.intent")
            assert gate_at < intent_at < kinds.index("engine.decision")
            assert seen[-1]["payload"]["decision"] == "continue"
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))

    def test_stop_mid_stream_yields(self):
        with client().websocket_connect("/ws") as ws:
            start(ws)
            speak(ws, "walk me through the plan")
            collect_until(ws, lambda m: m["type"] == "robot.word")
            speak(ws, "stop")
            seen = collect_until(ws, lambda m: m["type"] == "robot.yield")
            gates = [m for m in seen if m["type"] == "engine.gate"]
            assert gates[-1]["payload"]["outcome"] == "wakeword_yield"
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))


class TestSessionIsolation:
    def test_two_sessions_never_cross_ids(self):
        with client().websocket_connect("/ws") as ws:
            start(ws, session="a")
            start(ws, session="b")
            speak(ws, "hello from the first", session="a")
            speak(ws, "hello from the second", session="b")
            seen_a = collect_until(
                ws,
                lambda m: m["session"] == "a" and m["type"] == "engine.trace"
                and m["payload"]["kind"] == "utterance_complete",
            )
            assert {m["session"] for m in seen_a} <= {"a", "b"}
            for msg in seen_a:
                assert msg["session"] in ("a", "b")
            ws.send_text(json.dumps({"type": "session.end", "session": "a"}))
            ws.send_text(json.dumps({"type": "session.end", "session": "b"}))


class TestProtocolErrors:
    def test_bad_json_keeps_session_alive(self):
        with client().websocket_connect("/ws") as ws:
            start(ws)
            ws.send_text("{not json")
            seen = collect_until(ws, lambda m: m["type"] == "error")
            assert seen[-1]["payload"]["code"] == "bad_json"
            speak(ws, "still works")
            collect_until(ws, lambda m: m["type"] == "robot.plan")
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))

    def test_unknown_session_rejected(self):
        with client().websocket_connect("/ws") as ws:
            speak(ws, "hello", session="ghost")
            seen = collect_until(ws, lambda m: m["type"] == "error")
            assert seen[-1]["payload"]["code"] == "unknown_session"

    def test_bad_config_rejected(self):
        with client().websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({
                "type": "session.start", "session": "s1",
                "payload": {"config": {"bogus_key": 1}},
            }))
            seen = collect_until(ws, lambda m: m["type"] == "error")
            assert seen[-1]["payload"]["code"] == "bad_config"

    def test_missing_session_id_rejected(self):
        with client().websocket_connect("/ws") as ws:
            ws.send_text(json.dumps({"type": "session.start", "payload": {}}))
            seen = collect_until(ws, lambda m: m["type"] == "error")
            assert seen[-1]["payload"]["code"] == "bad_session_id"


class TestGatewayAddsNoLogic:
    def test_wire_session_replays_identically_in_harness(self):
        """Record a live session, rebuild it as a virtual-clock scenario at
        the same relative times, and compare the pipeline sequences."""
        from bargein.scenario import Scenario, ScriptStep, run_scenario

        prompt = ("tell me the whole desert plan with every single item and "
                  "all of the reasoning behind each choice please")
        with client().websocket_connect("/ws") as ws:
            start(ws, config={"rate_wpm": 300})
            speak(ws, prompt)
            plan_msgs = collect_until(ws, lambda m: m["type"] == "robot.plan")
            reply_text = plan_msgs[-1]["payload"]["full_text"]
            collect_until(ws, lambda m: m["type"] == "robot.word")
            speak(ws, "Yeah")
            seen = collect_until(ws, lambda m: m["type"] == "engine.decision")
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))

        onset = next(
            m["payload"]["onset_s"] for m in seen
            if m["type"] == "engine.trace" and m["payload"].get("kind") == "user_event"
            and m["payload"].get("overlap")
        )
        live_pipeline = [
            (m["type"], m["payload"].get("outcome") or m["payload"].get("label")
             or m["payload"].get("decision"))
            for m in seen
            if m["type"] in ("engine.gate", "engine.intent", "engine.decision")
        ]

        scenario = Scenario(
            id="replay",
            config={"rate_wpm": 300, "floor_s": 0.001, "classifier": "rule"},
            script=(
                ScriptStep(kind="robot_turn", text=reply_text),
                ScriptStep(kind="user_event", text="Yeah", at_s=onset),
            ),
        )
        trace = run_scenario(scenario)
        replay_pipeline = []
        for entry in trace:
            if entry.kind == "gate":
                replay_pipeline.append(("engine.gate", entry.payload["outcome"]))
            elif entry.kind == "intent":
                replay_pipeline.append(("engine.intent", entry.payload["label"]))
            elif entry.kind == "decision":
                replay_pipeline.append(("engine.decision", entry.payload["decision"]))
        assert replay_pipeline == live_pipeline


class TestTraceFlush:
    def test_session_end_flushes_trace_to_disk(self, tmp_path):
        app = create_app(trace_dir=str(tmp_path))
        with TestClient(app).websocket_connect("/ws") as ws:
            start(ws)
            speak(ws, "hello there robot")
            collect_until(
                ws,
                lambda m: m["type"] == "engine.trace"
                and m["payload"]["kind"] == "utterance_complete",
            )
            ws.send_text(json.dumps({"type": "session.end", "session": "s1"}))
            collect_until(
                ws,
                lambda m: m["type"] == "engine.trace"
                and m["payload"]["kind"] == "session_end",
            )
        dumped = tmp_path / "s1.ndjson"
        assert dumped.exists()
        lines = dumped.read_text().splitlines()
        assert lines and all(json.loads(line) for line in lines)
        kinds = [json.loads(line)["kind"] for line in lines]
        assert "robot_plan" in kinds and "session_end" in kinds


class TestWireMapping:
    def test_plan_and_word_mapping(self):
        plan = entry_to_message("s", TraceEntry(0.0, "robot_plan", {
            "turn": 1, "utt": 2, "phase": "main", "origin": "engine",
            "text": "Hi there.", "n_words": 2, "resume_from": None,
        }))
        assert plan["type"] == "robot.plan"
        assert plan["payload"]["turn_id"] == 2
        assert plan["payload"]["full_text"] == "Hi there."
        word = entry_to_message("s", TraceEntry(0.5, "robot_word", {
            "turn": 1, "utt": 2, "index": 1, "text": "there.",
        }))
        assert word["type"] == "robot.word"
        assert word["payload"]["t"] == 0.5

    def test_yield_action_maps_to_robot_yield(self):
        entry = TraceEntry(1.0, "action", {"action": {"kind": "yield"}})
        assert entry_to_message("s", entry)["type"] == "robot.yield"

    def test_failure_maps_to_error(self):
        entry = TraceEntry(1.0, "failure", {"stage": "classifier", "error": "x"})
        msg = entry_to_message("s", entry)
        assert msg["type"] == "error"
        assert msg["payload"]["code"] == "engine.classifier_failure"

    def test_every_message_carries_session_id(self):
        for kind, payload in [
            ("gate", {"outcome": "finish_up", "remaining_s": 1.0}),
            ("intent", {"label": "agreement", "source": "rule_based", "latency_s": 0.0}),
            ("session_end", {}),
        ]:
            msg = entry_to_message("sid", TraceEntry(0.0, kind, payload))
            assert msg["session"] == "sid"
