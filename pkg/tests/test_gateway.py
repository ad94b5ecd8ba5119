import asyncio
import dataclasses

import pytest
from fastapi.testclient import TestClient

from vruguard.gateway import _Outbox, create_app
from vruguard.sim import reference_scenarios


def _app(speed=50.0, **overrides):
    spec = dataclasses.replace(reference_scenarios()["track-occlusion"], **overrides)
    return create_app(spec, speed=speed)


def _next_frame(ws):
    while True:
        msg = ws.receive_json()
        if msg["type"] == "frame":
            return msg


def _next_of_type(ws, wanted):
    while True:
        msg = ws.receive_json()
        if msg["type"] in wanted:
            return msg


def test_create_app_rejects_bad_speed():
    with pytest.raises(ValueError):
        _app(speed=0.0)


def test_connect_gets_snapshot_then_advancing_frames():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            first = _next_frame(ws)
            assert first["t_ms"] >= 0
            ids = {e["id"] for e in first["entities"]}
            assert {"car-1", "ped-1", "rsu-1"} <= ids
            times = [first["t_ms"]] + [_next_frame(ws)["t_ms"] for _ in range(5)]
            assert times == sorted(times)
            assert times[-1] > times[0]


def test_frame_carries_tracks_alerts_occluders():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            frame = _next_frame(ws)
            assert "tracks" in frame and "alerts" in frame
            assert len(frame["occluders"]) == 1


def test_set_vehicle_speed_acked_and_applied():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            _next_frame(ws)
            ws.send_json({"type": "cmd", "cmd": "set_vehicle_speed", "id": "car-1", "mps": 3.0})
            reply = _next_of_type(ws, ("ack", "rejected"))
            assert reply["type"] == "ack"
            # reflected within two pacing ticks of the ack
            seen = [_next_frame(ws) for _ in range(2)]
            speeds = [
                e["speed_mps"] for f in seen for e in f["entities"] if e["id"] == "car-1"
            ]
            assert 3.0 in speeds


def test_unknown_entity_rejected_with_reason():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "cmd", "cmd": "set_vehicle_speed", "id": "ghost", "mps": 1.0})
            reply = _next_of_type(ws, ("ack", "rejected"))
            assert reply["type"] == "rejected"
            assert "ghost" in reply["reason"]


def test_negative_speed_rejected():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "cmd", "cmd": "set_vehicle_speed", "id": "car-1", "mps": -2.0})
            reply = _next_of_type(ws, ("ack", "rejected"))
            assert reply["type"] == "rejected"


def test_non_command_message_rejected():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "telemetry", "x": 1})
            reply = _next_of_type(ws, ("ack", "rejected"))
            assert reply["type"] == "rejected"
            assert "cmd" in reply["reason"]


def test_pause_freezes_time_resume_continues():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "cmd", "cmd": "pause"})
            assert _next_of_type(ws, ("ack", "rejected"))["type"] == "ack"
            frames = [_next_frame(ws) for _ in range(4)]
            # frames keep flowing while paused, but the clock holds
            assert frames[-1]["t_ms"] == frames[1]["t_ms"]
            assert frames[1]["paused"] is True
            ws.send_json({"type": "cmd", "cmd": "resume"})
            _next_of_type(ws, ("ack", "rejected"))
            later = [_next_frame(ws) for _ in range(3)]
            assert later[-1]["t_ms"] > frames[-1]["t_ms"]


def test_engine_survives_client_disconnect():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            t_before = _next_frame(ws)["t_ms"]
        with client.websocket_connect("/ws") as ws:
            frames = [_next_frame(ws) for _ in range(3)]
            assert frames[-1]["t_ms"] > t_before


def test_toggle_gnss_fallback_roundtrip():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "cmd", "cmd": "toggle_gnss_fallback", "id": "ped-1", "on": True})
            assert _next_of_type(ws, ("ack", "rejected"))["type"] == "ack"
            engine = client.app.state.engine
            assert engine.entities["ped-1"].fallback_on is True


def test_commands_recorded_in_event_log():
    with TestClient(_app()) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_json({"type": "cmd", "cmd": "pause"})
            _next_of_type(ws, ("ack", "rejected"))
        engine = client.app.state.engine
        kinds = [e.kind for e in engine.events]
        assert "command" in kinds


def test_outbox_keeps_acks_drops_stale_frames():
    async def scenario():
        box = _Outbox()
        box.put_frame({"type": "frame", "t_ms": 100})
        box.put_ack({"type": "ack", "cmd": {"cmd": "pause"}})
        box.put_frame({"type": "frame", "t_ms": 200})
        box.put_frame({"type": "frame", "t_ms": 300})
        first = await box.get()
        second = await box.get()
        return first, second

    first, second = asyncio.run(scenario())
    assert first["type"] == "ack"
    assert second == {"type": "frame", "t_ms": 300}
