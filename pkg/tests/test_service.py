"""Integration tests for the socket backend and the bridge service.

These exercise real sockets and the real event loop at real rates, so they
use generous timeouts and small sessions.
"""

import asyncio
import json
import time

import pytest
from fastapi.testclient import TestClient

from kinescript import load_package
from kinescript.backend import BackendServer
from kinescript.protocol import decode_telemetry, encode_command, make_command
from kinescript.service import BridgeDaemon, create_app


def test_backend_streams_telemetry_over_sockets(reg):
    async def scenario():
        server = await BackendServer(reg=reg).start()
        try:
            _, cmd_writer = await asyncio.open_connection("127.0.0.1", server.command_port)
            tel_reader, _ = await asyncio.open_connection("127.0.0.1", server.telemetry_port)
            cmd = make_command(0, 2, (1.0, 0.0), (1.0, 0.0), 2.0, 0.78)
            cmd_writer.write(encode_command(cmd))
            await cmd_writer.drain()
            samples = []
            while len(samples) < 15:
                line = await asyncio.wait_for(tel_reader.readline(), timeout=2.0)
                samples.append(decode_telemetry(line))
            return samples
        finally:
            await server.stop()

    samples = asyncio.run(asyncio.wait_for(scenario(), timeout=10.0))
    assert len(samples) == 15
    # tick-counted timestamps: exact 20 ms grid
    deltas = {b.timestamp_ms - a.timestamp_ms for a, b in zip(samples, samples[1:])}
    assert deltas == {20}
    # the run command took effect: mode switched and speed ramping up
    assert samples[-1].mode_index == 2
    assert (samples[-1].base_vel[0] ** 2 + samples[-1].base_vel[1] ** 2) ** 0.5 > 0.1


def test_backend_ignores_garbage_frames(reg):
    async def scenario():
        server = await BackendServer(reg=reg).start()
        try:
            _, cmd_writer = await asyncio.open_connection("127.0.0.1", server.command_port)
            tel_reader, _ = await asyncio.open_connection("127.0.0.1", server.telemetry_port)
            cmd_writer.write(b"{broken\n")
            await cmd_writer.drain()
            line = await asyncio.wait_for(tel_reader.readline(), timeout=2.0)
            return decode_telemetry(line)
        finally:
            await server.stop()

    sample = asyncio.run(asyncio.wait_for(scenario(), timeout=10.0))
    assert sample.timestamp_ms >= 0


@pytest.fixture
def service_client(tmp_path, reg):
    daemon = BridgeDaemon(reg=reg, out_dir=tmp_path / "sessions",
                          event_log=tmp_path / "events.jsonl",
                          record_keyboard=True)
    app = create_app(daemon)
    with TestClient(app) as client:
        yield client, daemon, tmp_path


def recv_until(ws, predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        obj = json.loads(ws.receive_text())
        if predicate(obj):
            return obj
    raise TimeoutError("expected record not received")


class TestBridgeService:
    def test_registry_sent_on_connect(self, service_client):
        client, _, _ = service_client
        with client.websocket_connect("/ws") as ws:
            doc = json.loads(ws.receive_text())
            assert doc["type"] == "registry"
            assert len(doc["modes"]) == 25

    def test_state_broadcast_at_10hz(self, service_client):
        client, _, _ = service_client
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()  # registry
            t0 = time.monotonic()
            states = []
            while len(states) < 5:
                obj = json.loads(ws.receive_text())
                if obj["type"] == "state":
                    states.append(obj)
            elapsed = time.monotonic() - t0
            assert 0.2 < elapsed < 3.0
            assert states[0]["status"] in ("idle", "keyboard")
            assert "heading_deg" in states[0] and "fps" in states[0]

    def test_key_events_drive_state(self, service_client):
        client, _, _ = service_client
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text('{"type":"key_down","key":"Q"}')
            obj = recv_until(ws, lambda o: o.get("type") == "state"
                             and o.get("heading_deg") == 30.0)
            assert obj["heading_deg"] == 30.0
            ws.send_text('{"type":"key_down","key":"W"}')
            obj = recv_until(ws, lambda o: o.get("type") == "state"
                             and o.get("status") == "keyboard")
            assert obj["status"] == "keyboard"

    def test_bad_event_gets_error_record(self, service_client):
        client, _, _ = service_client
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text('{"type":"key_down","key":"Z"}')
            obj = recv_until(ws, lambda o: o.get("type") == "error")
            assert "Z" in obj["message"]

    def test_recipe_dispatch_records_package(self, service_client):
        client, daemon, tmp_path = service_client
        recipe = {"name": "mini", "seed": 3, "segments": [
            {"mode": "Walk", "duration_s": 0.6, "movement": "forward"},
            {"mode": "Walk", "duration_s": 0.6, "movement": "turn_left", "turn_deg": 30.0},
        ]}
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text(json.dumps({"type": "dispatch_recipe", "recipe": recipe}))
            status = recv_until(ws, lambda o: o.get("type") == "recipe_status", timeout=5.0)
            assert status["total"] == 2
            done = recv_until(ws, lambda o: o.get("type") == "recipe_done", timeout=10.0)
        pkg = load_package(done["path"])
        assert len(pkg.segments) == 2
        assert abs(len(pkg.reference) - 60) <= 1  # 1.2 s at 50 Hz
        assert len(pkg.annotations.trajectory) == 17

    def test_event_log_written(self, service_client):
        client, _, tmp_path = service_client
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text('{"type":"key_down","key":"W"}')
            ws.send_text('{"type":"key_up","key":"W"}')
            ws.send_text('{"type":"halt"}')
            recv_until(ws, lambda o: o.get("type") == "state")
        lines = (tmp_path / "events.jsonl").read_text().strip().splitlines()
        kinds = [json.loads(ln)["type"] for ln in lines]
        assert kinds == ["key_down", "key_up", "halt"]

    def test_zero_duration_recipe_rejected(self, service_client):
        client, _, _ = service_client
        bad = {"name": "bad", "seed": 1, "segments": [
            {"mode": "Walk", "duration_s": 0.0, "movement": "forward"}]}
        with client.websocket_connect("/ws") as ws:
            ws.receive_text()
            ws.send_text(json.dumps({"type": "dispatch_recipe", "recipe": bad}))
            obj = recv_until(ws, lambda o: o.get("type") == "error")
            assert "duration" in obj["message"]
