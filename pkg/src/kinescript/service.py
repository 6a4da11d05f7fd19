"""Live bridge service: WebSocket frontend channel, 20 Hz command scheduler,
50 Hz telemetry ingest, and live recipe execution.

Single process, single event loop.  The scheduler task is the only command
emitter; the telemetry reader is the only recording writer; the session
state is mutated only from the event loop.  Commands and telemetry are
stamped from tick counters, so recorded streams stay on the exact 50/20 ms
grids even though the loops are paced by the wall clock.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from collections import deque
from dataclasses import replace as dc_replace
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse

from . import planner
from .annotation import render_trajectory
from .backend import BackendServer, parse_addr
from .bridge import (COMMAND_INTERVAL_MS, Recording, SegmentTag, SessionState,
                     apply_ui_event, derive_segments, schedule_recipe,
                     segment_command, segment_intent, state_record,
                     tick_command)
from .clock import VirtualClock
from .dataset import write_package
from .errors import (BackendUnavailable, IgnoredDuringRecipe, InvalidRecipe,
                     KinescriptError, MalformedFrame, UnknownMode)
from .protocol import decode_event, decode_telemetry, encode_command, encode_event
from .recipe import Recipe, recipe_from_dict
from .registry import Registry, registry

log = logging.getLogger(__name__)

STATE_BROADCAST_HZ = 10


def _mode_doc(mode) -> dict:
    return {
        "index": mode.index,
        "name": mode.name,
        "group": mode.group,
        "supports_speed": mode.supports_speed,
        "supports_heading": mode.supports_heading,
        "supports_height": mode.supports_height,
        "speed_range": list(mode.speed_range) if mode.speed_range else None,
        "default_speed": mode.default_speed,
        "height_range": list(mode.height_range) if mode.height_range else None,
        "default_height": mode.default_height,
    }


def _rebased(samples, t0: int, limit_ms: int | None = None):
    out = []
    for s in samples:
        t = s.timestamp_ms - t0
        if t < 0 or (limit_ms is not None and t >= limit_ms):
            continue
        out.append(dc_replace(s, timestamp_ms=t))
    return out


class BridgeDaemon:
    """Owns the session, the backend connection, and all periodic tasks."""

    def __init__(self, reg: Registry | None = None,
                 limits: planner.RateLimits = planner.DEFAULT_LIMITS,
                 backend: str = "builtin",
                 command_addr: str = "", telemetry_addr: str = "",
                 record_keyboard: bool = True,
                 out_dir: str | Path = "sessions",
                 seed: int = 0,
                 event_log: str | Path | None = None):
        self.reg = reg or registry()
        self.limits = limits
        self.backend_kind = backend
        self.command_addr = command_addr
        self.telemetry_addr = telemetry_addr
        self.record_keyboard = record_keyboard
        self.out_dir = Path(out_dir)
        self.seed = seed
        self.event_log_path = Path(event_log) if event_log else None

        self.session = SessionState(clock=VirtualClock(), reg=self.reg)
        self.builtin: BackendServer | None = None
        self.ws_clients: set = set()
        self.event_log: list = []

        self._cmd_writer: asyncio.StreamWriter | None = None
        self._tasks: list[asyncio.Task] = []
        self._tick = 0
        self._arrivals: deque[float] = deque(maxlen=100)
        self._recipe: Recipe | None = None
        self._recipe_schedule = None
        self._recipe_tick = 0
        self._recipe_recording: Recording | None = None
        self._keyboard_recording: Recording | None = None
        self._event_log_file = None

    # -- lifecycle --------------------------------------------------------

    async def start(self) -> "BridgeDaemon":
        if self.backend_kind == "builtin":
            self.builtin = await BackendServer(reg=self.reg, limits=self.limits).start()
            cmd_addr = ("127.0.0.1", self.builtin.command_port)
            tel_addr = ("127.0.0.1", self.builtin.telemetry_port)
        else:
            cmd_addr = parse_addr(self.command_addr)
            tel_addr = parse_addr(self.telemetry_addr)
        try:
            _, self._cmd_writer = await asyncio.open_connection(*cmd_addr)
            tel_reader, _ = await asyncio.open_connection(*tel_addr)
        except OSError as e:
            raise BackendUnavailable(f"cannot reach planner backend: {e}") from e

        if self.event_log_path:
            self._event_log_file = open(self.event_log_path, "a", encoding="utf-8")
        if self.record_keyboard:
            self._keyboard_recording = Recording(
                f"keyboard-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%fZ')}")
            self.session.recording = self._keyboard_recording

        self._tasks = [
            asyncio.create_task(self._scheduler()),
            asyncio.create_task(self._telemetry_reader(tel_reader)),
            asyncio.create_task(self._broadcaster()),
        ]
        return self

    async def stop(self) -> None:
        for t in self._tasks:
            t.cancel()
        for t in self._tasks:
            try:
                await t
            except asyncio.CancelledError:
                pass
        if self._keyboard_recording and self._keyboard_recording.commands:
            try:
                path = self._finalize_keyboard()
                log.info("keyboard session written to %s", path)
            except KinescriptError as e:
                log.warning("keyboard session not written: %s", e)
        if self._cmd_writer:
            self._cmd_writer.close()
        if self.builtin:
            await self.builtin.stop()
        if self._event_log_file:
            self._event_log_file.close()

    # -- frontend channel --------------------------------------------------

    def registry_doc(self) -> dict:
        return {"type": "registry", "hash": self.reg.hash,
                "modes": [_mode_doc(m) for m in self.reg.modes]}

    async def handle_event(self, text: str) -> dict | None:
        """Apply one frontend-channel event; returns an error record or None."""
        try:
            ev = decode_event(text)
        except MalformedFrame as e:
            return {"type": "error", "message": str(e)}
        self.event_log.append(ev)
        if self._event_log_file:
            self._event_log_file.write(encode_event(ev) + "\n")
            self._event_log_file.flush()

        if ev.kind == "dispatch_recipe":
            try:
                recipe = recipe_from_dict(ev.payload, self.reg)
                self._start_recipe(recipe)
            except (InvalidRecipe, IgnoredDuringRecipe) as e:
                return {"type": "error", "message": str(e)}
            return None
        try:
            apply_ui_event(self.session, ev)
        except (IgnoredDuringRecipe, UnknownMode, MalformedFrame) as e:
            return {"type": "error", "message": str(e)}
        return None

    async def _broadcast(self, obj: dict) -> None:
        text = json.dumps(obj, separators=(",", ":"))
        for ws in list(self.ws_clients):
            try:
                await ws.send_text(text)
            except Exception:
                self.ws_clients.discard(ws)

    # -- periodic tasks ----------------------------------------------------

    async def _paced(self, interval: float, tick):
        loop = asyncio.get_running_loop()
        next_t = loop.time()
        while True:
            await tick()
            next_t += interval
            delay = next_t - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            elif delay < -1.0:
                next_t = loop.time()

    async def _scheduler(self) -> None:
        async def tick():
            if self._recipe is not None:
                await self._recipe_tick_step()
            else:
                t = self._tick * COMMAND_INTERVAL_MS
                self.session.clock.advance_to(t)
                cmd = tick_command(self.session, self.limits)
                if self._keyboard_recording is not None:
                    self._keyboard_recording.commands.append(cmd)
                self._send_command(cmd)
            self._tick += 1
        await self._paced(COMMAND_INTERVAL_MS / 1000.0, tick)

    def _send_command(self, cmd) -> None:
        if self._cmd_writer and not self._cmd_writer.is_closing():
            self._cmd_writer.write(encode_command(cmd))

    async def _telemetry_reader(self, reader: asyncio.StreamReader) -> None:
        while True:
            line = await reader.readline()
            if not line:
                log.warning("telemetry channel closed by backend")
                return
            try:
                sample = decode_telemetry(line)
            except KinescriptError as e:
                log.warning("dropping bad telemetry frame: %s", e)
                continue
            self._arrivals.append(time.monotonic())
            if self.session.latest_sample is None \
                    or sample.timestamp_ms > self.session.latest_sample.timestamp_ms:
                self.session.latest_sample = sample
            target = self._recipe_recording or self._keyboard_recording
            if target is not None:
                target.add_sample(sample)

    def _fps(self) -> float:
        if len(self._arrivals) < 2:
            return 0.0
        span = self._arrivals[-1] - self._arrivals[0]
        return (len(self._arrivals) - 1) / span if span > 0 else 0.0

    async def _broadcaster(self) -> None:
        async def tick():
            await self._broadcast(state_record(self.session, self._fps()))
            latest = self.session.latest_sample
            if latest is not None:
                await self._broadcast({
                    "type": "trace",
                    "pos": [latest.base_pos[0], latest.base_pos[1]],
                    "heading": latest.heading_rad,
                    "height": latest.pelvis_height,
                    "speed": round((latest.base_vel[0] ** 2 + latest.base_vel[1] ** 2) ** 0.5, 4),
                })
        await self._paced(1.0 / STATE_BROADCAST_HZ, tick)

    # -- recipes ------------------------------------------------------------

    def _start_recipe(self, recipe: Recipe) -> None:
        if self.session.status not in ("idle", "keyboard"):
            raise IgnoredDuringRecipe("a recipe is already running")
        # close the running keyboard recording: its streams would otherwise
        # gap while the recipe owns the command channel
        if self._keyboard_recording and self._keyboard_recording.commands:
            try:
                self._finalize_keyboard()
            except KinescriptError as e:
                log.warning("keyboard session not written: %s", e)
        self._keyboard_recording = None
        self.session.status = "recipe_running"
        self.session.held_keys.clear()
        self._recipe = recipe
        self._recipe_schedule = schedule_recipe(
            recipe, self.reg, self.limits,
            facing_start_rad=self.session.heading_target_rad)
        self._recipe_tick = 0
        self._recipe_recording = Recording(
            f"{recipe.name}-live-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%fZ')}")
        self.session.recording = self._recipe_recording

    async def _recipe_tick_step(self) -> None:
        schedule = self._recipe_schedule
        t = self._recipe_tick * COMMAND_INTERVAL_MS
        if t >= schedule[-1].end_ms:
            await self._finish_recipe()
            return
        seg = next(s for s in schedule if s.start_ms <= t < s.end_ms)
        if t == seg.start_ms or self._recipe_tick == 0:
            await self._broadcast({"type": "recipe_status", "recipe": self._recipe.name,
                                   "active_segment": seg.index, "total": len(schedule),
                                   "t_ms": t})
        cmd = planner.clamp_command(segment_command(seg, t, self.reg), self.reg)
        self._recipe_recording.commands.append(cmd)
        self._send_command(cmd)
        self._recipe_tick += 1

    async def _finish_recipe(self) -> None:
        recipe, schedule = self._recipe, self._recipe_schedule
        recording = self._recipe_recording
        self._recipe = None
        self._recipe_schedule = None
        self.session.status = "finishing"
        total_ms = schedule[-1].end_ms
        await asyncio.sleep(0.1)  # let trailing telemetry arrive
        self._recipe_recording = None
        if self.record_keyboard:
            self._keyboard_recording = Recording(
                f"keyboard-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%fZ')}")
        self.session.recording = self._keyboard_recording
        self.session.status = "idle"
        try:
            if not recording.reference:
                raise BackendUnavailable("no telemetry received during recipe")
            t0 = recording.reference[0].timestamp_ms
            recording.reference = _rebased(recording.reference, t0, total_ms)
            tags = [SegmentTag(index=s.index, mode_index=s.mode_index,
                               mode_name=self.reg.mode(s.mode_index).name,
                               start_ms=s.start_ms, end_ms=s.end_ms,
                               intent=segment_intent(s, self.reg))
                    for s in schedule]
            recording.finalize(tags)
            annotations = render_trajectory([t.intent for t in tags], recipe.seed, self.reg)
            path = self.out_dir / recording.session_id
            write_package(recording, annotations, path, recipe=recipe,
                          backend_name=self._backend_name(),
                          created_at=datetime.now(timezone.utc).isoformat(),
                          reg=self.reg)
            await self._broadcast({"type": "recipe_done", "recipe": recipe.name,
                                   "path": str(path)})
        except KinescriptError as e:
            log.warning("recipe %s not written: %s", recipe.name, e)
            await self._broadcast({"type": "error",
                                   "message": f"recipe recording failed: {e}"})

    def _backend_name(self) -> str:
        return "reference-kinematic" if self.backend_kind == "builtin" else "external"

    def _finalize_keyboard(self) -> Path:
        recording = self._keyboard_recording
        self._keyboard_recording = None
        t0c = recording.commands[0].timestamp_ms
        recording.commands = [dc_replace(c, timestamp_ms=c.timestamp_ms - t0c)
                              for c in recording.commands]
        if not recording.reference:
            raise BackendUnavailable("no telemetry recorded")
        t0s = recording.reference[0].timestamp_ms
        recording.reference = _rebased(recording.reference, t0s)
        tags = derive_segments(recording, self.reg)
        recording.finalize(tags)
        annotations = render_trajectory([t.intent for t in tags], self.seed, self.reg)
        path = self.out_dir / recording.session_id
        write_package(recording, annotations, path,
                      backend_name=self._backend_name(),
                      created_at=datetime.now(timezone.utc).isoformat(),
                      reg=self.reg)
        return path


def create_app(daemon: BridgeDaemon, frontend_dir: str | Path | None = None):
    """FastAPI app exposing the frontend channel at /ws plus static files."""
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(app):
        await daemon.start()
        try:
            yield
        finally:
            await daemon.stop()

    app = FastAPI(lifespan=lifespan)

    @app.websocket("/ws")
    async def ws_channel(ws: WebSocket):
        await ws.accept()
        daemon.ws_clients.add(ws)
        try:
            await ws.send_text(json.dumps(daemon.registry_doc(), separators=(",", ":")))
            while True:
                text = await ws.receive_text()
                err = await daemon.handle_event(text)
                if err is not None:
                    await ws.send_text(json.dumps(err, separators=(",", ":")))
        except WebSocketDisconnect:
            pass
        finally:
            daemon.ws_clients.discard(ws)

    root = Path(frontend_dir) if frontend_dir else None
    if root and (root / "index.html").exists():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=root, html=True), name="frontend")
    else:
        @app.get("/")
        def index():
            return HTMLResponse(
                "<h1>kinescript bridge</h1>"
                "<p>No frontend build found; the WebSocket channel is at "
                "<code>/ws</code>.</p>")
    return app
