"""Session orchestration: UI events in, command stream out, telemetry recorded.

The bridge owns a SessionState per session.  Interactive input mutates it
through apply_ui_event; a scheduler calls tick_command every 50 ms to turn
held keys and slider values into the effective command stream.  Recipes are
executed by run_recipe, a deterministic engine that drives the reference
planner under the virtual clock and passes every frame through the wire
codec, so recorded streams are exactly what a socket transport would carry.

Heading is split into two parts: a snap anchor moved in exact +/-30 degree
quanta by Q/E, and a continuous turn offset accumulated by held A/D keys
and by recipe turn schedules.  The emitted facing direction is their sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import planner
from .annotation import SegmentIntent
from .clock import VirtualClock, WallClock
from .errors import IgnoredDuringRecipe
from .protocol import (MetaCommand, TelemetrySample, UiEvent, decode_command,
                       decode_telemetry, encode_command, encode_telemetry,
                       halt_command, make_command)
from .recipe import Recipe, SegmentSpec, validate_recipe
from .registry import Registry, registry

COMMAND_INTERVAL_MS = 50    # 20 Hz
TELEMETRY_INTERVAL_MS = 20  # 50 Hz
SNAP_DEG = 30
DEFAULT_MODE = 1            # Walk

MOVEMENT_KEYS = ("W", "A", "S", "D", ",", ".")

_KEY_VECTORS = {"W": (1.0, 0.0), "S": (-1.0, 0.0), ",": (0.0, 1.0), ".": (0.0, -1.0)}

_MOVEMENT_VECTORS = {
    "forward": (1.0, 0.0), "backward": (-1.0, 0.0),
    "strafe_left": (0.0, 1.0), "strafe_right": (0.0, -1.0),
    "turn_left": (0.0, 0.0), "turn_right": (0.0, 0.0), "none": (0.0, 0.0),
}


@dataclass(frozen=True)
class SegmentTag:
    """Recorded segment boundary: [start_ms, end_ms) plus the driving intent."""

    index: int
    mode_index: int
    mode_name: str
    start_ms: int
    end_ms: int
    intent: SegmentIntent


class Recording:
    """In-memory session recording; buffered until finalize."""

    def __init__(self, session_id: str = ""):
        self.session_id = session_id
        self.commands: list[MetaCommand] = []
        self.reference: list[TelemetrySample] = []
        self.executed: list[TelemetrySample] = []
        self.tags: list[SegmentTag] = []
        self.dropped = 0
        self.finalized = False

    def add_sample(self, sample: TelemetrySample) -> bool:
        """Append in timestamp order; out-of-order samples are dropped and counted."""
        if self.reference and sample.timestamp_ms <= self.reference[-1].timestamp_ms:
            self.dropped += 1
            return False
        self.reference.append(sample)
        return True

    def finalize(self, tags: list[SegmentTag]) -> "Recording":
        """Attach segment tags and mirror the executed channel.

        The reference backend has no separate physics response, so the
        executed stream equals the reference stream; a physics backend
        would supply its own.
        """
        self.tags = list(tags)
        if not self.executed:
            self.executed = list(self.reference)
        self.finalized = True
        return self


@dataclass
class SessionState:
    """Mutable per-session state owned by a single coordinator task."""

    clock: VirtualClock | WallClock
    reg: Registry = field(default_factory=registry)
    status: str = "idle"  # idle | keyboard | recipe_running | finishing
    held_keys: set[str] = field(default_factory=set)
    heading_snap_deg: int = 0
    turn_offset_rad: float = 0.0
    ui_mode_index: int = DEFAULT_MODE
    ui_speed: float = 0.0
    ui_height: float = 0.0
    recording: Recording | None = None
    latest_sample: TelemetrySample | None = None
    dropped_samples: int = 0

    def __post_init__(self):
        mode = self.reg.mode(self.ui_mode_index)
        if not self.ui_speed:
            self.ui_speed = mode.default_speed
        if not self.ui_height:
            self.ui_height = mode.default_height

    @property
    def heading_target_rad(self) -> float:
        return math.radians(self.heading_snap_deg) + self.turn_offset_rad

    @property
    def heading_target_deg(self) -> float:
        return (self.heading_snap_deg + math.degrees(self.turn_offset_rad)) % 360.0


def apply_ui_event(state: SessionState, ev: UiEvent) -> SessionState:
    """Fold one UI event into the session state.

    Raises IgnoredDuringRecipe for any event that arrives while a recipe
    is executing; recipes cannot be steered or paused mid-run.
    """
    ev.validate()
    if state.status in ("recipe_running", "finishing"):
        raise IgnoredDuringRecipe(f"{ev.kind} ignored while status={state.status}")

    reg = state.reg
    if ev.kind == "key_down":
        key = ev.payload
        if key == "R":
            state.held_keys.clear()
            state.status = "idle"
        elif key == "Q":
            state.heading_snap_deg += SNAP_DEG
        elif key == "E":
            state.heading_snap_deg -= SNAP_DEG
        else:
            state.held_keys.add(key)
            state.status = "keyboard"
    elif ev.kind == "key_up":
        state.held_keys.discard(ev.payload)
    elif ev.kind == "halt":
        state.held_keys.clear()
        state.status = "idle"
    elif ev.kind == "set_mode":
        mode = reg.mode(ev.payload)
        state.ui_mode_index = mode.index
        if mode.supports_speed:
            lo, hi = mode.speed_range
            state.ui_speed = min(max(state.ui_speed, lo), hi)
        else:
            state.ui_speed = mode.default_speed
        if mode.supports_height:
            lo, hi = mode.height_range
            state.ui_height = min(max(state.ui_height, lo), hi)
        else:
            state.ui_height = mode.default_height
    elif ev.kind == "set_speed":
        mode = reg.mode(state.ui_mode_index)
        if mode.supports_speed:
            lo, hi = mode.speed_range
            state.ui_speed = min(max(float(ev.payload), lo), hi)
    elif ev.kind == "set_height":
        mode = reg.mode(state.ui_mode_index)
        if mode.supports_height:
            lo, hi = mode.height_range
            state.ui_height = min(max(float(ev.payload), lo), hi)
    # dispatch_recipe is orchestrated by the service layer, not folded here
    return state


def tick_command(state: SessionState,
                 limits: planner.RateLimits = planner.DEFAULT_LIMITS) -> MetaCommand:
    """Synthesize the effective command for one 20 Hz tick.

    Held A/D keys advance the continuous turn offset at omega_max; W/S and
    the strafe keys form the body-frame movement vector.  The result is
    already clamped against the active mode.
    """
    t_ms = state.clock.now_ms()
    dt = COMMAND_INTERVAL_MS / 1000.0
    if "A" in state.held_keys:
        state.turn_offset_rad += limits.omega_max * dt
    if "D" in state.held_keys:
        state.turn_offset_rad -= limits.omega_max * dt

    theta = state.heading_target_rad
    facing = (math.cos(theta), math.sin(theta))

    if state.status == "idle":
        raw = halt_command(t_ms, state.ui_mode_index, facing, state.ui_height)
    else:
        mx = my = 0.0
        for key, (kx, ky) in _KEY_VECTORS.items():
            if key in state.held_keys:
                mx += kx
                my += ky
        norm = math.hypot(mx, my)
        movement = (mx / norm, my / norm) if norm > 0 else (0.0, 0.0)
        raw = make_command(t_ms, state.ui_mode_index, movement, facing,
                           state.ui_speed, state.ui_height)
    return planner.clamp_command(raw, state.reg)


def on_telemetry(state: SessionState, sample: TelemetrySample) -> None:
    """Ingest one telemetry sample: cache for broadcasts, append to recording."""
    if state.latest_sample is None or sample.timestamp_ms > state.latest_sample.timestamp_ms:
        state.latest_sample = sample
    if state.recording is not None:
        if not state.recording.add_sample(sample):
            state.dropped_samples += 1


def state_record(state: SessionState, fps: float = 0.0) -> dict:
    """The 10 Hz frontend status record."""
    mode = state.reg.mode(state.ui_mode_index)
    return {
        "type": "state",
        "status": state.status,
        "mode": mode.index,
        "mode_name": mode.name,
        "heading_deg": round(state.heading_target_deg, 3),
        "speed": state.ui_speed,
        "height": state.ui_height,
        "fps": round(fps, 1),
    }


# --- recipe execution ----------------------------------------------------------

@dataclass(frozen=True)
class ScheduledSegment:
    """One segment resolved against the registry and placed on the timeline."""

    index: int
    spec: SegmentSpec
    mode_index: int
    start_ms: int
    end_ms: int
    facing_start_rad: float
    facing_rate_rad_per_ms: float

    def facing_at(self, t_ms: int) -> float:
        return self.facing_start_rad + self.facing_rate_rad_per_ms * (t_ms - self.start_ms)


def schedule_recipe(recipe: Recipe, reg: Registry,
                    limits: planner.RateLimits = planner.DEFAULT_LIMITS,
                    facing_start_rad: float = 0.0) -> list[ScheduledSegment]:
    """Place segments on the session timeline with their facing schedules.

    A turn_deg is spread uniformly over its segment; turn movements without
    an explicit angle rotate at omega_max.  The facing target is continuous
    across segment boundaries.
    """
    out: list[ScheduledSegment] = []
    t = 0
    theta = facing_start_rad
    for i, seg in enumerate(recipe.segments):
        duration_ms = round(seg.duration_s * 1000)
        if seg.turn_deg is not None:
            rate = math.radians(seg.turn_deg) / duration_ms
        elif seg.movement == "turn_left":
            rate = limits.omega_max / 1000.0
        elif seg.movement == "turn_right":
            rate = -limits.omega_max / 1000.0
        else:
            rate = 0.0
        mode = reg.mode(seg.mode)
        out.append(ScheduledSegment(
            index=i, spec=seg, mode_index=mode.index,
            start_ms=t, end_ms=t + duration_ms,
            facing_start_rad=theta, facing_rate_rad_per_ms=rate,
        ))
        theta += rate * duration_ms
        t += duration_ms
    return out


def segment_command(scheduled: ScheduledSegment, t_ms: int, reg: Registry) -> MetaCommand:
    """The raw (pre-clamp) command a segment issues at tick time t_ms."""
    seg = scheduled.spec
    mode = reg.mode(scheduled.mode_index)
    theta = scheduled.facing_at(t_ms)
    speed = seg.speed if seg.speed is not None else mode.default_speed
    height = seg.height if seg.height is not None else mode.default_height
    return make_command(
        t_ms, mode.index, _MOVEMENT_VECTORS[seg.movement],
        (math.cos(theta), math.sin(theta)), speed, height,
    )


def segment_intent(scheduled: ScheduledSegment, reg: Registry) -> SegmentIntent:
    """Motion intent of a segment as realized by the effective command stream."""
    seg = scheduled.spec
    mode = reg.mode(scheduled.mode_index)
    effective = planner.clamp_command(segment_command(scheduled, scheduled.start_ms, reg), reg)
    return SegmentIntent(
        mode_index=mode.index,
        movement=seg.movement,
        turn_deg=seg.turn_deg,
        speed=effective.speed,
        duration_s=float(seg.duration_s),
        height=effective.pelvis_height if mode.supports_height else None,
    )


def run_recipe(recipe: Recipe, reg: Registry | None = None,
               limits: planner.RateLimits = planner.DEFAULT_LIMITS,
               session_id: str = "") -> Recording:
    """Execute a recipe under the virtual clock and return the recording.

    Commands are emitted on the exact 50 ms grid and telemetry on the exact
    20 ms grid over [0, total_duration); every frame round-trips through the
    wire codec.  Deterministic: identical (recipe, registry, limits) produce
    identical recordings.
    """
    reg = reg or registry()
    validate_recipe(recipe, reg)
    schedule = schedule_recipe(recipe, reg, limits)
    total_ms = schedule[-1].end_ms

    recording = Recording(session_id or f"{recipe.name}-{recipe.seed:016x}")
    session = SessionState(clock=VirtualClock(), reg=reg)
    session.status = "recipe_running"
    session.recording = recording

    seg_i = 0
    commands: list[MetaCommand] = []
    for t in range(0, total_ms, COMMAND_INTERVAL_MS):
        while t >= schedule[seg_i].end_ms:
            seg_i += 1
        effective = planner.clamp_command(segment_command(schedule[seg_i], t, reg), reg)
        effective = decode_command(encode_command(effective))
        commands.append(effective)
    recording.commands = commands

    state = planner.initial_state(schedule[0].mode_index, reg)
    on_telemetry(session, decode_telemetry(encode_telemetry(planner.snapshot(state))))

    cmd_i = 0
    current = commands[0]
    for t in range(TELEMETRY_INTERVAL_MS, total_ms, TELEMETRY_INTERVAL_MS):
        step_start = t - TELEMETRY_INTERVAL_MS
        while cmd_i + 1 < len(commands) and commands[cmd_i + 1].timestamp_ms <= step_start:
            cmd_i += 1
        current = commands[cmd_i]
        state, sample = planner.step(state, current, planner.DT, reg, limits)
        on_telemetry(session, decode_telemetry(encode_telemetry(sample)))

    tags = [SegmentTag(
        index=s.index, mode_index=s.mode_index, mode_name=reg.mode(s.mode_index).name,
        start_ms=s.start_ms, end_ms=s.end_ms, intent=segment_intent(s, reg),
    ) for s in schedule]
    session.status = "idle"
    return recording.finalize(tags)


# --- keyboard-session segmentation ----------------------------------------------

def _classify_movement(cmd: MetaCommand, prev: MetaCommand | None) -> str:
    mx, my = cmd.movement_dir
    if math.hypot(mx, my) > 0:
        if abs(mx) >= abs(my):
            return "forward" if mx > 0 else "backward"
        return "strafe_left" if my > 0 else "strafe_right"
    if prev is not None:
        prev_theta = math.atan2(prev.facing_dir[1], prev.facing_dir[0])
        theta = math.atan2(cmd.facing_dir[1], cmd.facing_dir[0])
        delta = planner.wrap_pi(theta - prev_theta)
        if abs(delta) > 1e-9:
            return "turn_left" if delta > 0 else "turn_right"
    return "none"


def derive_segments(recording: Recording, reg: Registry | None = None) -> list[SegmentTag]:
    """Segment a keyboard recording by (mode, movement) changes in the
    effective command stream; intent speed is the segment's modal speed."""
    reg = reg or registry()
    if not recording.commands or not recording.reference:
        return []
    labels = []
    prev = None
    for cmd in recording.commands:
        labels.append(_classify_movement(cmd, prev))
        prev = cmd

    end_of_stream = recording.reference[-1].timestamp_ms + TELEMETRY_INTERVAL_MS
    spans: list[tuple[int, int, int, str]] = []  # start, end, mode, movement
    start = recording.reference[0].timestamp_ms
    for i in range(1, len(recording.commands)):
        changed = (recording.commands[i].mode_index != recording.commands[i - 1].mode_index
                   or labels[i] != labels[i - 1])
        if changed:
            t = recording.commands[i].timestamp_ms
            spans.append((start, t, recording.commands[i - 1].mode_index, labels[i - 1]))
            start = t
    spans.append((start, end_of_stream, recording.commands[-1].mode_index, labels[-1]))

    tags = []
    for idx, (s, e, mode_index, movement) in enumerate(spans):
        mode = reg.mode(mode_index)
        in_span = [c for c in recording.commands if s <= c.timestamp_ms < e and c.mode_index == mode_index]
        speeds = [c.speed for c in in_span] or [mode.default_speed]
        modal_speed = max(set(speeds), key=speeds.count)
        turn_deg = None
        if movement in ("turn_left", "turn_right") and len(in_span) >= 2:
            total = 0.0
            for a, b in zip(in_span, in_span[1:]):
                ta = math.atan2(a.facing_dir[1], a.facing_dir[0])
                tb = math.atan2(b.facing_dir[1], b.facing_dir[0])
                total += planner.wrap_pi(tb - ta)
            turn_deg = math.degrees(total)
        tags.append(SegmentTag(
            index=idx, mode_index=mode_index, mode_name=mode.name,
            start_ms=s, end_ms=e,
            intent=SegmentIntent(
                mode_index=mode_index, movement=movement, turn_deg=turn_deg,
                speed=modal_speed, duration_s=(e - s) / 1000.0,
                height=(in_span[0].pelvis_height if in_span and mode.supports_height else None),
            ),
        ))
    return tags
