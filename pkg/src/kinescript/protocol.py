"""Wire protocol: message types and their newline-delimited JSON framing.

Three channels share the same framing rule: one UTF-8 JSON record per line,
no embedded newlines.  Encoding is canonical -- fixed key order, compact
separators, shortest round-trip float repr -- so equal values always produce
byte-identical frames and recorded streams are diffable.

Channels:
  * command   bridge -> backend   keys: t, mode, move, face, speed, height
  * telemetry backend -> bridge   keys: t, mode, pos, heading, vel, h, phase, joints
  * frontend  browser <-> bridge  JSON objects with a "type" discriminator
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import InvalidCommand, InvalidSample, MalformedFrame

MODE_COUNT = 25

# Keyboard bindings accepted on the frontend channel.
KEY_CODES = ("W", "A", "S", "D", "Q", "E", ",", ".", "R")

UI_EVENT_KINDS = ("key_down", "key_up", "set_mode", "set_speed", "set_height",
                  "dispatch_recipe", "halt")

_UNIT_TOL = 1e-6


def _canon(x: float) -> float:
    """Coerce to float and collapse -0.0 so equal values encode identically."""
    return float(x) + 0.0


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class MetaCommand:
    """One planner command: what to do, which way, how fast, how low.

    movement_dir is in the robot body frame (x forward, y left) and must be
    unit length or exactly zero; facing_dir is a world-frame unit vector.
    """

    timestamp_ms: int
    mode_index: int
    movement_dir: tuple[float, float]
    facing_dir: tuple[float, float]
    speed: float
    pelvis_height: float

    def validate(self) -> "MetaCommand":
        if not _is_int(self.timestamp_ms) or self.timestamp_ms < 0:
            raise InvalidCommand(f"timestamp_ms must be a non-negative int, got {self.timestamp_ms!r}")
        if not _is_int(self.mode_index) or not 0 <= self.mode_index < MODE_COUNT:
            raise InvalidCommand(f"mode_index {self.mode_index!r} outside [0, {MODE_COUNT - 1}]")
        for name, vec in (("movement_dir", self.movement_dir), ("facing_dir", self.facing_dir)):
            if len(vec) != 2 or not all(_finite(c) for c in vec):
                raise InvalidCommand(f"{name} must be a finite 2-vector")
        n_move = math.hypot(*self.movement_dir)
        if not (n_move == 0.0 or abs(n_move - 1.0) <= _UNIT_TOL):
            raise InvalidCommand(f"|movement_dir| = {n_move} must be 0 or 1")
        n_face = math.hypot(*self.facing_dir)
        if abs(n_face - 1.0) > _UNIT_TOL:
            raise InvalidCommand(f"|facing_dir| = {n_face} must be 1")
        if not _finite(self.speed) or self.speed < 0:
            raise InvalidCommand(f"speed {self.speed!r} must be finite and >= 0")
        if not _finite(self.pelvis_height) or self.pelvis_height <= 0:
            raise InvalidCommand(f"pelvis_height {self.pelvis_height!r} must be finite and > 0")
        return self


def make_command(timestamp_ms: int, mode_index: int, movement_dir, facing_dir,
                 speed: float, pelvis_height: float) -> MetaCommand:
    """Build a validated MetaCommand with canonical float fields."""
    cmd = MetaCommand(
        timestamp_ms=timestamp_ms,
        mode_index=mode_index,
        movement_dir=(_canon(movement_dir[0]), _canon(movement_dir[1])),
        facing_dir=(_canon(facing_dir[0]), _canon(facing_dir[1])),
        speed=_canon(speed),
        pelvis_height=_canon(pelvis_height),
    )
    return cmd.validate()


def halt_command(timestamp_ms: int, mode_index: int, facing_dir,
                 pelvis_height: float) -> MetaCommand:
    """Zero-movement, zero-speed command: the idle/halted stream content."""
    return make_command(timestamp_ms, mode_index, (0.0, 0.0), facing_dir, 0.0, pelvis_height)


@dataclass(frozen=True)
class TelemetrySample:
    """One 50 Hz state record emitted by the planner backend."""

    timestamp_ms: int
    mode_index: int
    base_pos: tuple[float, float, float]
    heading_rad: float
    base_vel: tuple[float, float]
    pelvis_height: float
    gait_phase: float
    joints: tuple[float, ...]

    def validate(self) -> "TelemetrySample":
        if not _is_int(self.timestamp_ms) or self.timestamp_ms < 0:
            raise InvalidSample(f"timestamp_ms must be a non-negative int, got {self.timestamp_ms!r}")
        if not _is_int(self.mode_index) or not 0 <= self.mode_index < MODE_COUNT:
            raise InvalidSample(f"mode_index {self.mode_index!r} outside [0, {MODE_COUNT - 1}]")
        if len(self.base_pos) != 3 or not all(_finite(c) for c in self.base_pos):
            raise InvalidSample("base_pos must be a finite 3-vector")
        if not _finite(self.heading_rad) or not (-math.pi < self.heading_rad <= math.pi):
            raise InvalidSample(f"heading_rad {self.heading_rad!r} outside (-pi, pi]")
        if len(self.base_vel) != 2 or not all(_finite(c) for c in self.base_vel):
            raise InvalidSample("base_vel must be a finite 2-vector")
        if not _finite(self.pelvis_height) or self.pelvis_height <= 0:
            raise InvalidSample(f"pelvis_height {self.pelvis_height!r} must be finite and > 0")
        if not _finite(self.gait_phase) or not (0.0 <= self.gait_phase < 1.0):
            raise InvalidSample(f"gait_phase {self.gait_phase!r} outside [0, 1)")
        if not all(_finite(j) for j in self.joints):
            raise InvalidSample("joints must all be finite")
        return self


def make_sample(timestamp_ms: int, mode_index: int, base_pos, heading_rad: float,
                base_vel, pelvis_height: float, gait_phase: float,
                joints=()) -> TelemetrySample:
    """Build a validated TelemetrySample with canonical float fields."""
    sample = TelemetrySample(
        timestamp_ms=timestamp_ms,
        mode_index=mode_index,
        base_pos=tuple(_canon(c) for c in base_pos),
        heading_rad=_canon(heading_rad),
        base_vel=tuple(_canon(c) for c in base_vel),
        pelvis_height=_canon(pelvis_height),
        gait_phase=_canon(gait_phase),
        joints=tuple(_canon(j) for j in joints),
    )
    return sample.validate()


@dataclass(frozen=True)
class UiEvent:
    """One frontend-channel input event; payload shape depends on kind."""

    kind: str
    payload: object = None

    def validate(self) -> "UiEvent":
        if self.kind not in UI_EVENT_KINDS:
            raise MalformedFrame(f"unknown ui event kind {self.kind!r}")
        if self.kind in ("key_down", "key_up") and self.payload not in KEY_CODES:
            raise MalformedFrame(f"key code {self.payload!r} not in binding set {KEY_CODES}")
        if self.kind == "set_mode" and (not _is_int(self.payload) or self.payload < 0):
            raise MalformedFrame(f"set_mode payload must be a mode index, got {self.payload!r}")
        if self.kind in ("set_speed", "set_height") and not _finite(self.payload):
            raise MalformedFrame(f"{self.kind} payload must be a finite number")
        return self


# --- framing -----------------------------------------------------------------

def _dumps(obj: dict) -> bytes:
    return (json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def _loads(frame) -> dict:
    if isinstance(frame, bytes):
        try:
            frame = frame.decode("utf-8")
        except UnicodeDecodeError as e:
            raise MalformedFrame(f"frame is not UTF-8: {e}") from e
    body = frame.strip("\r\n")
    if "\n" in body:
        raise MalformedFrame("frame contains an embedded newline")
    try:
        obj = json.loads(body)
    except (json.JSONDecodeError, ValueError) as e:
        raise MalformedFrame(f"frame is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise MalformedFrame("frame must be a JSON object")
    return obj


def _require_keys(obj: dict, keys: tuple[str, ...]) -> None:
    missing = [k for k in keys if k not in obj]
    extra = [k for k in obj if k not in keys]
    if missing or extra:
        raise MalformedFrame(f"bad record keys: missing={missing} extra={extra}")


def _num_list(obj, name: str) -> list[float]:
    if not isinstance(obj, list) or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in obj):
        raise MalformedFrame(f"{name} must be an array of numbers")
    return [float(c) for c in obj]


_COMMAND_KEYS = ("t", "mode", "move", "face", "speed", "height")
_TELEMETRY_KEYS = ("t", "mode", "pos", "heading", "vel", "h", "phase", "joints")


def encode_command(cmd: MetaCommand) -> bytes:
    """Encode a command as one canonical wire frame (UTF-8 line)."""
    cmd.validate()
    return _dumps({
        "t": cmd.timestamp_ms,
        "mode": cmd.mode_index,
        "move": [_canon(c) for c in cmd.movement_dir],
        "face": [_canon(c) for c in cmd.facing_dir],
        "speed": _canon(cmd.speed),
        "height": _canon(cmd.pelvis_height),
    })


def decode_command(frame) -> MetaCommand:
    """Decode one command frame; inverse of encode_command on its image."""
    obj = _loads(frame)
    _require_keys(obj, _COMMAND_KEYS)
    if not _is_int(obj["t"]) or not _is_int(obj["mode"]):
        raise MalformedFrame("t and mode must be integers")
    move = _num_list(obj["move"], "move")
    face = _num_list(obj["face"], "face")
    if len(move) != 2 or len(face) != 2:
        raise MalformedFrame("move and face must be 2-arrays")
    if not isinstance(obj["speed"], (int, float)) or not isinstance(obj["height"], (int, float)):
        raise MalformedFrame("speed and height must be numbers")
    return MetaCommand(
        timestamp_ms=obj["t"],
        mode_index=obj["mode"],
        movement_dir=(move[0], move[1]),
        facing_dir=(face[0], face[1]),
        speed=float(obj["speed"]),
        pelvis_height=float(obj["height"]),
    ).validate()


def encode_telemetry(sample: TelemetrySample) -> bytes:
    """Encode a telemetry sample as one canonical wire frame."""
    sample.validate()
    return _dumps({
        "t": sample.timestamp_ms,
        "mode": sample.mode_index,
        "pos": [_canon(c) for c in sample.base_pos],
        "heading": _canon(sample.heading_rad),
        "vel": [_canon(c) for c in sample.base_vel],
        "h": _canon(sample.pelvis_height),
        "phase": _canon(sample.gait_phase),
        "joints": [_canon(j) for j in sample.joints],
    })


def decode_telemetry(frame) -> TelemetrySample:
    """Decode one telemetry frame; inverse of encode_telemetry on its image."""
    obj = _loads(frame)
    _require_keys(obj, _TELEMETRY_KEYS)
    if not _is_int(obj["t"]) or not _is_int(obj["mode"]):
        raise MalformedFrame("t and mode must be integers")
    pos = _num_list(obj["pos"], "pos")
    vel = _num_list(obj["vel"], "vel")
    joints = _num_list(obj["joints"], "joints")
    if len(pos) != 3 or len(vel) != 2:
        raise MalformedFrame("pos must be a 3-array and vel a 2-array")
    for key in ("heading", "h", "phase"):
        if not isinstance(obj[key], (int, float)) or isinstance(obj[key], bool):
            raise MalformedFrame(f"{key} must be a number")
    return TelemetrySample(
        timestamp_ms=obj["t"],
        mode_index=obj["mode"],
        base_pos=(pos[0], pos[1], pos[2]),
        heading_rad=float(obj["heading"]),
        base_vel=(vel[0], vel[1]),
        pelvis_height=float(obj["h"]),
        gait_phase=float(obj["phase"]),
        joints=tuple(joints),
    ).validate()


# --- frontend channel ---------------------------------------------------------

_EVENT_PAYLOAD_KEY = {
    "key_down": "key", "key_up": "key",
    "set_mode": "mode", "set_speed": "value", "set_height": "value",
    "dispatch_recipe": "recipe",
}


def encode_event(ev: UiEvent) -> str:
    """Encode a UI event as a frontend-channel text frame."""
    ev.validate()
    obj = {"type": ev.kind}
    key = _EVENT_PAYLOAD_KEY.get(ev.kind)
    if key is not None:
        obj[key] = ev.payload
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def decode_event(text) -> UiEvent:
    """Decode a frontend-channel text frame into a UiEvent."""
    obj = _loads(text)
    kind = obj.get("type")
    if kind not in UI_EVENT_KINDS:
        raise MalformedFrame(f"unknown ui event type {kind!r}")
    key = _EVENT_PAYLOAD_KEY.get(kind)
    payload = obj.get(key) if key is not None else None
    return UiEvent(kind=kind, payload=payload).validate()
