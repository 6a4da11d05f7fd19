"""Reference kinematic backend.

Turns the clamped command stream into a continuous base trajectory with a
fixed-step Euler integrator at 50 Hz.  All realized quantities are rate
limited -- heading by omega_max, planar velocity by a_max (as a vector, so
direction changes are as smooth as speed changes), pelvis height by h_rate --
which is what makes mode switches state-continuous: a new mode simply
retargets the limits from the current state.

The integrator has no joint model; telemetry carries an empty joints vector
and a synthetic cyclic gait phase driven by each mode's gait_frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import WindowTooShort
from .protocol import MetaCommand, TelemetrySample, make_command, make_sample
from .registry import ModeSpec, Registry, registry

DT = 1.0 / 50.0


@dataclass(frozen=True)
class RateLimits:
    """Configurable realization limits; defaults keep 50 Hz transitions smooth."""

    omega_max: float = 1.5   # rad/s, heading rotation
    a_max: float = 2.0       # m/s^2, planar velocity vector
    h_rate: float = 0.5      # m/s, pelvis height
    t_blend: float = 0.5     # s, bookkeeping window after a mode switch


DEFAULT_LIMITS = RateLimits()


@dataclass(frozen=True)
class PlannerState:
    """Integrator state; one instance per session, replaced on every step."""

    x: float
    y: float
    heading_rad: float
    pelvis_height: float
    vx: float
    vy: float
    gait_phase: float
    active_mode: int
    blend_remaining_s: float
    tick: int

    @property
    def current_speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def base_pos(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.pelvis_height)


def wrap_pi(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.fmod(angle + math.pi, 2.0 * math.pi)
    if r <= 0.0:
        r += 2.0 * math.pi
    return r - math.pi


def initial_state(mode_index: int, reg: Registry | None = None) -> PlannerState:
    """A session start state: at the origin, settled in the given mode."""
    reg = reg or registry()
    mode = reg.mode(mode_index)
    return PlannerState(
        x=0.0, y=0.0,
        heading_rad=0.0,
        pelvis_height=mode.default_height,
        vx=0.0, vy=0.0,
        gait_phase=0.0,
        active_mode=mode_index,
        blend_remaining_s=0.0,
        tick=0,
    )


def clamp_command(cmd: MetaCommand, reg: Registry | None = None) -> MetaCommand:
    """Project a command onto what the active mode actually supports.

    Speed and height are clipped into the mode's ranges, or replaced by the
    mode defaults when the capability is absent; movement is zeroed for
    modes without heading support.  The result is the effective command:
    what the integrator consumes and what recordings archive.  Idempotent.
    """
    reg = reg or registry()
    mode = reg.mode(cmd.mode_index)

    if mode.supports_speed:
        lo, hi = mode.speed_range
        speed = min(max(cmd.speed, lo), hi)
    else:
        speed = mode.default_speed

    if mode.supports_height:
        lo, hi = mode.height_range
        height = min(max(cmd.pelvis_height, lo), hi)
    else:
        height = mode.default_height

    movement = cmd.movement_dir if mode.supports_heading else (0.0, 0.0)
    return make_command(cmd.timestamp_ms, cmd.mode_index, movement,
                        cmd.facing_dir, speed, height)


def snapshot(state: PlannerState, dt: float = DT) -> TelemetrySample:
    """Telemetry record of the current state, stamped at tick * dt."""
    return make_sample(
        timestamp_ms=round(state.tick * dt * 1000.0),
        mode_index=state.active_mode,
        base_pos=state.base_pos,
        heading_rad=state.heading_rad,
        base_vel=(state.vx, state.vy),
        pelvis_height=state.pelvis_height,
        gait_phase=state.gait_phase,
        joints=(),
    )


def _clip(value: float, limit: float) -> float:
    return min(max(value, -limit), limit)


def step(state: PlannerState, effective_cmd: MetaCommand, dt: float = DT,
         reg: Registry | None = None,
         limits: RateLimits = DEFAULT_LIMITS) -> tuple[PlannerState, TelemetrySample]:
    """Advance one fixed step under an already-clamped command.

    A changed mode index is adopted immediately with position, heading and
    height carried over unchanged; everything then converges to the new
    mode's targets under the rate limits.  Pure function: identical inputs
    produce bit-identical outputs.
    """
    reg = reg or registry()

    active = state.active_mode
    blend = state.blend_remaining_s
    if effective_cmd.mode_index != active:
        active = effective_cmd.mode_index
        blend = limits.t_blend
    mode: ModeSpec = reg.mode(active)

    heading = state.heading_rad
    if mode.supports_heading:
        target_heading = math.atan2(effective_cmd.facing_dir[1], effective_cmd.facing_dir[0])
        err = wrap_pi(target_heading - heading)
        heading = wrap_pi(heading + _clip(err, limits.omega_max * dt))
    # modes without heading support hold their heading; the commanded
    # facing_dir is carried on the wire but has no effect here

    cos_h, sin_h = math.cos(heading), math.sin(heading)
    mx, my = effective_cmd.movement_dir
    tvx = (cos_h * mx - sin_h * my) * effective_cmd.speed
    tvy = (sin_h * mx + cos_h * my) * effective_cmd.speed
    dvx, dvy = tvx - state.vx, tvy - state.vy
    dv = math.hypot(dvx, dvy)
    dv_max = limits.a_max * dt
    if dv > dv_max:
        scale = dv_max / dv
        dvx *= scale
        dvy *= scale
    vx, vy = state.vx + dvx, state.vy + dvy

    x = state.x + vx * dt
    y = state.y + vy * dt

    dh = effective_cmd.pelvis_height - state.pelvis_height
    height = state.pelvis_height + _clip(dh, limits.h_rate * dt)

    speed = math.hypot(vx, vy)
    ratio = speed / mode.default_speed if mode.default_speed > 0.0 else 1.0
    phase = math.fmod(state.gait_phase + mode.gait_frequency * ratio * dt, 1.0)

    new_state = replace(
        state,
        x=x, y=y,
        heading_rad=heading,
        pelvis_height=height,
        vx=vx, vy=vy,
        gait_phase=phase,
        active_mode=active,
        blend_remaining_s=max(0.0, blend - dt),
        tick=state.tick + 1,
    )
    return new_state, snapshot(new_state, dt)


@dataclass(frozen=True)
class QualityThresholds:
    """Pass/fail limits for the kinematic transition-quality filter."""

    speed_jump: float = 0.2    # m/s, max allowed step in finite-difference speed
    height_rate: float = 0.75  # m/s, max allowed |dh/dt|


@dataclass(frozen=True)
class QualityReport:
    max_speed_jump: float
    max_height_rate: float
    passed: bool
    switch_time_ms: int

    def as_dict(self) -> dict:
        return {
            "switch_time_ms": self.switch_time_ms,
            "max_speed_jump": self.max_speed_jump,
            "max_height_rate": self.max_height_rate,
            "pass": self.passed,
        }


def transition_quality(samples, switch_time_ms: int,
                       thresholds: QualityThresholds = QualityThresholds(),
                       window_ms: int = 400) -> QualityReport:
    """Judge the kinematic smoothness of a window around a mode switch.

    Speeds come from finite differences of planar position, so the metric
    works on any telemetry stream regardless of backend.  Raises
    WindowTooShort when fewer than 5 samples fall on either side of the
    switch time.
    """
    window = [s for s in samples
              if switch_time_ms - window_ms <= s.timestamp_ms <= switch_time_ms + window_ms]
    before = sum(1 for s in window if s.timestamp_ms < switch_time_ms)
    after = len(window) - before
    if before < 5 or after < 5:
        raise WindowTooShort(
            f"need >= 5 samples on each side of t={switch_time_ms}ms, "
            f"have {before} before / {after} after")

    speeds = []
    max_height_rate = 0.0
    for a, b in zip(window, window[1:]):
        dt_s = (b.timestamp_ms - a.timestamp_ms) / 1000.0
        if dt_s <= 0:
            continue
        dist = math.hypot(b.base_pos[0] - a.base_pos[0], b.base_pos[1] - a.base_pos[1])
        speeds.append(dist / dt_s)
        max_height_rate = max(max_height_rate,
                              abs(b.pelvis_height - a.pelvis_height) / dt_s)

    max_speed_jump = max((abs(s2 - s1) for s1, s2 in zip(speeds, speeds[1:])), default=0.0)
    passed = (max_speed_jump <= thresholds.speed_jump
              and max_height_rate <= thresholds.height_rate)
    return QualityReport(
        max_speed_jump=max_speed_jump,
        max_height_rate=max_height_rate,
        passed=passed,
        switch_time_ms=switch_time_ms,
    )
