"""Deterministic multi-style language annotation.

Segment intents are rendered into 8 per-segment sentences (4 registers x
with/without duration) and 17 full-trajectory descriptions.  All lexical
variety comes from word banks indexed by a seeded stream -- no stochastic
language model -- so identical (intents, seed, banks) reproduce identical
text byte for byte.

The seeded stream is splitmix64 keyed per substream with BLAKE2b over a
label path (e.g. seed/"seg"/2/"narrative_dur"), which makes every rendering
independent of how many other segments or styles exist.

Draw order within one rendering is fixed: verb, then direction phrase (for
non-turn movements), then manner adverb (natural register only).  Trajectory
descriptions draw verb/direction/manner eagerly per segment so all four
registers of one draw variant share the same picks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import EmptyTrajectory, NoTempoBank
from .registry import ModeSpec, Registry, registry

REGISTERS = ("instruction", "natural", "narrative", "concise")

TURN_BREAKPOINTS_DEG = (15.0, 60.0, 120.0, 240.0)
TURN_LABELS = ("slight", "partial", "quarter", "half", "full")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class StyleId:
    """One of the 8 annotation styles: register x temporal grounding."""

    register: str
    with_duration: bool

    @property
    def key(self) -> str:
        return self.register + ("_dur" if self.with_duration else "")


STYLES = tuple(StyleId(r, d) for r in REGISTERS for d in (False, True))


@dataclass(frozen=True)
class SegmentIntent:
    """Motion intent of one segment, as realized by its effective commands."""

    mode_index: int
    movement: str
    turn_deg: float | None
    speed: float
    duration_s: float
    height: float | None = None

    def to_dict(self) -> dict:
        return {
            "mode_index": self.mode_index,
            "movement": self.movement,
            "turn_deg": self.turn_deg,
            "speed": self.speed,
            "duration_s": self.duration_s,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SegmentIntent":
        return cls(
            mode_index=doc["mode_index"],
            movement=doc["movement"],
            turn_deg=doc.get("turn_deg"),
            speed=doc["speed"],
            duration_s=doc["duration_s"],
            height=doc.get("height"),
        )


@dataclass(frozen=True)
class AnnotationSet:
    """All renderings for one recording, reproducible from the seed."""

    per_segment: tuple[dict, ...]  # one {style_key: sentence} map per segment
    trajectory: tuple[str, ...]    # 17 full-trajectory descriptions
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "segments": list(self.per_segment),
            "trajectory": list(self.trajectory),
        }


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class WordStream:
    """splitmix64 sequence used only for bank indexing."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def pick(self, bank):
        if not bank:
            raise ValueError("cannot pick from an empty bank")
        return bank[self.next_u64() % len(bank)]


class PresetDraws:
    """Stream stub that forces specific draws; for tests and debugging."""

    def __init__(self, values):
        self._values = list(values)

    def pick(self, bank):
        if not self._values:
            raise ValueError("preset draws exhausted")
        value = self._values.pop(0)
        if value not in bank:
            raise ValueError(f"preset draw {value!r} not in bank {bank}")
        return value


def substream(seed: int, *labels) -> WordStream:
    """Deterministic child stream keyed by (seed, label path)."""
    path = "/".join(str(label) for label in labels).encode("utf-8")
    digest = hashlib.blake2b(path, digest_size=8,
                             key=(seed & _MASK64).to_bytes(8, "big")).digest()
    return WordStream(int.from_bytes(digest, "big"))


def verb_bank_lookup(mode_index: int, reg: Registry | None = None) -> tuple[str, ...]:
    """The ordered synonym verb bank of a mode; UnknownMode if out of range."""
    reg = reg or registry()
    return reg.mode(mode_index).verb_bank


def tempo_adverb(mode: ModeSpec, speed: float) -> str:
    """Map a speed to a tempo adverb by linear interpolation over the
    mode's speed range; index = floor((speed - min)/(max - min) * N)."""
    if not mode.supports_speed or not mode.tempo_bank:
        raise NoTempoBank(f"mode {mode.name!r} has no speed support")
    lo, hi = mode.speed_range
    speed = min(max(speed, lo), hi)
    n = len(mode.tempo_bank)
    idx = min(int((speed - lo) / (hi - lo) * n), n - 1)
    return mode.tempo_bank[idx]


def turn_bucket(turn_deg: float) -> tuple[str, str]:
    """Discretize a turn angle into (bucket label, left/right side).

    Breakpoints at 15/60/120/240 degrees absolute; anything >= 240 is
    'full'.  Non-negative angles are left turns.
    """
    mag = abs(turn_deg)
    side = "left" if turn_deg >= 0 else "right"
    for breakpoint_deg, label in zip(TURN_BREAKPOINTS_DEG, TURN_LABELS):
        if mag < breakpoint_deg:
            return label, side
    return TURN_LABELS[-1], side


def _bucket_phrase(turn_deg: float) -> str:
    label, side = turn_bucket(turn_deg)
    return {
        "slight": f"slightly {side}",
        "partial": f"partway {side}",
        "quarter": f"a quarter turn {side}",
        "half": f"a half turn {side}",
        "full": f"a full turn {side}",
    }[label]


def _third_person(verb_phrase: str) -> str:
    head, _, rest = verb_phrase.partition(" ")
    if head.endswith(("s", "sh", "ch", "x", "z", "o")):
        head += "es"
    elif head.endswith("y") and len(head) > 1 and head[-2] not in "aeiou":
        head = head[:-1] + "ies"
    else:
        head += "s"
    return head + (" " + rest if rest else "")


def _capitalize(sentence: str) -> str:
    return sentence[0].upper() + sentence[1:] if sentence else sentence


@dataclass(frozen=True)
class _Draws:
    verb: str
    direction: str
    manner: str


def _draw_all(intent: SegmentIntent, stream, reg: Registry) -> _Draws:
    """Eager draw of every bank slot, keeping shared streams aligned."""
    mode = reg.mode(intent.mode_index)
    turning = intent.movement in ("turn_left", "turn_right")
    verb = stream.pick(reg.turn_verbs if turning else mode.verb_bank)
    direction = "" if turning else stream.pick(reg.directions[intent.movement])
    manner = stream.pick(reg.manner)
    return _Draws(verb=verb, direction=direction, manner=manner)


def _clause(intent: SegmentIntent, register: str, draws: _Draws,
            with_duration: bool, reg: Registry, lead: bool) -> str:
    """Render one segment clause in a register.

    ``lead`` marks the first clause of a sentence: it is capitalized and,
    for the narrative register, carries the subject.
    """
    mode = reg.mode(intent.mode_index)
    turning = intent.movement in ("turn_left", "turn_right")
    tempo = tempo_adverb(mode, intent.speed) if mode.supports_speed else None

    if register == "concise":
        tokens = [draws.verb.lower()]
        if turning:
            tokens.append("left" if intent.movement == "turn_left" else "right")
            if intent.turn_deg is not None:
                tokens.append(f"{abs(intent.turn_deg):g}deg")
        else:
            tokens.append(draws.direction)
            if tempo:
                tokens.append(tempo)
            if intent.turn_deg is not None:
                side = "left" if intent.turn_deg >= 0 else "right"
                tokens += ["turn", side, f"{abs(intent.turn_deg):g}deg"]
        if with_duration:
            tokens.append(f"{intent.duration_s:.1f}s")
        return " ".join(tokens)

    verb = draws.verb
    if register == "narrative":
        verb = _third_person(verb)

    if turning:
        if intent.turn_deg is not None:
            core = f"{verb} {_bucket_phrase(intent.turn_deg)}"
        else:
            core = f"{verb} {'left' if intent.movement == 'turn_left' else 'right'}"
        if register == "natural":
            core += f" {draws.manner}"
        embedded_turn = False
    else:
        core = f"{verb} {draws.direction}"
        # natural always carries a manner adverb so the no-duration styles
        # stay pairwise distinct; stacked after the tempo adverb when both
        if register == "natural":
            core += f" {tempo}, {draws.manner}" if tempo else f" {draws.manner}"
        elif tempo:
            core += f" {tempo}"
        embedded_turn = intent.turn_deg is not None
        if embedded_turn:
            core += f", turning {_bucket_phrase(intent.turn_deg)}"

    if with_duration:
        fmt = "for about" if register == "natural" else "for"
        core += ("," if embedded_turn else "") + f" {fmt} {intent.duration_s:.1f} seconds"

    if register == "narrative":
        core = ("The robot " + core) if lead else core
    elif lead:
        core = _capitalize(core)
    return core


def render_segment(intent: SegmentIntent, style: StyleId, rng,
                   reg: Registry | None = None) -> str:
    """Render one intent in one style, drawing from the given stream.

    Draw order: verb, direction (non-turn movements only), manner (natural
    register only).  Any object with ``pick(bank)`` works as the stream.
    """
    reg = reg or registry()
    mode = reg.mode(intent.mode_index)
    turning = intent.movement in ("turn_left", "turn_right")
    verb = rng.pick(reg.turn_verbs if turning else mode.verb_bank)
    direction = "" if turning else rng.pick(reg.directions[intent.movement])
    manner = rng.pick(reg.manner) if style.register == "natural" else ""
    draws = _Draws(verb=verb, direction=direction, manner=manner)
    return _clause(intent, style.register, draws, style.with_duration, reg, lead=True)


def _compose(intents, drawn, connectives, register: str, with_duration: bool,
             reg: Registry) -> str:
    parts = [_clause(intents[0], register, drawn[0], with_duration, reg, lead=True)]
    for i in range(1, len(intents)):
        clause = _clause(intents[i], register, drawn[i], with_duration, reg, lead=False)
        parts.append(f", {connectives[i - 1]} {clause}")
    return "".join(parts)


def render_trajectory(intents, seed: int, reg: Registry | None = None) -> AnnotationSet:
    """Render the full annotation set for a recorded trajectory.

    Per segment: the 8 styles, each from its own substream.  Trajectory
    level: 17 descriptions -- 2 independent draw variants x 4 registers x
    with/without duration (indices 0-15), plus one compact comma-joined
    summary (index 16).
    """
    reg = reg or registry()
    intents = list(intents)
    if not intents:
        raise EmptyTrajectory("cannot annotate a trajectory with no segments")

    per_segment = []
    for i, intent in enumerate(intents):
        rendered = {}
        for style in STYLES:
            stream = substream(seed, "seg", i, style.key)
            rendered[style.key] = render_segment(intent, style, stream, reg)
        per_segment.append(rendered)

    trajectory: list[str] = []
    for variant in (0, 1):
        drawn = [_draw_all(intent, substream(seed, "traj", variant, "seg", i), reg)
                 for i, intent in enumerate(intents)]
        join_stream = substream(seed, "traj", variant, "join")
        connectives = [join_stream.pick(reg.connectives) for _ in range(len(intents) - 1)]
        for register in REGISTERS:
            for with_duration in (False, True):
                trajectory.append(_compose(intents, drawn, connectives,
                                           register, with_duration, reg))

    summary_drawn = [_draw_all(intent, substream(seed, "traj", "summary", "seg", i), reg)
                     for i, intent in enumerate(intents)]
    summary = ", ".join(
        _clause(intent, "concise", draws, False, reg, lead=False)
        for intent, draws in zip(intents, summary_drawn))
    trajectory.append(summary)

    return AnnotationSet(
        per_segment=tuple(per_segment),
        trajectory=tuple(trajectory),
        seed=seed,
    )
