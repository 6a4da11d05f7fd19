"""Motion-mode registry: 25 primitives, their capability flags and banks.

The registry is loaded from two editable JSON documents -- ``modes.json``
(indices, groups, capability flags, parameter ranges) and ``banks.json``
(verb/tempo/direction/connective word banks) -- and is immutable afterwards.
``registry_hash`` fingerprints both documents so a session package records
exactly which mode table and language banks produced it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import RegistryLoadError, UnknownMode

GROUPS = ("Locomotion", "SquatGround", "Boxing", "StyledWalking")

MOVEMENTS = ("forward", "backward", "strafe_left", "strafe_right",
             "turn_left", "turn_right", "none")


@dataclass(frozen=True)
class ModeSpec:
    """One registry row: a parameterized, composable motion primitive."""

    index: int
    name: str
    group: str
    supports_speed: bool
    supports_heading: bool
    supports_height: bool
    default_speed: float
    default_height: float
    gait_frequency: float
    speed_range: tuple[float, float] | None = None
    height_range: tuple[float, float] | None = None
    verb_bank: tuple[str, ...] = ()
    tempo_bank: tuple[str, ...] = ()


@dataclass(frozen=True)
class Registry:
    """Immutable view over the loaded mode table and language banks."""

    modes: tuple[ModeSpec, ...]
    directions: dict[str, tuple[str, ...]]
    turn_verbs: tuple[str, ...]
    connectives: tuple[str, ...]
    manner: tuple[str, ...]
    hash: str
    by_name: dict[str, ModeSpec] = field(default_factory=dict)

    def mode(self, key: int | str) -> ModeSpec:
        """Look up a mode by registry index or exact name."""
        if isinstance(key, bool):
            raise UnknownMode(f"mode key must be an index or name, got {key!r}")
        if isinstance(key, int):
            if not 0 <= key < len(self.modes):
                raise UnknownMode(f"mode index {key} outside [0, {len(self.modes) - 1}]")
            return self.modes[key]
        if key in self.by_name:
            return self.by_name[key]
        raise UnknownMode(f"no mode named {key!r}")

    def __len__(self) -> int:
        return len(self.modes)


def _data_text(name: str) -> str:
    return resources.files("kinescript.data").joinpath(name).read_text("utf-8")


def _fail(entry: str, problem: str) -> RegistryLoadError:
    return RegistryLoadError(f"registry entry {entry!r}: {problem}")


def _check_range(entry: str, key: str, value) -> tuple[float, float]:
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) for v in value)):
        raise _fail(entry, f"{key} must be a [min, max] pair")
    lo, hi = float(value[0]), float(value[1])
    if not lo < hi:
        raise _fail(entry, f"{key} min {lo} must be < max {hi}")
    return lo, hi


def load_registry(modes_path: str | Path | None = None,
                  banks_path: str | Path | None = None) -> Registry:
    """Load and validate the registry, merging word banks into each mode.

    Raises RegistryLoadError naming the offending mode entry on any
    structural or semantic problem.
    """
    try:
        modes_text = Path(modes_path).read_text("utf-8") if modes_path else _data_text("modes.json")
        banks_text = Path(banks_path).read_text("utf-8") if banks_path else _data_text("banks.json")
    except OSError as e:
        raise RegistryLoadError(f"cannot read registry files: {e}") from e
    try:
        modes_doc = json.loads(modes_text)
        banks_doc = json.loads(banks_text)
    except json.JSONDecodeError as e:
        raise RegistryLoadError(f"registry file is not valid JSON: {e}") from e

    rows = modes_doc.get("modes")
    if not isinstance(rows, list):
        raise RegistryLoadError("modes.json must contain a 'modes' array")
    if len(rows) != 25:
        raise RegistryLoadError(f"registry must list exactly 25 modes, found {len(rows)}")

    verbs = banks_doc.get("verbs", {})
    tempo = banks_doc.get("tempo", {})

    modes: list[ModeSpec] = []
    for i, row in enumerate(rows):
        name = row.get("name")
        entry = name if isinstance(name, str) else f"#{i}"
        if not isinstance(name, str) or not name:
            raise _fail(entry, "missing mode name")
        if row.get("index") != i:
            raise _fail(entry, f"index {row.get('index')!r} does not match position {i}")
        group = row.get("group")
        if group not in GROUPS:
            raise _fail(entry, f"group {group!r} not one of {GROUPS}")
        flags = {}
        for key in ("supports_speed", "supports_heading", "supports_height"):
            if not isinstance(row.get(key), bool):
                raise _fail(entry, f"{key} must be a boolean")
            flags[key] = row[key]

        speed_range = None
        if flags["supports_speed"]:
            if "speed_range" not in row:
                raise _fail(entry, "speed_range required when supports_speed")
            speed_range = _check_range(entry, "speed_range", row["speed_range"])
        elif "speed_range" in row:
            raise _fail(entry, "speed_range present but supports_speed is false")

        height_range = None
        if flags["supports_height"]:
            if "height_range" not in row:
                raise _fail(entry, "height_range required when supports_height")
            height_range = _check_range(entry, "height_range", row["height_range"])
        elif "height_range" in row:
            raise _fail(entry, "height_range present but supports_height is false")

        default_speed = row.get("default_speed")
        if not isinstance(default_speed, (int, float)) or default_speed < 0:
            raise _fail(entry, "default_speed must be a non-negative number")
        if speed_range and not speed_range[0] <= default_speed <= speed_range[1]:
            raise _fail(entry, f"default_speed {default_speed} outside speed_range {speed_range}")

        default_height = row.get("default_height")
        if not isinstance(default_height, (int, float)) or default_height <= 0:
            raise _fail(entry, "default_height must be a positive number")
        if height_range and not height_range[0] <= default_height <= height_range[1]:
            raise _fail(entry, f"default_height {default_height} outside height_range {height_range}")

        gait_frequency = row.get("gait_frequency")
        if not isinstance(gait_frequency, (int, float)) or gait_frequency < 0:
            raise _fail(entry, "gait_frequency must be a non-negative number")

        verb_bank = verbs.get(name)
        if not isinstance(verb_bank, list) or not verb_bank:
            raise _fail(entry, "verb bank missing or empty in banks.json")
        tempo_bank = tempo.get(name, [])
        if flags["supports_speed"] and not tempo_bank:
            raise _fail(entry, "tempo bank required for speed-capable mode")

        modes.append(ModeSpec(
            index=i,
            name=name,
            group=group,
            supports_speed=flags["supports_speed"],
            supports_heading=flags["supports_heading"],
            supports_height=flags["supports_height"],
            default_speed=float(default_speed),
            default_height=float(default_height),
            gait_frequency=float(gait_frequency),
            speed_range=speed_range,
            height_range=height_range,
            verb_bank=tuple(verb_bank),
            tempo_bank=tuple(tempo_bank),
        ))

    names = [m.name for m in modes]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise RegistryLoadError(f"duplicate mode names: {dupes}")

    for key in ("directions", "turn_verbs", "connectives", "manner"):
        if key not in banks_doc:
            raise RegistryLoadError(f"banks.json missing {key!r} bank")
    directions = {k: tuple(v) for k, v in banks_doc["directions"].items()}
    for movement in MOVEMENTS:
        if movement.startswith("turn_"):
            continue
        if not directions.get(movement):
            raise RegistryLoadError(f"directions bank missing movement {movement!r}")

    digest = hashlib.sha256()
    for doc in (modes_doc, banks_doc):
        digest.update(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8"))

    return Registry(
        modes=tuple(modes),
        directions=directions,
        turn_verbs=tuple(banks_doc["turn_verbs"]),
        connectives=tuple(banks_doc["connectives"]),
        manner=tuple(banks_doc["manner"]),
        hash=digest.hexdigest(),
        by_name={m.name: m for m in modes},
    )


_default: Registry | None = None


def registry() -> Registry:
    """The packaged default registry, loaded once and cached."""
    global _default
    if _default is None:
        _default = load_registry()
    return _default
