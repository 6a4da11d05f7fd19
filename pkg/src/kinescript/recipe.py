"""Recipe files: ordered multi-segment trajectory programs.

A recipe is a name, a 64-bit seed, and an ordered list of segments, each
with a mode, a duration, a movement, and optional turn/speed/height
overrides.  Validation failures always name the segment index and field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidRecipe, UnknownMode
from .registry import MOVEMENTS, Registry, registry

MAX_SEED = (1 << 64) - 1


@dataclass(frozen=True)
class SegmentSpec:
    mode: int | str
    duration_s: float
    movement: str = "none"
    turn_deg: float | None = None
    speed: float | None = None
    height: float | None = None


@dataclass(frozen=True)
class Recipe:
    name: str
    seed: int
    segments: tuple[SegmentSpec, ...] = field(default_factory=tuple)

    def total_duration_ms(self) -> int:
        return sum(round(s.duration_s * 1000) for s in self.segments)


def validate_recipe(recipe: Recipe, reg: Registry | None = None) -> None:
    """Check every segment against the registry; raise InvalidRecipe on failure."""
    reg = reg or registry()
    if not recipe.name:
        raise InvalidRecipe("recipe name must be non-empty", field="name")
    if not isinstance(recipe.seed, int) or not 0 <= recipe.seed <= MAX_SEED:
        raise InvalidRecipe(f"seed {recipe.seed!r} must be a 64-bit unsigned int", field="seed")
    if not recipe.segments:
        raise InvalidRecipe("recipe must have at least one segment", field="segments")

    for i, seg in enumerate(recipe.segments):
        try:
            mode = reg.mode(seg.mode)
        except UnknownMode as e:
            raise InvalidRecipe(str(e), segment=i, field="mode") from e
        if not isinstance(seg.duration_s, (int, float)) or not seg.duration_s > 0:
            raise InvalidRecipe(f"duration_s {seg.duration_s!r} must be > 0",
                                segment=i, field="duration_s")
        if seg.movement not in MOVEMENTS:
            raise InvalidRecipe(f"movement {seg.movement!r} not one of {MOVEMENTS}",
                                segment=i, field="movement")
        if seg.movement != "none" and not mode.supports_heading:
            raise InvalidRecipe(f"mode {mode.name!r} is stationary; movement must be 'none'",
                                segment=i, field="movement")
        if seg.turn_deg is not None:
            if not isinstance(seg.turn_deg, (int, float)):
                raise InvalidRecipe("turn_deg must be a number", segment=i, field="turn_deg")
            if not mode.supports_heading:
                raise InvalidRecipe(f"mode {mode.name!r} has no heading support; turn_deg not allowed",
                                    segment=i, field="turn_deg")
            if seg.movement == "turn_left" and seg.turn_deg <= 0:
                raise InvalidRecipe("turn_left requires a positive turn_deg",
                                    segment=i, field="turn_deg")
            if seg.movement == "turn_right" and seg.turn_deg >= 0:
                raise InvalidRecipe("turn_right requires a negative turn_deg",
                                    segment=i, field="turn_deg")
        if seg.speed is not None:
            if not mode.supports_speed:
                raise InvalidRecipe(f"mode {mode.name!r} has no speed support; speed override not allowed",
                                    segment=i, field="speed")
            lo, hi = mode.speed_range
            if not (isinstance(seg.speed, (int, float)) and lo <= seg.speed <= hi):
                raise InvalidRecipe(f"speed {seg.speed!r} outside {mode.name} range [{lo}, {hi}]",
                                    segment=i, field="speed")
        if seg.height is not None:
            if not mode.supports_height:
                raise InvalidRecipe(f"mode {mode.name!r} has no height support; height override not allowed",
                                    segment=i, field="height")
            lo, hi = mode.height_range
            if not (isinstance(seg.height, (int, float)) and lo <= seg.height <= hi):
                raise InvalidRecipe(f"height {seg.height!r} outside {mode.name} range [{lo}, {hi}]",
                                    segment=i, field="height")


def recipe_from_dict(doc: dict, reg: Registry | None = None) -> Recipe:
    """Build and validate a Recipe from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise InvalidRecipe("recipe document must be an object")
    raw_segments = doc.get("segments")
    if not isinstance(raw_segments, list):
        raise InvalidRecipe("recipe must have a 'segments' array", field="segments")
    segments = []
    for i, raw in enumerate(raw_segments):
        if not isinstance(raw, dict):
            raise InvalidRecipe("segment must be an object", segment=i)
        known = {"mode", "duration_s", "movement", "turn_deg", "speed", "height"}
        unknown = set(raw) - known
        if unknown:
            raise InvalidRecipe(f"unknown segment fields {sorted(unknown)}", segment=i)
        if "mode" not in raw or "duration_s" not in raw:
            raise InvalidRecipe("segment requires 'mode' and 'duration_s'", segment=i)
        segments.append(SegmentSpec(
            mode=raw["mode"],
            duration_s=raw["duration_s"],
            movement=raw.get("movement", "none"),
            turn_deg=raw.get("turn_deg"),
            speed=raw.get("speed"),
            height=raw.get("height"),
        ))
    recipe = Recipe(
        name=str(doc.get("name", "")),
        seed=doc.get("seed", 0),
        segments=tuple(segments),
    )
    validate_recipe(recipe, reg)
    return recipe


def recipe_to_dict(recipe: Recipe) -> dict:
    segments = []
    for seg in recipe.segments:
        row = {"mode": seg.mode, "duration_s": seg.duration_s, "movement": seg.movement}
        if seg.turn_deg is not None:
            row["turn_deg"] = seg.turn_deg
        if seg.speed is not None:
            row["speed"] = seg.speed
        if seg.height is not None:
            row["height"] = seg.height
        segments.append(row)
    return {"name": recipe.name, "seed": recipe.seed, "segments": segments}


def load_recipe(path: str | Path, reg: Registry | None = None) -> Recipe:
    """Load a recipe JSON file."""
    text = Path(path).read_text("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidRecipe(f"recipe file {path} is not valid JSON: {e}") from e
    return recipe_from_dict(doc, reg)
