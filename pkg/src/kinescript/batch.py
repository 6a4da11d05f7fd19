"""Headless batch generation: recipes x sweep points -> validated packages.

Each run executes under the virtual clock, is scored by the transition
quality filter, and is written only when it passes (unless filtering is
off).  The whole batch is deterministic in (recipes, sweep, seed): output
trees from identical invocations are hash-identical, which is why report
files contain no wall-clock times and figures are rendered separately by
`kinescript report`.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from itertools import product
from pathlib import Path

from .annotation import render_trajectory
from .bridge import Recording, run_recipe
from .dataset import write_package
from .errors import InvalidRecipe, WindowTooShort
from .planner import QualityThresholds, transition_quality
from .recipe import Recipe, load_recipe, validate_recipe
from .registry import Registry, load_registry, registry


@dataclass(frozen=True)
class SweepAxis:
    """One swept segment field: `<mode-or-*>.<field>=v1,v2,...`."""

    selector: str
    field: str
    values: tuple[float, ...]


SWEEPABLE_FIELDS = ("speed", "height", "duration_s", "turn_deg")


def parse_sweep(spec: str) -> SweepAxis:
    head, sep, values = spec.partition("=")
    selector, dot, field = head.partition(".")
    if not sep or not dot or field not in SWEEPABLE_FIELDS:
        raise InvalidRecipe(
            f"bad sweep spec {spec!r}; expected <mode-or-*>.<field>=v1,v2,... "
            f"with field one of {SWEEPABLE_FIELDS}")
    try:
        parsed = tuple(float(v) for v in values.split(","))
    except ValueError as e:
        raise InvalidRecipe(f"bad sweep values in {spec!r}: {e}") from e
    if not parsed:
        raise InvalidRecipe(f"sweep spec {spec!r} has no values")
    return SweepAxis(selector=selector, field=field, values=parsed)


def sweep_points(axes: list[SweepAxis]) -> list[tuple[tuple[SweepAxis, float], ...]]:
    if not axes:
        return [()]
    return [tuple(zip(axes, combo)) for combo in product(*(a.values for a in axes))]


def point_label(point) -> str:
    return "-".join(f"{axis.field}{value:g}" for axis, value in point)


def apply_point(recipe: Recipe, point, reg: Registry) -> Recipe:
    """Override matching segment fields; the result is re-validated."""
    segments = list(recipe.segments)
    for axis, value in point:
        hit = False
        for i, seg in enumerate(segments):
            mode_name = reg.mode(seg.mode).name
            if axis.selector in ("*", mode_name):
                segments[i] = replace(segments[i], **{axis.field: value})
                hit = True
        if not hit:
            raise InvalidRecipe(
                f"sweep selector {axis.selector!r} matches no segment of recipe {recipe.name!r}")
    swept = Recipe(name=recipe.name, seed=recipe.seed, segments=tuple(segments))
    validate_recipe(swept, reg)
    return swept


def evaluate_quality(recording: Recording,
                     thresholds: QualityThresholds) -> dict:
    """Score every mode switch in a recording; overall pass = all pass."""
    transitions = []
    for prev, cur in zip(recording.tags, recording.tags[1:]):
        if prev.mode_index == cur.mode_index:
            continue
        row = {"at_ms": cur.start_ms, "from": prev.mode_name, "to": cur.mode_name}
        try:
            rep = transition_quality(recording.reference, cur.start_ms, thresholds)
            row.update({"max_speed_jump": rep.max_speed_jump,
                        "max_height_rate": rep.max_height_rate,
                        "pass": rep.passed, "skipped": False})
        except WindowTooShort:
            row.update({"max_speed_jump": 0.0, "max_height_rate": 0.0,
                        "pass": True, "skipped": True})
        transitions.append(row)
    return {
        "transitions": transitions,
        "max_speed_jump": max((t["max_speed_jump"] for t in transitions), default=0.0),
        "max_height_rate": max((t["max_height_rate"] for t in transitions), default=0.0),
        "pass": all(t["pass"] for t in transitions),
    }


def _run_one(job: dict) -> dict:
    """Execute one (recipe, sweep point) cell; module-level for pickling."""
    reg = (load_registry(job["registry_path"], job["banks_path"])
           if job.get("registry_path") or job.get("banks_path") else registry())
    from .recipe import recipe_from_dict
    recipe = recipe_from_dict(job["recipe"], reg)
    thresholds = QualityThresholds(*job["thresholds"])
    seed = job["seed"]

    recording = run_recipe(recipe, reg, session_id=job["run_id"])
    quality = evaluate_quality(recording, thresholds)
    write = quality["pass"] or not job["filter"]
    path = None
    if write:
        annotations = render_trajectory([t.intent for t in recording.tags], seed, reg)
        write_package(recording, annotations, Path(job["out_dir"]) / job["run_id"],
                      recipe=recipe, reg=reg)
        path = job["run_id"]  # relative to the batch dir, so trees stay comparable
    return {
        "run_id": job["run_id"],
        "recipe": recipe.name,
        "sweep": job["sweep_label"],
        "seed": seed,
        "duration_s": sum(s.duration_s for s in recipe.segments),
        "commands": len(recording.commands),
        "samples": len(recording.reference),
        "quality": quality,
        "written": write,
        "path": path,
    }


def run_batch(recipe_paths, out_dir, seed: int | None = None,
              sweeps: list[str] | None = None, filter_transitions: bool = True,
              thresholds: QualityThresholds = QualityThresholds(),
              jobs: int = 1, registry_path=None, banks_path=None) -> dict:
    """Run every recipe x sweep point and write the batch report."""
    reg = (load_registry(registry_path, banks_path)
           if registry_path or banks_path else registry())
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    axes = [parse_sweep(s) for s in (sweeps or [])]
    points = sweep_points(axes)

    from .recipe import recipe_to_dict
    jobs_list = []
    for path in recipe_paths:
        base = load_recipe(path, reg)
        for point in points:
            swept = apply_point(base, point, reg) if point else base
            label = point_label(point)
            run_id = swept.name + (f"-{label}" if label else "")
            jobs_list.append({
                "recipe": recipe_to_dict(swept),
                "run_id": run_id,
                "sweep_label": label,
                "seed": seed if seed is not None else swept.seed,
                "out_dir": str(out_dir),
                "filter": filter_transitions,
                "thresholds": (thresholds.speed_jump, thresholds.height_rate),
                "registry_path": str(registry_path) if registry_path else None,
                "banks_path": str(banks_path) if banks_path else None,
            })

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_one, jobs_list))
    else:
        rows = [_run_one(j) for j in jobs_list]

    report = {
        "generated": sum(1 for r in rows if r["written"]),
        "filtered": sum(1 for r in rows if not r["written"]),
        "runs": rows,
    }
    (out_dir / "report.json").write_text(
        json.dumps(report, indent=2, allow_nan=False) + "\n", "utf-8")
    with open(out_dir / "report.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["run_id", "recipe", "sweep", "seed", "duration_s", "commands",
                    "samples", "transitions", "max_speed_jump", "max_height_rate",
                    "quality_pass", "written", "path"])
        for r in rows:
            q = r["quality"]
            w.writerow([r["run_id"], r["recipe"], r["sweep"], r["seed"],
                        r["duration_s"], r["commands"], r["samples"],
                        len(q["transitions"]), q["max_speed_jump"],
                        q["max_height_rate"], q["pass"], r["written"],
                        r["path"] or ""])
    return report
