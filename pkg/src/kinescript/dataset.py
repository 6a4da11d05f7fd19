"""Session packages: validated, self-describing recording directories.

Layout (all timestamps session-relative ms, floats in shortest round-trip
form):

    manifest.json      session metadata, rates, registry hash, inlined recipe
    commands.jsonl     effective (post-clamp) command stream, one frame/line
    reference.jsonl    kinematic reference telemetry channel
    executed.jsonl     executed/dynamic telemetry channel (equals reference
                       under the reference backend; kept as its own file so
                       consumers see one schema regardless of backend)
    segments.json      boundary tags partitioning the recording, with intents
    annotations.json   8 per-segment renderings per segment + 17 descriptions

Writes are atomic (temp dir + rename).  Virtual-clock sessions stamp
created_at with the fixed virtual epoch so batch output trees are
hash-reproducible; wall-clock sessions pass the real time in.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .annotation import AnnotationSet, SegmentIntent, STYLES
from .bridge import Recording, SegmentTag
from .errors import AlignmentError, IoError, ParseError
from .protocol import (decode_command, decode_telemetry, encode_command,
                       encode_telemetry)
from .recipe import Recipe, recipe_to_dict
from .registry import Registry, registry

COMMAND_HZ = 20
TELEMETRY_HZ = 50
TRAJECTORY_DESCRIPTION_COUNT = 17

VIRTUAL_EPOCH = "1970-01-01T00:00:00+00:00"

FILES = ("manifest.json", "commands.jsonl", "reference.jsonl",
         "executed.jsonl", "segments.json", "annotations.json")


@dataclass(frozen=True)
class Violation:
    """One named package-invariant failure with its file locus."""

    name: str
    file: str
    detail: str
    line: int | None = None

    def __str__(self) -> str:
        locus = f"{self.file}:{self.line}" if self.line is not None else self.file
        return f"{self.name} [{locus}]: {self.detail}"


@dataclass
class SessionPackage:
    manifest: dict
    commands: list
    reference: list
    executed: list
    segments: list[SegmentTag]
    annotations: AnnotationSet

    def __eq__(self, other):
        if not isinstance(other, SessionPackage):
            return NotImplemented
        return (self.manifest == other.manifest
                and self.commands == other.commands
                and self.reference == other.reference
                and self.executed == other.executed
                and self.segments == other.segments
                and self.annotations == other.annotations)


def _segment_doc(tag: SegmentTag) -> dict:
    return {
        "index": tag.index,
        "mode_index": tag.mode_index,
        "mode_name": tag.mode_name,
        "start_ms": tag.start_ms,
        "end_ms": tag.end_ms,
        "intent": tag.intent.to_dict(),
    }


def _segment_from_doc(doc: dict) -> SegmentTag:
    return SegmentTag(
        index=doc["index"],
        mode_index=doc["mode_index"],
        mode_name=doc["mode_name"],
        start_ms=doc["start_ms"],
        end_ms=doc["end_ms"],
        intent=SegmentIntent.from_dict(doc["intent"]),
    )


def build_manifest(session_id: str, annotations: AnnotationSet,
                   recipe: Recipe | None = None,
                   backend_name: str = "reference-kinematic",
                   joints_dim: int = 0,
                   created_at: str = VIRTUAL_EPOCH,
                   reg: Registry | None = None) -> dict:
    reg = reg or registry()
    return {
        "session_id": session_id,
        "created_at": created_at,
        "recipe": recipe_to_dict(recipe) if recipe is not None else None,
        "seed": annotations.seed,
        "rates": {"command_hz": COMMAND_HZ, "telemetry_hz": TELEMETRY_HZ},
        "joints_dim": joints_dim,
        "backend_name": backend_name,
        "registry_hash": reg.hash,
    }


def validate(pkg: SessionPackage, reg: Registry | None = None) -> list[Violation]:
    """Check every package invariant; one named violation per failure."""
    reg = reg or registry()
    out: list[Violation] = []

    for key in ("session_id", "created_at", "rates", "joints_dim",
                "backend_name", "registry_hash", "seed"):
        if key not in pkg.manifest:
            out.append(Violation("manifest-field", "manifest.json", f"missing {key!r}"))
    rates = pkg.manifest.get("rates") or {}
    if rates.get("command_hz") != COMMAND_HZ or rates.get("telemetry_hz") != TELEMETRY_HZ:
        out.append(Violation("manifest-rates", "manifest.json",
                             f"rates {rates} != command {COMMAND_HZ} Hz / telemetry {TELEMETRY_HZ} Hz"))
    if pkg.manifest.get("registry_hash") != reg.hash:
        out.append(Violation("registry-hash-mismatch", "manifest.json",
                             "package was produced with a different mode registry or banks"))

    if abs(len(pkg.reference) - len(pkg.executed)) > 1:
        out.append(Violation("count-mismatch", "executed.jsonl",
                             f"executed has {len(pkg.executed)} samples, reference {len(pkg.reference)}"))

    joints_dim = pkg.manifest.get("joints_dim")
    for fname, stream in (("reference.jsonl", pkg.reference), ("executed.jsonl", pkg.executed)):
        for i, sample in enumerate(stream):
            if joints_dim is not None and len(sample.joints) != joints_dim:
                out.append(Violation("joints-dim", fname,
                                     f"sample has {len(sample.joints)} joints, manifest says {joints_dim}",
                                     line=i + 1))
                break
        for i in range(1, len(stream)):
            if stream[i].timestamp_ms <= stream[i - 1].timestamp_ms:
                out.append(Violation("timestamp-order", fname,
                                     f"t={stream[i].timestamp_ms} after t={stream[i - 1].timestamp_ms}",
                                     line=i + 1))
                break
    for i in range(1, len(pkg.commands)):
        if pkg.commands[i].timestamp_ms <= pkg.commands[i - 1].timestamp_ms:
            out.append(Violation("timestamp-order", "commands.jsonl",
                                 f"t={pkg.commands[i].timestamp_ms} after t={pkg.commands[i - 1].timestamp_ms}",
                                 line=i + 1))
            break

    if not pkg.segments:
        out.append(Violation("segment-coverage", "segments.json", "no segment tags"))
    elif pkg.reference:
        first_t = pkg.reference[0].timestamp_ms
        last_t = pkg.reference[-1].timestamp_ms
        tags = sorted(pkg.segments, key=lambda s: s.start_ms)
        if tags[0].start_ms != first_t:
            out.append(Violation("segment-coverage", "segments.json",
                                 f"first tag starts at {tags[0].start_ms}, first sample at {first_t}"))
        if tags[-1].end_ms <= last_t:
            out.append(Violation("segment-coverage", "segments.json",
                                 f"last tag ends at {tags[-1].end_ms}, last sample at {last_t}"))
        for a, b in zip(tags, tags[1:]):
            if b.start_ms > a.end_ms:
                out.append(Violation("segment-gap", "segments.json",
                                     f"gap between {a.end_ms} and {b.start_ms}"))
            elif b.start_ms < a.end_ms:
                out.append(Violation("segment-overlap", "segments.json",
                                     f"segment {b.index} starts at {b.start_ms} before {a.end_ms}"))
        for tag in tags:
            if tag.end_ms <= tag.start_ms:
                out.append(Violation("segment-order", "segments.json",
                                     f"segment {tag.index} has end {tag.end_ms} <= start {tag.start_ms}"))
                continue
            in_seg = sum(1 for s in pkg.reference if tag.start_ms <= s.timestamp_ms < tag.end_ms)
            expected = round((tag.end_ms - tag.start_ms) / 1000.0 * TELEMETRY_HZ)
            if abs(in_seg - expected) > 1:
                out.append(Violation("segment-count", "reference.jsonl",
                                     f"segment {tag.index} has {in_seg} samples, expected {expected} +/- 1"))

    if len(pkg.annotations.per_segment) != len(pkg.segments):
        out.append(Violation("annotation-count", "annotations.json",
                             f"{len(pkg.annotations.per_segment)} segment annotation sets "
                             f"for {len(pkg.segments)} segments"))
    style_keys = {s.key for s in STYLES}
    for i, rendered in enumerate(pkg.annotations.per_segment):
        if set(rendered) != style_keys or len(rendered) != len(style_keys):
            out.append(Violation("annotation-count", "annotations.json",
                                 f"segment {i} has styles {sorted(rendered)}, expected {sorted(style_keys)}"))
    if len(pkg.annotations.trajectory) != TRAJECTORY_DESCRIPTION_COUNT:
        out.append(Violation("annotation-count", "annotations.json",
                             f"{len(pkg.annotations.trajectory)} trajectory descriptions, "
                             f"expected {TRAJECTORY_DESCRIPTION_COUNT}"))
    if pkg.manifest.get("seed") != pkg.annotations.seed:
        out.append(Violation("seed-mismatch", "annotations.json",
                             f"annotation seed {pkg.annotations.seed} != manifest seed {pkg.manifest.get('seed')}"))
    return out


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", "utf-8")


def write_package(recording: Recording, annotations: AnnotationSet,
                  path: str | Path, recipe: Recipe | None = None,
                  backend_name: str = "reference-kinematic",
                  joints_dim: int = 0, created_at: str = VIRTUAL_EPOCH,
                  reg: Registry | None = None) -> SessionPackage:
    """Write a finalized recording as a package directory, atomically.

    Validates all invariants first and raises AlignmentError rather than
    writing a bad package.
    """
    reg = reg or registry()
    if not recording.finalized:
        raise AlignmentError([Violation("not-finalized", "manifest.json",
                                        "recording must be finalized before writing")])
    pkg = SessionPackage(
        manifest=build_manifest(recording.session_id, annotations, recipe=recipe,
                                backend_name=backend_name, joints_dim=joints_dim,
                                created_at=created_at, reg=reg),
        commands=list(recording.commands),
        reference=list(recording.reference),
        executed=list(recording.executed),
        segments=list(recording.tags),
        annotations=annotations,
    )
    violations = validate(pkg, reg)
    if violations:
        raise AlignmentError(violations)

    path = Path(path)
    if path.exists():
        raise IoError(f"package path {path} already exists")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=path.name + ".tmp-", dir=path.parent))
    try:
        _write_json(tmp / "manifest.json", pkg.manifest)
        with open(tmp / "commands.jsonl", "wb") as f:
            for cmd in pkg.commands:
                f.write(encode_command(cmd))
        with open(tmp / "reference.jsonl", "wb") as f:
            for sample in pkg.reference:
                f.write(encode_telemetry(sample))
        with open(tmp / "executed.jsonl", "wb") as f:
            for sample in pkg.executed:
                f.write(encode_telemetry(sample))
        _write_json(tmp / "segments.json", [_segment_doc(t) for t in pkg.segments])
        _write_json(tmp / "annotations.json", annotations.to_dict())
        os.rename(tmp, path)
    except OSError as e:
        raise IoError(f"failed to write package at {path}: {e}") from e
    finally:
        if tmp.exists():
            for leftover in tmp.iterdir():
                leftover.unlink()
            tmp.rmdir()
    return pkg


def _parse_json(path: Path):
    try:
        return json.loads(path.read_text("utf-8"))
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"{path.name}:{e.lineno}: {e.msg}") from e


def _parse_stream(path: Path, decoder):
    out = []
    try:
        with open(path, "rb") as f:
            for lineno, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    out.append(decoder(line))
                except Exception as e:
                    raise ParseError(f"{path.name}:{lineno}: {e}") from e
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    return out


def load_package(path: str | Path, check: bool = True,
                 reg: Registry | None = None) -> SessionPackage:
    """Load a package directory; with check=True, raise AlignmentError on
    any invariant violation."""
    reg = reg or registry()
    path = Path(path)
    if not path.is_dir():
        raise ParseError(f"{path} is not a package directory")
    for fname in FILES:
        if not (path / fname).exists():
            raise ParseError(f"{path} is missing {fname}")

    manifest = _parse_json(path / "manifest.json")
    if not isinstance(manifest, dict):
        raise ParseError("manifest.json: expected a JSON object")
    segments_doc = _parse_json(path / "segments.json")
    annotations_doc = _parse_json(path / "annotations.json")
    try:
        segments = [_segment_from_doc(d) for d in segments_doc]
        annotations = AnnotationSet(
            per_segment=tuple(annotations_doc["segments"]),
            trajectory=tuple(annotations_doc["trajectory"]),
            seed=annotations_doc["seed"],
        )
    except (KeyError, TypeError) as e:
        raise ParseError(f"bad segments/annotations document: {e}") from e

    pkg = SessionPackage(
        manifest=manifest,
        commands=_parse_stream(path / "commands.jsonl", decode_command),
        reference=_parse_stream(path / "reference.jsonl", decode_telemetry),
        executed=_parse_stream(path / "executed.jsonl", decode_telemetry),
        segments=segments,
        annotations=annotations,
    )
    if check:
        violations = validate(pkg, reg)
        if violations:
            raise AlignmentError(violations)
    return pkg
