"""kinescript: composable motion-primitive trajectory generation with
deterministic multi-style language annotation.

A 25-mode registry of parameterized motion primitives is composed into
long-horizon trajectories by a 20 Hz command bridge; a reference kinematic
backend integrates the command stream at 50 Hz with state-continuous mode
transitions; recordings are packaged with time-aligned command/telemetry
streams, segment tags, and seeded template annotations.
"""

from .annotation import (AnnotationSet, SegmentIntent, StyleId, STYLES,
                         render_segment, render_trajectory, tempo_adverb,
                         turn_bucket, verb_bank_lookup)
from .bridge import (Recording, SegmentTag, SessionState, apply_ui_event,
                     on_telemetry, run_recipe, tick_command)
from .clock import VirtualClock, WallClock
from .dataset import (SessionPackage, Violation, load_package, validate,
                      write_package)
from .planner import (DT, PlannerState, QualityReport, QualityThresholds,
                      RateLimits, clamp_command, initial_state, step,
                      transition_quality)
from .protocol import (MetaCommand, TelemetrySample, UiEvent, decode_command,
                       decode_telemetry, encode_command, encode_telemetry,
                       make_command, make_sample)
from .recipe import Recipe, SegmentSpec, load_recipe, validate_recipe
from .registry import ModeSpec, Registry, load_registry, registry

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet", "SegmentIntent", "StyleId", "STYLES",
    "render_segment", "render_trajectory", "tempo_adverb", "turn_bucket",
    "verb_bank_lookup",
    "Recording", "SegmentTag", "SessionState", "apply_ui_event",
    "on_telemetry", "run_recipe", "tick_command",
    "VirtualClock", "WallClock",
    "SessionPackage", "Violation", "load_package", "validate", "write_package",
    "DT", "PlannerState", "QualityReport", "QualityThresholds", "RateLimits",
    "clamp_command", "initial_state", "step", "transition_quality",
    "MetaCommand", "TelemetrySample", "UiEvent", "decode_command",
    "decode_telemetry", "encode_command", "encode_telemetry",
    "make_command", "make_sample",
    "Recipe", "SegmentSpec", "load_recipe", "validate_recipe",
    "ModeSpec", "Registry", "load_registry", "registry",
    "__version__",
]
