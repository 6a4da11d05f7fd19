/**
 * Timeline drafts and client-side recipe validation.
 *
 * The rules here mirror the bridge's validator exactly, so any recipe the
 * editor lets through serializes and dispatches without a round-trip
 * rejection; dispatch is blocked with field-level messages otherwise.
 */

import { ModeDoc, Movement, RecipeDoc, SegmentDoc } from "./protocol.js";

export interface SegmentDraft {
  mode: number;
  duration_s: number;
  movement: Movement;
  turn_deg: number | null;
  speed: number | null;
  height: number | null;
}

export interface FieldError {
  segment: number;
  field: string;
  message: string;
}

export function defaultDraft(mode: ModeDoc): SegmentDraft {
  return {
    mode: mode.index,
    duration_s: 3.0,
    movement: mode.supports_heading ? "forward" : "none",
    turn_deg: null,
    speed: null,
    height: null,
  };
}

export function allowedMovements(mode: ModeDoc): Movement[] {
  if (!mode.supports_heading) return ["none"];
  return ["forward", "backward", "strafe_left", "strafe_right",
          "turn_left", "turn_right", "none"];
}

export function validateDraft(
  segments: SegmentDraft[],
  modes: ModeDoc[],
): FieldError[] {
  const errors: FieldError[] = [];
  const byIndex = new Map(modes.map((m) => [m.index, m]));
  if (segments.length === 0) {
    errors.push({ segment: -1, field: "segments", message: "add at least one segment" });
    return errors;
  }
  segments.forEach((seg, i) => {
    const mode = byIndex.get(seg.mode);
    if (!mode) {
      errors.push({ segment: i, field: "mode", message: `unknown mode ${seg.mode}` });
      return;
    }
    if (!(seg.duration_s > 0)) {
      errors.push({ segment: i, field: "duration_s", message: "duration must be > 0" });
    }
    if (seg.movement !== "none" && !mode.supports_heading) {
      errors.push({ segment: i, field: "movement",
                    message: `${mode.name} is stationary; movement must be 'none'` });
    }
    if (seg.turn_deg !== null) {
      if (!mode.supports_heading) {
        errors.push({ segment: i, field: "turn_deg",
                      message: `${mode.name} has no heading support` });
      } else if (seg.movement === "turn_left" && seg.turn_deg <= 0) {
        errors.push({ segment: i, field: "turn_deg", message: "turn_left needs a positive angle" });
      } else if (seg.movement === "turn_right" && seg.turn_deg >= 0) {
        errors.push({ segment: i, field: "turn_deg", message: "turn_right needs a negative angle" });
      }
    }
    if (seg.speed !== null) {
      if (!mode.supports_speed || !mode.speed_range) {
        errors.push({ segment: i, field: "speed",
                      message: `${mode.name} has a fixed speed` });
      } else if (seg.speed < mode.speed_range[0] || seg.speed > mode.speed_range[1]) {
        errors.push({ segment: i, field: "speed",
                      message: `speed outside [${mode.speed_range[0]}, ${mode.speed_range[1]}]` });
      }
    }
    if (seg.height !== null) {
      if (!mode.supports_height || !mode.height_range) {
        errors.push({ segment: i, field: "height",
                      message: `${mode.name} has no height control` });
      } else if (seg.height < mode.height_range[0] || seg.height > mode.height_range[1]) {
        errors.push({ segment: i, field: "height",
                      message: `height outside [${mode.height_range[0]}, ${mode.height_range[1]}]` });
      }
    }
  });
  return errors;
}

export function serializeRecipe(
  name: string,
  seed: number,
  segments: SegmentDraft[],
): RecipeDoc {
  const out: SegmentDoc[] = segments.map((seg) => {
    const doc: SegmentDoc = {
      mode: seg.mode,
      duration_s: seg.duration_s,
      movement: seg.movement,
    };
    if (seg.turn_deg !== null) doc.turn_deg = seg.turn_deg;
    if (seg.speed !== null) doc.speed = seg.speed;
    if (seg.height !== null) doc.height = seg.height;
    return doc;
  });
  return { name, seed, segments: out };
}
