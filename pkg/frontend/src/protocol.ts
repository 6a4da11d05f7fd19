/**
 * Frontend-channel records: JSON text frames with a `type` discriminator.
 * Mirrors the bridge's wire contract; anything unrecognized is dropped.
 */

export type Movement =
  | "forward"
  | "backward"
  | "strafe_left"
  | "strafe_right"
  | "turn_left"
  | "turn_right"
  | "none";

export const MOVEMENTS: Movement[] = [
  "forward", "backward", "strafe_left", "strafe_right",
  "turn_left", "turn_right", "none",
];

export interface ModeDoc {
  index: number;
  name: string;
  group: string;
  supports_speed: boolean;
  supports_heading: boolean;
  supports_height: boolean;
  speed_range: [number, number] | null;
  default_speed: number;
  height_range: [number, number] | null;
  default_height: number;
}

export interface RegistryRecord {
  type: "registry";
  hash: string;
  modes: ModeDoc[];
}

export interface StateRecord {
  type: "state";
  status: "idle" | "keyboard" | "recipe_running" | "finishing";
  mode: number;
  mode_name: string;
  heading_deg: number;
  speed: number;
  height: number;
  fps: number;
}

export interface TraceRecord {
  type: "trace";
  pos: [number, number];
  heading: number;
  height: number;
  speed: number;
}

export interface RecipeStatusRecord {
  type: "recipe_status";
  recipe: string;
  active_segment: number;
  total: number;
  t_ms: number;
}

export interface RecipeDoneRecord {
  type: "recipe_done";
  recipe: string;
  path: string;
}

export interface ErrorRecord {
  type: "error";
  message: string;
}

export type BridgeRecord =
  | RegistryRecord
  | StateRecord
  | TraceRecord
  | RecipeStatusRecord
  | RecipeDoneRecord
  | ErrorRecord;

const RECORD_TYPES = new Set([
  "registry", "state", "trace", "recipe_status", "recipe_done", "error",
]);

/** Parse one incoming frame; returns null for malformed or unknown records. */
export function parseRecord(text: string): BridgeRecord | null {
  let obj: unknown;
  try {
    obj = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof obj !== "object" || obj === null) return null;
  const type = (obj as { type?: unknown }).type;
  if (typeof type !== "string" || !RECORD_TYPES.has(type)) return null;
  return obj as BridgeRecord;
}

export interface SegmentDoc {
  mode: number | string;
  duration_s: number;
  movement: Movement;
  turn_deg?: number;
  speed?: number;
  height?: number;
}

export interface RecipeDoc {
  name: string;
  seed: number;
  segments: SegmentDoc[];
}

export type UiEventOut =
  | { type: "key_down"; key: string }
  | { type: "key_up"; key: string }
  | { type: "set_mode"; mode: number }
  | { type: "set_speed"; value: number }
  | { type: "set_height"; value: number }
  | { type: "dispatch_recipe"; recipe: RecipeDoc }
  | { type: "halt" };
