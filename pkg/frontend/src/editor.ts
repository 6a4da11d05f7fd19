/**
 * Timeline editor model: an ordered list of segment drafts built by
 * dragging (or clicking) modes from the library, with per-field editing,
 * reordering, validation, and dispatch.  Pure state here; DOM in main.ts.
 */

import { ModeDoc, RecipeDoc, UiEventOut } from "./protocol.js";
import {
  FieldError, SegmentDraft, defaultDraft, serializeRecipe, validateDraft,
} from "./recipe.js";

export class TimelineEditor {
  segments: SegmentDraft[] = [];
  name = "session";
  seed = 0;

  constructor(private readonly send: (ev: UiEventOut) => boolean) {}

  addMode(mode: ModeDoc, at?: number): SegmentDraft {
    const draft = defaultDraft(mode);
    const index = at === undefined ? this.segments.length
      : Math.min(Math.max(at, 0), this.segments.length);
    this.segments.splice(index, 0, draft);
    return draft;
  }

  remove(index: number): void {
    this.segments.splice(index, 1);
  }

  move(index: number, delta: number): void {
    const target = index + delta;
    if (index < 0 || index >= this.segments.length) return;
    if (target < 0 || target >= this.segments.length) return;
    const [seg] = this.segments.splice(index, 1);
    this.segments.splice(target, 0, seg);
  }

  update<K extends keyof SegmentDraft>(
    index: number, field: K, value: SegmentDraft[K],
  ): void {
    this.segments[index][field] = value;
  }

  validate(modes: ModeDoc[]): FieldError[] {
    return validateDraft(this.segments, modes);
  }

  recipe(): RecipeDoc {
    return serializeRecipe(this.name, this.seed, this.segments);
  }

  /** Validate and dispatch; returns blocking errors instead when invalid. */
  dispatch(modes: ModeDoc[]): FieldError[] {
    const errors = this.validate(modes);
    if (errors.length > 0) return errors;
    if (!this.send({ type: "dispatch_recipe", recipe: this.recipe() })) {
      return [{ segment: -1, field: "connection", message: "not connected" }];
    }
    return [];
  }

  totalDuration(): number {
    return this.segments.reduce((acc, s) => acc + (s.duration_s || 0), 0);
  }
}
