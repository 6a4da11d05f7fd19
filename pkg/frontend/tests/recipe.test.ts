import { describe, expect, it } from "vitest";

import { TimelineEditor } from "../src/editor.js";
import { ModeDoc, UiEventOut } from "../src/protocol.js";
import { allowedMovements, defaultDraft, serializeRecipe, validateDraft } from "../src/recipe.js";

const WALK: ModeDoc = {
  index: 1, name: "Walk", group: "Locomotion",
  supports_speed: false, supports_heading: true, supports_height: false,
  speed_range: null, default_speed: 1.0, height_range: null, default_height: 0.78,
};
const RUN: ModeDoc = {
  index: 2, name: "Run", group: "Locomotion",
  supports_speed: true, supports_heading: true, supports_height: false,
  speed_range: [1.5, 3.0], default_speed: 2.0, height_range: null, default_height: 0.78,
};
const SQUAT: ModeDoc = {
  index: 6, name: "Squat", group: "SquatGround",
  supports_speed: false, supports_heading: false, supports_height: true,
  speed_range: null, default_speed: 0.0, height_range: [0.3, 0.7], default_height: 0.45,
};
const MODES = [WALK, RUN, SQUAT];

describe("validateDraft", () => {
  it("accepts a well-formed timeline", () => {
    const segs = [defaultDraft(WALK), defaultDraft(RUN), defaultDraft(SQUAT)];
    expect(validateDraft(segs, MODES)).toEqual([]);
  });

  it("blocks zero duration with a field-level message", () => {
    const seg = { ...defaultDraft(WALK), duration_s: 0 };
    const errors = validateDraft([seg], MODES);
    expect(errors).toHaveLength(1);
    expect(errors[0]).toMatchObject({ segment: 0, field: "duration_s" });
  });

  it("blocks movement on stationary modes", () => {
    const seg = { ...defaultDraft(SQUAT), movement: "forward" as const };
    expect(validateDraft([seg], MODES)[0].field).toBe("movement");
  });

  it("blocks out-of-range speed overrides", () => {
    const seg = { ...defaultDraft(RUN), speed: 9.0 };
    expect(validateDraft([seg], MODES)[0].field).toBe("speed");
  });

  it("blocks speed overrides on fixed-speed modes", () => {
    const seg = { ...defaultDraft(WALK), speed: 1.0 };
    expect(validateDraft([seg], MODES)[0].field).toBe("speed");
  });

  it("enforces turn sign consistency", () => {
    const seg = { ...defaultDraft(WALK), movement: "turn_left" as const, turn_deg: -90 };
    expect(validateDraft([seg], MODES)[0].field).toBe("turn_deg");
  });

  it("rejects an empty timeline", () => {
    expect(validateDraft([], MODES)[0].field).toBe("segments");
  });
});

describe("allowedMovements", () => {
  it("restricts stationary modes to none", () => {
    expect(allowedMovements(SQUAT)).toEqual(["none"]);
    expect(allowedMovements(WALK)).toContain("turn_left");
  });
});

describe("serializeRecipe", () => {
  it("omits null optionals", () => {
    const doc = serializeRecipe("demo", 9, [defaultDraft(WALK)]);
    expect(doc).toEqual({
      name: "demo", seed: 9,
      segments: [{ mode: 1, duration_s: 3.0, movement: "forward" }],
    });
  });

  it("keeps explicit overrides", () => {
    const seg = { ...defaultDraft(RUN), speed: 2.5, turn_deg: 45 };
    const doc = serializeRecipe("demo", 9, [seg]);
    expect(doc.segments[0]).toMatchObject({ speed: 2.5, turn_deg: 45 });
  });
});

describe("TimelineEditor", () => {
  function editor() {
    const sent: UiEventOut[] = [];
    const ed = new TimelineEditor((ev) => { sent.push(ev); return true; });
    return { ed, sent };
  }

  it("adds, reorders, and removes segments", () => {
    const { ed } = editor();
    ed.addMode(WALK);
    ed.addMode(RUN);
    ed.addMode(SQUAT);
    ed.move(2, -1);
    expect(ed.segments.map((s) => s.mode)).toEqual([1, 6, 2]);
    ed.remove(1);
    expect(ed.segments.map((s) => s.mode)).toEqual([1, 2]);
  });

  it("dispatch sends a dispatch_recipe event for a valid timeline", () => {
    const { ed, sent } = editor();
    ed.addMode(WALK);
    ed.name = "go";
    ed.seed = 4;
    expect(ed.dispatch(MODES)).toEqual([]);
    expect(sent).toHaveLength(1);
    expect(sent[0]).toMatchObject({ type: "dispatch_recipe" });
  });

  it("dispatch is blocked for a zero-duration segment", () => {
    const { ed, sent } = editor();
    ed.addMode(WALK);
    ed.update(0, "duration_s", 0);
    const errors = ed.dispatch(MODES);
    expect(errors.length).toBeGreaterThan(0);
    expect(errors[0].field).toBe("duration_s");
    expect(sent).toHaveLength(0);
  });
});
