import { describe, expect, it } from "vitest";

import { RegistryRecord, StateRecord } from "../src/protocol.js";
import { parseRecord } from "../src/protocol.js";
import { STALE_AFTER_MS, TRACE_CAPACITY, UiStore } from "../src/state.js";

const REGISTRY: RegistryRecord = {
  type: "registry",
  hash: "abc",
  modes: [
    { index: 0, name: "Slow Walk", group: "Locomotion", supports_speed: true,
      supports_heading: true, supports_height: false, speed_range: [0.3, 0.8],
      default_speed: 0.5, height_range: null, default_height: 0.78 },
    { index: 1, name: "Walk", group: "Locomotion", supports_speed: false,
      supports_heading: true, supports_height: false, speed_range: null,
      default_speed: 1.0, height_range: null, default_height: 0.78 },
    { index: 2, name: "Squat", group: "SquatGround", supports_speed: false,
      supports_heading: false, supports_height: true, speed_range: null,
      default_speed: 0.0, height_range: [0.3, 0.7], default_height: 0.45 },
  ],
};

const STATE: StateRecord = {
  type: "state", status: "keyboard", mode: 1, mode_name: "Walk",
  heading_deg: 30, speed: 1.0, height: 0.78, fps: 50.0,
};

describe("parseRecord", () => {
  it("accepts known record types", () => {
    expect(parseRecord(JSON.stringify(STATE))?.type).toBe("state");
  });
  it("rejects malformed json and unknown types", () => {
    expect(parseRecord("{nope")).toBeNull();
    expect(parseRecord('{"type":"mystery"}')).toBeNull();
    expect(parseRecord("42")).toBeNull();
  });
});

describe("UiStore", () => {
  it("applies registry and state records", () => {
    const store = new UiStore();
    store.apply(REGISTRY, 0);
    expect(store.registry).toHaveLength(3);
    store.apply(STATE, 100);
    expect(store.lastState?.heading_deg).toBe(30);
  });

  it("marks data stale after the threshold", () => {
    const store = new UiStore();
    store.apply(REGISTRY, 0);
    store.apply(STATE, 1000);
    expect(store.isStale(1000 + STALE_AFTER_MS - 1)).toBe(false);
    expect(store.isStale(1000 + STALE_AFTER_MS + 1)).toBe(true);
  });

  it("disables sliders for unsupported capabilities", () => {
    const store = new UiStore();
    store.apply(REGISTRY, 0);
    store.selectMode(1);  // Walk: no speed, no height
    expect(store.speedSlider().enabled).toBe(false);
    expect(store.heightSlider().enabled).toBe(false);
    store.selectMode(0);  // Slow Walk: speed slider on
    expect(store.speedSlider()).toMatchObject({ enabled: true, min: 0.3, max: 0.8 });
    store.selectMode(2);  // Squat: height slider on
    expect(store.heightSlider()).toMatchObject({ enabled: true, min: 0.3, max: 0.7 });
  });

  it("caps the trace ring buffer", () => {
    const store = new UiStore();
    for (let i = 0; i < TRACE_CAPACITY + 50; i += 1) {
      store.apply({ type: "trace", pos: [i, 0], heading: 0, height: 0.78, speed: 1 }, i);
    }
    expect(store.trace).toHaveLength(TRACE_CAPACITY);
    expect(store.trace[0][0]).toBe(50);
  });

  it("tracks recipe progress records", () => {
    const store = new UiStore();
    store.apply({ type: "recipe_status", recipe: "x", active_segment: 1,
                  total: 3, t_ms: 3000 }, 0);
    expect(store.activeSegment).toBe(1);
    store.apply({ type: "recipe_done", recipe: "x", path: "/tmp/p" }, 0);
    expect(store.activeSegment).toBe(-1);
    expect(store.lastPackagePath).toBe("/tmp/p");
  });

  it("groups modes into the four table groups", () => {
    const store = new UiStore();
    store.apply(REGISTRY, 0);
    const groups = store.groups();
    expect(groups.map((g) => g.label)).toEqual(
      ["Locomotion", "Ground", "Boxing", "Styled Walking"]);
    expect(groups[0].modes).toHaveLength(2);
    expect(groups[1].modes).toHaveLength(1);
  });
});
