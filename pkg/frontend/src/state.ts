/**
 * Client-side mirror of the bridge session: the latest state record, the
 * mode registry, slider configuration derived from capability flags, the
 * recent base-position trace, and recipe execution progress.
 */

import {
  BridgeRecord, ModeDoc, StateRecord,
} from "./protocol.js";

export const STALE_AFTER_MS = 500;
export const TRACE_CAPACITY = 600;

export interface SliderConfig {
  enabled: boolean;
  min: number;
  max: number;
  value: number;
}

export class UiStore {
  registry: ModeDoc[] = [];
  registryHash = "";
  lastState: StateRecord | null = null;
  lastStateAt = 0;
  trace: Array<[number, number]> = [];
  lastHeading = 0;
  selectedMode = 1;
  speed = 0;
  height = 0;
  activeSegment = -1;
  recipeTotal = 0;
  lastPackagePath = "";
  errors: string[] = [];

  apply(record: BridgeRecord, now: number): void {
    switch (record.type) {
      case "registry": {
        this.registry = record.modes;
        this.registryHash = record.hash;
        const mode = this.mode(this.selectedMode) ?? record.modes[0];
        this.selectMode(mode.index);
        break;
      }
      case "state":
        this.lastState = record;
        this.lastStateAt = now;
        break;
      case "trace":
        this.trace.push([record.pos[0], record.pos[1]]);
        if (this.trace.length > TRACE_CAPACITY) this.trace.shift();
        this.lastHeading = record.heading;
        break;
      case "recipe_status":
        this.activeSegment = record.active_segment;
        this.recipeTotal = record.total;
        break;
      case "recipe_done":
        this.activeSegment = -1;
        this.lastPackagePath = record.path;
        break;
      case "error":
        this.errors.push(record.message);
        if (this.errors.length > 20) this.errors.shift();
        break;
    }
  }

  mode(index: number): ModeDoc | undefined {
    return this.registry.find((m) => m.index === index);
  }

  selectMode(index: number): void {
    const mode = this.mode(index);
    if (!mode) return;
    this.selectedMode = index;
    const speedCfg = this.speedSlider();
    const heightCfg = this.heightSlider();
    this.speed = speedCfg.enabled
      ? Math.min(Math.max(this.speed || speedCfg.value, speedCfg.min), speedCfg.max)
      : mode.default_speed;
    this.height = heightCfg.enabled
      ? Math.min(Math.max(this.height || heightCfg.value, heightCfg.min), heightCfg.max)
      : mode.default_height;
  }

  /** Slider ranges always reflect the selected mode's capability flags. */
  speedSlider(): SliderConfig {
    const mode = this.mode(this.selectedMode);
    if (!mode || !mode.supports_speed || !mode.speed_range) {
      return { enabled: false, min: 0, max: 0, value: mode?.default_speed ?? 0 };
    }
    return {
      enabled: true,
      min: mode.speed_range[0],
      max: mode.speed_range[1],
      value: mode.default_speed,
    };
  }

  heightSlider(): SliderConfig {
    const mode = this.mode(this.selectedMode);
    if (!mode || !mode.supports_height || !mode.height_range) {
      return { enabled: false, min: 0, max: 0, value: mode?.default_height ?? 0 };
    }
    return {
      enabled: true,
      min: mode.height_range[0],
      max: mode.height_range[1],
      value: mode.default_height,
    };
  }

  isStale(now: number): boolean {
    return this.lastState === null || now - this.lastStateAt > STALE_AFTER_MS;
  }

  /** Table-group tabs in display order. */
  groups(): Array<{ id: string; label: string; modes: ModeDoc[] }> {
    const labels: Record<string, string> = {
      Locomotion: "Locomotion",
      SquatGround: "Ground",
      Boxing: "Boxing",
      StyledWalking: "Styled Walking",
    };
    const order = ["Locomotion", "SquatGround", "Boxing", "StyledWalking"];
    return order.map((id) => ({
      id,
      label: labels[id],
      modes: this.registry.filter((m) => m.group === id),
    }));
  }
}
