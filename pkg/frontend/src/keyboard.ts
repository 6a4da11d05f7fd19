/**
 * Keyboard capture: physical key events -> UI event stream.
 *
 * One key_down per physical press (browser auto-repeat and duplicate
 * keydown events are suppressed), one key_up per release.  R is the
 * emergency halt; it also clears the local movement display set because
 * the bridge drops all held keys on R.
 */

import { UiEventOut } from "./protocol.js";

export const KEY_MAP: Record<string, string> = {
  KeyW: "W", KeyA: "A", KeyS: "S", KeyD: "D",
  KeyQ: "Q", KeyE: "E", Comma: ",", Period: ".", KeyR: "R",
};

const MOVEMENT_KEYS = new Set(["W", "A", "S", "D", ",", "."]);

export interface KeyEventLike {
  code: string;
  repeat?: boolean;
}

export class KeyboardCapture {
  /** physically-down mapped keys, for repeat suppression */
  private down = new Set<string>();
  /** movement keys the bridge currently considers held (display mirror) */
  readonly held = new Set<string>();

  constructor(
    private readonly send: (ev: UiEventOut) => boolean,
    private readonly onDrop?: () => void,
  ) {}

  keyDown(ev: KeyEventLike): string | null {
    const key = KEY_MAP[ev.code];
    if (!key || ev.repeat || this.down.has(key)) return null;
    this.down.add(key);
    if (key === "R") {
      this.held.clear();
    } else if (MOVEMENT_KEYS.has(key)) {
      this.held.add(key);
    }
    if (!this.send({ type: "key_down", key })) this.onDrop?.();
    return key;
  }

  keyUp(ev: KeyEventLike): string | null {
    const key = KEY_MAP[ev.code];
    if (!key || !this.down.has(key)) return null;
    this.down.delete(key);
    this.held.delete(key);
    if (!this.send({ type: "key_up", key })) this.onDrop?.();
    return key;
  }

  /** Forget all state, e.g. on reconnect or window blur. */
  reset(): void {
    this.down.clear();
    this.held.clear();
  }
}
