/**
 * Application wiring: socket -> store, keyboard -> socket, and DOM
 * rendering for the mode library, sliders, telemetry panel, trace canvas,
 * and the timeline editor.
 */

import { TimelineEditor } from "./editor.js";
import { KeyboardCapture } from "./keyboard.js";
import { PanelElements, drawTrace, updatePanel } from "./panel.js";
import { ModeDoc } from "./protocol.js";
import { allowedMovements } from "./recipe.js";
import { BridgeSocket } from "./socket.js";
import { UiStore } from "./state.js";

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

const store = new UiStore();
let drops = 0;

const socket = new BridgeSocket({
  url: `ws://${location.host}/ws`,
  onRecord: (record) => {
    store.apply(record, performance.now());
    if (record.type === "registry") {
      renderLibrary();
      renderSliders();
      renderTimeline();
    }
    if (record.type === "recipe_status" || record.type === "recipe_done") {
      renderTimeline();
    }
    if (record.type === "error") renderErrors();
  },
  onStatus: (status) => {
    $("connection").textContent = status;
    $("connection").className = `conn conn-${status}`;
    if (status !== "open") keyboard.reset();
  },
});

const keyboard = new KeyboardCapture(
  (ev) => socket.send(ev),
  () => { drops += 1; },
);

const editor = new TimelineEditor((ev) => socket.send(ev));

// --- keyboard ---------------------------------------------------------------

window.addEventListener("keydown", (ev) => {
  const target = ev.target as HTMLElement | null;
  if (target && ("value" in target || target.isContentEditable)) return;
  if (keyboard.keyDown(ev)) ev.preventDefault();
});
window.addEventListener("keyup", (ev) => {
  if (keyboard.keyUp(ev)) ev.preventDefault();
});
window.addEventListener("blur", () => keyboard.reset());

// --- mode library ------------------------------------------------------------

let activeGroup = "Locomotion";

function renderLibrary(): void {
  const tabs = $("group-tabs");
  tabs.innerHTML = "";
  for (const group of store.groups()) {
    const tab = document.createElement("button");
    tab.textContent = group.label;
    tab.className = group.id === activeGroup ? "tab active" : "tab";
    tab.onclick = () => { activeGroup = group.id; renderLibrary(); };
    tabs.appendChild(tab);
  }
  const list = $("mode-list");
  list.innerHTML = "";
  const group = store.groups().find((g) => g.id === activeGroup);
  for (const mode of group?.modes ?? []) {
    const item = document.createElement("div");
    item.className = "mode-item" + (mode.index === store.selectedMode ? " selected" : "");
    item.textContent = mode.name;
    item.draggable = true;
    item.title = "click: select for keyboard mode / drag or double-click: add to timeline";
    item.ondragstart = (ev) => {
      ev.dataTransfer?.setData("text/mode-index", String(mode.index));
    };
    item.onclick = () => {
      store.selectMode(mode.index);
      socket.send({ type: "set_mode", mode: mode.index });
      renderLibrary();
      renderSliders();
    };
    item.ondblclick = () => {
      editor.addMode(mode);
      renderTimeline();
    };
    list.appendChild(item);
  }
}

// --- sliders -----------------------------------------------------------------

function bindSlider(inputId: string, valueId: string,
                    cfg: { enabled: boolean; min: number; max: number },
                    current: number,
                    onChange: (v: number) => void): void {
  const input = $(inputId) as HTMLInputElement;
  input.disabled = !cfg.enabled;
  input.min = String(cfg.min);
  input.max = String(cfg.max);
  input.step = "0.01";
  input.value = String(current);
  $(valueId).textContent = current.toFixed(2);
  input.oninput = () => {
    const v = parseFloat(input.value);
    $(valueId).textContent = v.toFixed(2);
    onChange(v);
  };
}

function renderSliders(): void {
  bindSlider("speed-slider", "speed-value", store.speedSlider(), store.speed, (v) => {
    store.speed = v;
    socket.send({ type: "set_speed", value: v });
  });
  bindSlider("height-slider", "height-value", store.heightSlider(), store.height, (v) => {
    store.height = v;
    socket.send({ type: "set_height", value: v });
  });
}

// --- timeline editor ---------------------------------------------------------

function fieldInput(value: number | null, placeholder: string,
                    onChange: (v: number | null) => void): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "number";
  input.step = "0.1";
  input.placeholder = placeholder;
  if (value !== null) input.value = String(value);
  input.onchange = () => {
    onChange(input.value === "" ? null : parseFloat(input.value));
    renderTimeline();
  };
  return input;
}

function renderTimeline(): void {
  const container = $("timeline");
  container.innerHTML = "";
  const errors = editor.validate(store.registry);
  const byField = new Map(errors.map((e) => [`${e.segment}:${e.field}`, e.message]));

  editor.segments.forEach((seg, i) => {
    const mode = store.mode(seg.mode) as ModeDoc;
    const card = document.createElement("div");
    card.className = "segment-card" + (i === store.activeSegment ? " running" : "");

    const head = document.createElement("div");
    head.className = "segment-head";
    head.textContent = `${i + 1}. ${mode.name}`;
    const controls = document.createElement("span");
    for (const [label, action] of [
      ["↑", () => editor.move(i, -1)],
      ["↓", () => editor.move(i, +1)],
      ["×", () => editor.remove(i)],
    ] as Array<[string, () => void]>) {
      const btn = document.createElement("button");
      btn.textContent = label;
      btn.onclick = () => { action(); renderTimeline(); };
      controls.appendChild(btn);
    }
    head.appendChild(controls);
    card.appendChild(head);

    const grid = document.createElement("div");
    grid.className = "segment-grid";

    const addField = (label: string, el: HTMLElement, errKey: string) => {
      const wrap = document.createElement("label");
      wrap.textContent = label;
      wrap.appendChild(el);
      const message = byField.get(`${i}:${errKey}`);
      if (message) {
        wrap.classList.add("invalid");
        const note = document.createElement("small");
        note.textContent = message;
        wrap.appendChild(note);
      }
      grid.appendChild(wrap);
    };

    addField("duration [s]",
             fieldInput(seg.duration_s, "3.0", (v) => editor.update(i, "duration_s", v ?? 0)),
             "duration_s");

    const movementSel = document.createElement("select");
    for (const movement of allowedMovements(mode)) {
      const opt = document.createElement("option");
      opt.value = movement;
      opt.textContent = movement;
      opt.selected = movement === seg.movement;
      movementSel.appendChild(opt);
    }
    movementSel.onchange = () => {
      editor.update(i, "movement", movementSel.value as never);
      renderTimeline();
    };
    addField("movement", movementSel, "movement");

    if (mode.supports_heading) {
      addField("turn [deg]",
               fieldInput(seg.turn_deg, "none", (v) => editor.update(i, "turn_deg", v)),
               "turn_deg");
    }
    if (mode.supports_speed) {
      addField(`speed [${mode.speed_range![0]}..${mode.speed_range![1]}]`,
               fieldInput(seg.speed, String(mode.default_speed), (v) => editor.update(i, "speed", v)),
               "speed");
    }
    if (mode.supports_height) {
      addField(`height [${mode.height_range![0]}..${mode.height_range![1]}]`,
               fieldInput(seg.height, String(mode.default_height), (v) => editor.update(i, "height", v)),
               "height");
    }
    card.appendChild(grid);
    container.appendChild(card);
  });

  const dispatchBtn = $("dispatch") as HTMLButtonElement;
  dispatchBtn.disabled = editor.segments.length === 0 || errors.length > 0;
  $("timeline-summary").textContent = editor.segments.length
    ? `${editor.segments.length} segment(s), ${editor.totalDuration().toFixed(1)} s total`
    : "drag modes here";
}

$("timeline").addEventListener("dragover", (ev) => ev.preventDefault());
$("timeline").addEventListener("drop", (ev) => {
  ev.preventDefault();
  const data = (ev as DragEvent).dataTransfer?.getData("text/mode-index");
  if (!data) return;
  const mode = store.mode(parseInt(data, 10));
  if (mode) {
    editor.addMode(mode);
    renderTimeline();
  }
});

($("dispatch") as HTMLButtonElement).onclick = () => {
  editor.name = ($("recipe-name") as HTMLInputElement).value || "session";
  editor.seed = parseInt(($("recipe-seed") as HTMLInputElement).value || "0", 10);
  const errors = editor.dispatch(store.registry);
  if (errors.length > 0) renderTimeline();
};

($("halt") as HTMLButtonElement).onclick = () => socket.send({ type: "halt" });

function renderErrors(): void {
  $("errors").textContent = store.errors[store.errors.length - 1] ?? "";
}

// --- render loop ---------------------------------------------------------------

const panelEls: PanelElements = {
  status: $("p-status"), movement: $("p-movement"), mode: $("p-mode"),
  heading: $("p-heading"), speed: $("p-speed"), height: $("p-height"),
  fps: $("p-fps"), renderFps: $("p-render-fps"), stale: $("stale-badge"),
  drops: $("p-drops"),
};

let frames = 0;
let renderFps = 0;
let lastFpsAt = performance.now();

function frame(now: number): void {
  frames += 1;
  if (now - lastFpsAt >= 1000) {
    renderFps = frames * 1000 / (now - lastFpsAt);
    frames = 0;
    lastFpsAt = now;
  }
  updatePanel(panelEls, store, keyboard.held, renderFps, drops + socket.dropped, now);
  drawTrace($("trace") as HTMLCanvasElement, store);
  requestAnimationFrame(frame);
}

socket.connect();
requestAnimationFrame(frame);
