/** Console bootstrap: canvas view, palette, recordings panel, input loop.
 * The UI holds no simulation truth; closing it never changes engine state. */

import { defaultCamera, orbit, project, zoom } from "./camera.js";
import { buildInputFrame, handleKey, restInput } from "./input.js";
import { InterpolatingMirror } from "./mirror.js";
import { PALETTE_ACTIONS, type PaletteContext } from "./palette.js";
import type { StateMessage } from "./protocol.js";
import { renderFrame, type TransitionCue } from "./renderer.js";
import { SessionClient } from "./session.js";

const INPUT_HZ = 60;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

export function startApp(): void {
  const canvas = el<HTMLCanvasElement>("view");
  const ctx2d = canvas.getContext("2d")!;
  const status = el<HTMLDivElement>("status");
  const paletteDiv = el<HTMLDivElement>("palette");
  const recordingsDiv = el<HTMLDivElement>("recordings");
  const eventsDiv = el<HTMLDivElement>("events");

  const cam = defaultCamera();
  const mirror = new InterpolatingMirror();
  const input = restInput();
  let transition: TransitionCue | null = null;

  const paletteCtx: PaletteContext = {
    selection: [],
    selectedGroup: null,
    selectedObject: null,
    referenceObject: null,
    groundTarget: null,
    scale: 1.0,
    phaseDelta: 0.5,
    yawStep: 15,
    selectedRecording: null,
    applyTo: "clone",
    snap: "none",
    extendedScope: false,
  };

  const url = new URLSearchParams(location.search).get("server") ?? "ws://127.0.0.1:8765";
  const client = new SessionClient(url, {
    onState: (msg) => mirror.push(msg as StateMessage, performance.now()),
    onEvent: (ev) => {
      if (ev.kind === "switch_transition") {
        transition = {
          startedAt: performance.now(),
          duration: Number(ev.duration ?? 0.3) * 1000,
        };
      }
      const line = document.createElement("div");
      line.textContent = JSON.stringify(ev);
      eventsDiv.prepend(line);
      while (eventsDiv.childElementCount > 12) eventsDiv.lastElementChild?.remove();
      refreshRecordings();
    },
    onStatus: (text) => {
      status.textContent = text;
    },
  });
  client.connect();

  // ------------------------------------------------------------- palette ---
  for (const action of PALETTE_ACTIONS) {
    const button = document.createElement("button");
    button.textContent = `${action.label} [${action.key}]`;
    button.onclick = () => {
      const payload = action.build(paletteCtx);
      if (!payload) {
        status.textContent = `${action.op}: select a target first`;
        return;
      }
      client.command(payload).catch((err) => (status.textContent = `${action.op}: ${err.message}`));
    };
    paletteDiv.appendChild(button);
  }

  function refreshRecordings(): void {
    const snap = mirror.latest;
    if (!snap) return;
    recordingsDiv.replaceChildren();
    for (const [rid, duration, scope, frames] of snap.recordings) {
      const row = document.createElement("button");
      row.textContent = `#${rid} ${duration.toFixed(2)}s ${scope} (${frames}f)`;
      if (paletteCtx.selectedRecording === rid) row.classList.add("selected");
      row.onclick = () => {
        paletteCtx.selectedRecording = rid;
        refreshRecordings();
      };
      recordingsDiv.appendChild(row);
    }
    const applyTo = document.createElement("select");
    for (const opt of ["clone", "group", "self"]) {
      const o = document.createElement("option");
      o.value = opt;
      o.textContent = `apply to ${opt}`;
      applyTo.appendChild(o);
    }
    applyTo.value = paletteCtx.applyTo;
    applyTo.onchange = () => (paletteCtx.applyTo = applyTo.value as "clone" | "group" | "self");
    const delta = document.createElement("input");
    delta.type = "number";
    delta.step = "0.1";
    delta.value = String(paletteCtx.phaseDelta);
    delta.title = "group phase shift (s)";
    delta.onchange = () => (paletteCtx.phaseDelta = Number(delta.value));
    recordingsDiv.append(applyTo, delta);
  }

  // ----------------------------------------------------- mouse and keys ---
  let dragging = false;
  canvas.addEventListener("mousedown", (ev) => {
    if (ev.button === 2) dragging = true;
    if (ev.button === 0) pick(ev.offsetX, ev.offsetY, ev.shiftKey);
  });
  window.addEventListener("mouseup", () => (dragging = false));
  canvas.addEventListener("contextmenu", (ev) => ev.preventDefault());
  canvas.addEventListener("mousemove", (ev) => {
    if (dragging) orbit(cam, -ev.movementX * 0.008, ev.movementY * 0.006);
    paletteCtx.groundTarget = groundUnderCursor(ev.offsetX, ev.offsetY);
  });
  canvas.addEventListener("wheel", (ev) => {
    zoom(cam, ev.deltaY > 0 ? 1.1 : 0.9);
    ev.preventDefault();
  });

  function groundUnderCursor(px: number, py: number): [number, number, number] | null {
    // coarse ray-to-ground: sample the grid for the nearest projected cell
    let best: [number, number, number] | null = null;
    let bestD = 24;
    for (let x = -10; x <= 10; x += 0.5) {
      for (let z = -10; z <= 10; z += 0.5) {
        const pr = project(cam, [x, 0, z], canvas.width, canvas.height);
        if (pr.depth <= 0) continue;
        const d = Math.hypot(pr.x - px, pr.y - py);
        if (d < bestD) {
          bestD = d;
          best = [x, 0, z];
        }
      }
    }
    return best;
  }

  function pick(px: number, py: number, additive: boolean): void {
    const snap = mirror.latest;
    if (!snap) return;
    let picked: { kind: "clone" | "object"; id: number } | null = null;
    let bestD = 18;
    for (const clone of Object.values(snap.clones)) {
      const pr = project(cam, clone.body.head.p, canvas.width, canvas.height);
      if (pr.depth <= 0) continue;
      const d = Math.hypot(pr.x - px, pr.y - py);
      if (d < bestD) {
        bestD = d;
        picked = { kind: "clone", id: clone.id };
      }
    }
    for (const obj of Object.values(snap.objects)) {
      const pr = project(cam, obj.pose.p, canvas.width, canvas.height);
      if (pr.depth <= 0) continue;
      const d = Math.hypot(pr.x - px, pr.y - py);
      if (d < bestD) {
        bestD = d;
        picked = { kind: "object", id: obj.id };
      }
    }
    if (!picked) {
      if (!additive) paletteCtx.selection = [];
      return;
    }
    if (picked.kind === "clone") {
      if (additive) paletteCtx.selection.push(picked.id);
      else paletteCtx.selection = [picked.id];
      paletteCtx.selectedGroup = snap.clones[String(picked.id)]?.group ?? null;
    } else {
      paletteCtx.referenceObject = paletteCtx.selectedObject;
      paletteCtx.selectedObject = picked.id;
    }
  }

  window.addEventListener("keydown", (ev) => {
    if (ev.repeat) return;
    const snap = mirror.latest;
    const p = snap ? snap.avatar.root.p : ([0, 0, 0] as [number, number, number]);
    const yaw = snap ? yawOf(snap.avatar.root.q) : 0;
    const command = handleKey(input, ev.code, true, [p[0], p[1], p[2]], yaw);
    if (command) client.command(command).catch(() => undefined);
  });
  window.addEventListener("keyup", (ev) => {
    handleKey(input, ev.code, false, [0, 0, 0], 0);
  });

  function yawOf(q: [number, number, number, number]): number {
    const [w, , y] = q;
    return (Math.atan2(2 * w * y, 1 - 2 * y * y) * 180) / Math.PI;
  }

  // ------------------------------------------------------------- loops ----
  setInterval(() => client.sendInput(buildInputFrame(input)), 1000 / INPUT_HZ);

  function paint(): void {
    renderFrame(
      ctx2d,
      cam,
      mirror,
      performance.now(),
      paletteCtx.selection,
      transition,
      mirror.latest?.recorder.active ?? false,
    );
    requestAnimationFrame(paint);
  }
  paint();

  // keep the camera following the avatar loosely
  setInterval(() => {
    const snap = mirror.latest;
    if (snap) {
      const p = snap.avatar.root.p;
      cam.target = [
        cam.target[0] + (p[0] - cam.target[0]) * 0.2,
        1.0,
        cam.target[2] + (p[2] - cam.target[2]) * 0.2,
      ];
    }
  }, 250);
}

if (typeof document !== "undefined" && document.getElementById("view")) {
  startApp();
}
