/** Desktop emulation of the three tracked points: keys drive hand raise and
 * extend targets and grabs; locomotion keys become teleport/rotate commands.
 * The engine only ever sees root-local body frames, so the substitution is
 * invisible to it. */

import type { CommandPayload, WireBody, WirePose } from "./protocol.js";

export interface HandTarget {
  raise: number; // 0 rest .. 1 overhead
  extend: number; // 0 body .. 1 arm's length forward
  grab: boolean;
}

export interface InputState {
  head: { crouch: number }; // 0 standing .. 1 deep crouch
  left: HandTarget;
  right: HandTarget;
}

export function restInput(): InputState {
  return {
    head: { crouch: 0 },
    left: { raise: 0, extend: 0, grab: false },
    right: { raise: 0, extend: 0, grab: false },
  };
}

const IDENTITY: [number, number, number, number] = [1, 0, 0, 0];

function handPose(side: "left" | "right", t: HandTarget): WirePose {
  const x = side === "left" ? -0.3 : 0.3;
  return {
    p: [x * (1 - 0.5 * t.extend), 0.6 + 0.9 * t.raise, 0.2 + 0.55 * t.extend],
    q: IDENTITY,
  };
}

/** Root-local body frame for the current targets. */
export function buildInputFrame(state: InputState): WireBody {
  return {
    head: { p: [0, 1.6 - 0.6 * state.head.crouch, 0], q: IDENTITY },
    left: handPose("left", state.left),
    right: handPose("right", state.right),
    lg: state.left.grab,
    rg: state.right.grab,
  };
}

export interface KeyEffect {
  kind: "hold" | "toggle" | "command";
  apply?: (state: InputState, down: boolean) => void;
  command?: (avatarPos: [number, number, number], yawDeg: number) => CommandPayload;
}

/** Continuous bindings; palette shortcuts are handled by the palette itself. */
export const KEY_BINDINGS: Record<string, KeyEffect> = {
  KeyW: {
    kind: "command",
    command: (p, yaw) => ({
      op: "teleport",
      to: [p[0] + 0.25 * Math.sin((yaw * Math.PI) / 180), 0, p[2] + 0.25 * Math.cos((yaw * Math.PI) / 180)],
    }),
  },
  KeyS: {
    kind: "command",
    command: (p, yaw) => ({
      op: "teleport",
      to: [p[0] - 0.25 * Math.sin((yaw * Math.PI) / 180), 0, p[2] - 0.25 * Math.cos((yaw * Math.PI) / 180)],
    }),
  },
  KeyQ: { kind: "command", command: () => ({ op: "rotate", yaw_delta_deg: 15 }) },
  KeyE: { kind: "command", command: () => ({ op: "rotate", yaw_delta_deg: -15 }) },
  KeyF: { kind: "hold", apply: (s, d) => (s.right.raise = d ? 1 : 0) },
  KeyJ: { kind: "hold", apply: (s, d) => (s.left.raise = d ? 1 : 0) },
  KeyG: { kind: "hold", apply: (s, d) => (s.right.extend = d ? 1 : 0) },
  KeyH: { kind: "hold", apply: (s, d) => (s.left.extend = d ? 1 : 0) },
  Space: { kind: "toggle", apply: (s, d) => { if (d) s.right.grab = !s.right.grab; } },
  ShiftLeft: { kind: "toggle", apply: (s, d) => { if (d) s.left.grab = !s.left.grab; } },
  KeyC: { kind: "hold", apply: (s, d) => (s.head.crouch = d ? 1 : 0) },
};

export function handleKey(
  state: InputState,
  code: string,
  down: boolean,
  avatarPos: [number, number, number],
  yawDeg: number,
): CommandPayload | null {
  const effect = KEY_BINDINGS[code];
  if (!effect) return null;
  if (effect.kind === "command") {
    return down && effect.command ? effect.command(avatarPos, yawDeg) : null;
  }
  effect.apply?.(state, down);
  return null;
}
