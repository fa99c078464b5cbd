/** Client world mirror: reconstructed from full snapshots plus deltas, never
 * mutated by anything except protocol messages. A small two-snapshot buffer
 * interpolates display poses between the 20 Hz wire updates. */

import type {
  Snapshot,
  StateMessage,
  WireBody,
  WirePose,
  WireQuat,
  WireVec,
} from "./protocol.js";

export function applyStateMessage(mirror: Snapshot | null, msg: StateMessage): Snapshot {
  if (msg.mode === "full") {
    return {
      tick: msg.tick,
      avatar: msg.avatar!,
      clones: { ...msg.clones! },
      objects: { ...msg.objects! },
      groups: { ...msg.groups! },
      recorder: msg.recorder!,
      recordings: msg.recordings ?? [],
    };
  }
  if (!mirror) {
    throw new Error("delta before any full snapshot");
  }
  const next: Snapshot = {
    tick: msg.tick,
    avatar: msg.avatar ?? mirror.avatar,
    clones: { ...mirror.clones },
    objects: { ...mirror.objects },
    groups: msg.groups ?? mirror.groups,
    recorder: msg.recorder ?? mirror.recorder,
    recordings: msg.recordings ?? mirror.recordings,
  };
  if (msg.changed?.clones) Object.assign(next.clones, msg.changed.clones);
  if (msg.changed?.objects) Object.assign(next.objects, msg.changed.objects);
  for (const key of msg.removed?.clones ?? []) delete next.clones[key];
  for (const key of msg.removed?.objects ?? []) delete next.objects[key];
  return next;
}

// ---------------------------------------------------------- interpolation ---

function lerp(a: number, b: number, u: number): number {
  return a + (b - a) * u;
}

export function lerpVec(a: WireVec, b: WireVec, u: number): WireVec {
  return [lerp(a[0], b[0], u), lerp(a[1], b[1], u), lerp(a[2], b[2], u)];
}

export function slerpQuat(a: WireQuat, b: WireQuat, u: number): WireQuat {
  let [bw, bx, by, bz] = b;
  let dot = a[0] * bw + a[1] * bx + a[2] * by + a[3] * bz;
  if (dot < 0) {
    bw = -bw; bx = -bx; by = -by; bz = -bz;
    dot = -dot;
  }
  let ka = 1 - u;
  let kb = u;
  if (dot < 1 - 1e-6) {
    const theta = Math.acos(Math.min(1, dot));
    const s = Math.sin(theta);
    ka = Math.sin((1 - u) * theta) / s;
    kb = Math.sin(u * theta) / s;
  }
  const q: WireQuat = [
    ka * a[0] + kb * bw,
    ka * a[1] + kb * bx,
    ka * a[2] + kb * by,
    ka * a[3] + kb * bz,
  ];
  const n = Math.hypot(q[0], q[1], q[2], q[3]) || 1;
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}

export function lerpPose(a: WirePose, b: WirePose, u: number): WirePose {
  return { p: lerpVec(a.p, b.p, u), q: slerpQuat(a.q, b.q, u) };
}

export function lerpBody(a: WireBody, b: WireBody, u: number): WireBody {
  return {
    head: lerpPose(a.head, b.head, u),
    left: lerpPose(a.left, b.left, u),
    right: lerpPose(a.right, b.right, u),
    lg: b.lg,
    rg: b.rg,
  };
}

interface Buffered {
  at: number; // client receive time, ms
  snapshot: Snapshot;
}

/** Keeps the last two snapshots and renders slightly in the past so display
 * poses glide between wire updates. */
export class InterpolatingMirror {
  latest: Snapshot | null = null;
  private prev: Buffered | null = null;
  private cur: Buffered | null = null;

  constructor(readonly renderDelayMs = 75) {}

  push(msg: StateMessage, now: number): void {
    this.latest = applyStateMessage(this.latest, msg);
    this.prev = this.cur;
    this.cur = { at: now, snapshot: this.latest };
  }

  /** Interpolation factor between the buffered snapshots at display time. */
  blend(now: number): number {
    if (!this.prev || !this.cur || this.cur.at === this.prev.at) return 1;
    const target = now - this.renderDelayMs;
    return Math.max(0, Math.min(1, (target - this.prev.at) / (this.cur.at - this.prev.at)));
  }

  /** Display body for an entity present in both buffered snapshots. */
  displayBody(kind: "avatar" | "clone", id: number, now: number): WireBody | null {
    if (!this.cur) return null;
    const pick = (s: Snapshot): WireBody | null =>
      kind === "avatar" ? s.avatar.body : s.clones[String(id)]?.body ?? null;
    const curBody = pick(this.cur.snapshot);
    if (!curBody) return null;
    const prevBody = this.prev ? pick(this.prev.snapshot) : null;
    if (!prevBody) return curBody;
    return lerpBody(prevBody, curBody, this.blend(now));
  }
}
