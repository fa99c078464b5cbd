/** Canvas renderer: capsule bodies and hand spheres, group-colored outlines,
 * mode badges, the recording indicator, and a field-of-view vignette during
 * control-switch transitions. */

import { type OrbitCamera, project } from "./camera.js";
import { InterpolatingMirror } from "./mirror.js";
import type { Snapshot, WireBody, WireVec } from "./protocol.js";

export const GROUP_PALETTE = [
  "#4da6ff", // 0: ungrouped clones, the base blue outline
  "#ffd24d",
  "#7bd88f",
  "#ff7bd8",
  "#9f7bff",
  "#ff9f4d",
  "#4dffd2",
];

export const MODE_BADGE: Record<string, string> = {
  static: "S",
  synchronous: "Y",
  replayed: "R",
};

export interface TransitionCue {
  startedAt: number; // ms
  duration: number; // ms
}

function groundGrid(ctx: CanvasRenderingContext2D, cam: OrbitCamera, w: number, h: number): void {
  ctx.strokeStyle = "#233";
  ctx.lineWidth = 1;
  for (let i = -10; i <= 10; i++) {
    const a = project(cam, [i, 0, -10], w, h);
    const b = project(cam, [i, 0, 10], w, h);
    const c = project(cam, [-10, 0, i], w, h);
    const d = project(cam, [10, 0, i], w, h);
    if (a.depth > 0 && b.depth > 0) {
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    if (c.depth > 0 && d.depth > 0) {
      ctx.beginPath();
      ctx.moveTo(c.x, c.y);
      ctx.lineTo(d.x, d.y);
      ctx.stroke();
    }
  }
}

function drawBody(
  ctx: CanvasRenderingContext2D,
  cam: OrbitCamera,
  w: number,
  h: number,
  body: WireBody,
  rootP: WireVec,
  color: string,
  badge: string,
  selected: boolean,
): void {
  const head = project(cam, body.head.p, w, h);
  const base = project(cam, [body.head.p[0], Math.max(0, rootP[1]), body.head.p[2]], w, h);
  if (head.depth <= 0) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = selected ? 4 : 2;
  // capsule: trunk line plus head circle
  ctx.beginPath();
  ctx.moveTo(base.x, base.y);
  ctx.lineTo(head.x, head.y);
  ctx.stroke();
  ctx.beginPath();
  ctx.arc(head.x, head.y, Math.max(3, 0.12 * head.scale), 0, Math.PI * 2);
  ctx.stroke();
  for (const side of ["left", "right"] as const) {
    const hand = project(cam, body[side].p, w, h);
    if (hand.depth <= 0) continue;
    ctx.beginPath();
    ctx.moveTo(head.x, head.y);
    ctx.lineTo(hand.x, hand.y);
    ctx.stroke();
    ctx.fillStyle = (side === "left" ? body.lg : body.rg) ? "#fff" : color;
    ctx.beginPath();
    ctx.arc(hand.x, hand.y, Math.max(2, 0.05 * hand.scale), 0, Math.PI * 2);
    ctx.fill();
  }
  if (badge) {
    ctx.fillStyle = color;
    ctx.font = "12px monospace";
    ctx.fillText(badge, head.x + 8, head.y - 8);
  }
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  cam: OrbitCamera,
  mirror: InterpolatingMirror,
  now: number,
  selection: number[],
  transition: TransitionCue | null,
  recordingActive: boolean,
): void {
  const w = ctx.canvas.width;
  const h = ctx.canvas.height;
  ctx.fillStyle = "#0b0f14";
  ctx.fillRect(0, 0, w, h);
  const snap: Snapshot | null = mirror.latest;
  if (!snap) {
    ctx.fillStyle = "#789";
    ctx.font = "14px monospace";
    ctx.fillText("waiting for snapshot...", 20, 30);
    return;
  }
  groundGrid(ctx, cam, w, h);
  for (const obj of Object.values(snap.objects)) {
    const pr = project(cam, obj.pose.p, w, h);
    if (pr.depth <= 0) continue;
    ctx.fillStyle = obj.held_by !== null ? "#e8d44d" : obj.grabbable ? "#9ab" : "#678";
    const r = Math.max(2, 0.07 * pr.scale);
    ctx.fillRect(pr.x - r, pr.y - r, 2 * r, 2 * r);
    ctx.fillStyle = "#567";
    ctx.font = "10px monospace";
    ctx.fillText(obj.tag, pr.x + r + 2, pr.y);
  }
  for (const clone of Object.values(snap.clones)) {
    const body = mirror.displayBody("clone", clone.id, now) ?? clone.body;
    const color = GROUP_PALETTE[clone.color % GROUP_PALETTE.length];
    drawBody(
      ctx,
      cam,
      w,
      h,
      body,
      clone.root.p,
      color,
      MODE_BADGE[clone.mode] ?? "?",
      selection.includes(clone.id),
    );
  }
  const avatarBody = mirror.displayBody("avatar", snap.avatar.id, now) ?? snap.avatar.body;
  drawBody(ctx, cam, w, h, avatarBody, snap.avatar.root.p, "#ffffff", "", false);

  if (recordingActive) {
    ctx.fillStyle = "#ff4d4d";
    ctx.beginPath();
    ctx.arc(22, 22, 8, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#faa";
    ctx.font = "12px monospace";
    ctx.fillText("REC", 36, 26);
  }
  if (transition) {
    const u = (now - transition.startedAt) / transition.duration;
    if (u >= 0 && u <= 1) {
      // brief field-of-view vignette while control switches bodies
      const strength = Math.sin(Math.PI * u);
      const grad = ctx.createRadialGradient(w / 2, h / 2, h * 0.25, w / 2, h / 2, h * 0.75);
      grad.addColorStop(0, "rgba(0,0,0,0)");
      grad.addColorStop(1, `rgba(0,0,0,${0.85 * strength})`);
      ctx.fillStyle = grad;
      ctx.fillRect(0, 0, w, h);
    }
  }
}
