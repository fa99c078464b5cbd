/** Orbit camera and perspective projection for the canvas view. +y is up. */

import type { WireVec } from "./protocol.js";

export interface OrbitCamera {
  target: WireVec;
  yaw: number; // radians around +y
  pitch: number; // radians above the horizon
  distance: number;
  fov: number; // vertical, radians
}

export function defaultCamera(): OrbitCamera {
  return { target: [0, 1, 0], yaw: Math.PI / 6, pitch: 0.45, distance: 8, fov: 1.0 };
}

export function orbit(cam: OrbitCamera, dYaw: number, dPitch: number): void {
  cam.yaw += dYaw;
  cam.pitch = Math.max(-1.4, Math.min(1.4, cam.pitch + dPitch));
}

export function zoom(cam: OrbitCamera, factor: number): void {
  cam.distance = Math.max(1, Math.min(60, cam.distance * factor));
}

export function pan(cam: OrbitCamera, dx: number, dz: number): void {
  const c = Math.cos(cam.yaw);
  const s = Math.sin(cam.yaw);
  cam.target = [cam.target[0] + dx * c + dz * s, cam.target[1], cam.target[2] - dx * s + dz * c];
}

export function cameraEye(cam: OrbitCamera): WireVec {
  const cp = Math.cos(cam.pitch);
  return [
    cam.target[0] + cam.distance * cp * Math.sin(cam.yaw),
    cam.target[1] + cam.distance * Math.sin(cam.pitch),
    cam.target[2] + cam.distance * cp * Math.cos(cam.yaw),
  ];
}

export interface Projected {
  x: number;
  y: number;
  depth: number; // distance along the view axis; <= 0 means behind the eye
  scale: number; // pixels per world meter at this depth
}

/** Project a world point to canvas pixels (origin top-left). */
export function project(
  cam: OrbitCamera,
  point: WireVec,
  width: number,
  height: number,
): Projected {
  const eye = cameraEye(cam);
  const rel: WireVec = [point[0] - eye[0], point[1] - eye[1], point[2] - eye[2]];
  // view basis: forward toward the target, right, up
  const f: WireVec = [cam.target[0] - eye[0], cam.target[1] - eye[1], cam.target[2] - eye[2]];
  const fn = Math.hypot(...f) || 1;
  const fwd: WireVec = [f[0] / fn, f[1] / fn, f[2] / fn];
  const right: WireVec = [fwd[2], 0, -fwd[0]];
  const rn = Math.hypot(...right) || 1;
  const r: WireVec = [right[0] / rn, 0, right[2] / rn];
  const up: WireVec = [
    r[1] * fwd[2] - r[2] * fwd[1],
    r[2] * fwd[0] - r[0] * fwd[2],
    r[0] * fwd[1] - r[1] * fwd[0],
  ];
  const cx = rel[0] * r[0] + rel[1] * r[1] + rel[2] * r[2];
  const cy = rel[0] * up[0] + rel[1] * up[1] + rel[2] * up[2];
  const depth = rel[0] * fwd[0] + rel[1] * fwd[1] + rel[2] * fwd[2];
  const focal = height / 2 / Math.tan(cam.fov / 2);
  const safe = Math.max(depth, 1e-6);
  return {
    x: width / 2 + (cx / safe) * focal,
    y: height / 2 - (cy / safe) * focal,
    depth,
    scale: focal / safe,
  };
}
