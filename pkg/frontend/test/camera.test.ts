/** Orbit camera math: the target projects to the screen center, depth orders
 * correctly, and orbiting actually moves the eye around the target. */

import { strict as assert } from "node:assert";
import { test } from "node:test";

import { cameraEye, defaultCamera, orbit, project, zoom } from "../src/camera.js";

test("target projects to the viewport center", () => {
  const cam = defaultCamera();
  const pr = project(cam, cam.target, 800, 600);
  assert.ok(Math.abs(pr.x - 400) < 1e-6);
  assert.ok(Math.abs(pr.y - 300) < 1e-6);
  assert.ok(pr.depth > 0);
});

test("nearer points get a larger pixel scale", () => {
  const cam = defaultCamera();
  const eye = cameraEye(cam);
  const toward: [number, number, number] = [
    cam.target[0] + (eye[0] - cam.target[0]) * 0.5,
    cam.target[1] + (eye[1] - cam.target[1]) * 0.5,
    cam.target[2] + (eye[2] - cam.target[2]) * 0.5,
  ];
  const near = project(cam, toward, 800, 600);
  const far = project(cam, cam.target, 800, 600);
  assert.ok(near.scale > far.scale);
});

test("points behind the eye report non-positive depth", () => {
  const cam = defaultCamera();
  const eye = cameraEye(cam);
  const behind: [number, number, number] = [
    eye[0] + (eye[0] - cam.target[0]),
    eye[1] + (eye[1] - cam.target[1]),
    eye[2] + (eye[2] - cam.target[2]),
  ];
  assert.ok(project(cam, behind, 800, 600).depth <= 0);
});

test("orbit moves the eye but keeps the distance", () => {
  const cam = defaultCamera();
  const before = cameraEye(cam);
  orbit(cam, 0.7, 0.1);
  const after = cameraEye(cam);
  assert.notDeepEqual(before, after);
  const d = Math.hypot(
    after[0] - cam.target[0],
    after[1] - cam.target[1],
    after[2] - cam.target[2],
  );
  assert.ok(Math.abs(d - cam.distance) < 1e-9);
});

test("pitch clamps instead of flipping over the pole", () => {
  const cam = defaultCamera();
  orbit(cam, 0, 10);
  assert.ok(cam.pitch <= 1.4);
  orbit(cam, 0, -20);
  assert.ok(cam.pitch >= -1.4);
});

test("zoom clamps to sane bounds", () => {
  const cam = defaultCamera();
  for (let i = 0; i < 100; i++) zoom(cam, 0.5);
  assert.ok(cam.distance >= 1);
  for (let i = 0; i < 100; i++) zoom(cam, 2);
  assert.ok(cam.distance <= 60);
});
