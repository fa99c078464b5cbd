/** Command palette: every operation the protocol offers, reachable by button
 * or shortcut. Builders read the console's current selection and numeric
 * fields and return a command payload, or null while context is missing. */

import type { CommandPayload } from "./protocol.js";

export interface PaletteContext {
  /** selected clone ids, in click order */
  selection: number[];
  /** selected group id, when a grouped clone is selected */
  selectedGroup: number | null;
  /** selected world object id */
  selectedObject: number | null;
  /** second selected object (relative spawning source) */
  referenceObject: number | null;
  /** ground point under the mouse cursor */
  groundTarget: [number, number, number] | null;
  /** numeric fields of the panel */
  scale: number;
  phaseDelta: number;
  yawStep: number;
  /** recording chosen in the recordings panel */
  selectedRecording: number | null;
  /** apply target: clicked clone, its group, or the avatar itself */
  applyTo: "clone" | "group" | "self";
  snap: "none" | "grid" | "nearest_object";
  extendedScope: boolean;
}

export interface PaletteAction {
  op: string;
  label: string;
  key: string; // display shortcut
  build: (ctx: PaletteContext) => CommandPayload | null;
}

const needClone = (ctx: PaletteContext): number | null =>
  ctx.selection.length > 0 ? ctx.selection[ctx.selection.length - 1] : null;

export const PALETTE_ACTIONS: PaletteAction[] = [
  {
    op: "spawn_direct",
    label: "Spawn here (step back)",
    key: "1",
    build: () => ({ op: "spawn_direct" }),
  },
  {
    op: "spawn_indirect",
    label: "Spawn at cursor",
    key: "2",
    build: (ctx) =>
      ctx.groundTarget
        ? {
            op: "spawn_indirect",
            target: { p: [ctx.groundTarget[0], 0, ctx.groundTarget[2]] },
            snap: ctx.snap,
            scale: ctx.scale,
          }
        : null,
  },
  {
    op: "spawn_auto",
    label: "Auto-spawn over same-tag objects",
    key: "3",
    build: (ctx) =>
      ctx.selectedObject !== null ? { op: "spawn_auto", selected: ctx.selectedObject } : null,
  },
  {
    op: "spawn_relative",
    label: "Spawn relative (reference, target)",
    key: "4",
    build: (ctx) =>
      ctx.referenceObject !== null && ctx.selectedObject !== null
        ? { op: "spawn_relative", reference: ctx.referenceObject, target: ctx.selectedObject }
        : null,
  },
  {
    op: "set_mode",
    label: "Cycle mode static/sync (replay via panel)",
    key: "m",
    build: (ctx) => {
      const clone = needClone(ctx);
      if (clone === null) return null;
      if (ctx.selectedRecording !== null) {
        return { op: "set_mode", clone, kind: "replayed", recording: ctx.selectedRecording };
      }
      return { op: "set_mode", clone, kind: "synchronous" };
    },
  },
  {
    op: "set_mirror",
    label: "Toggle mirror",
    key: "x",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone === null ? null : { op: "set_mirror", clone, on: true };
    },
  },
  {
    op: "set_scale",
    label: "Set clone scale",
    key: "c",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone === null ? null : { op: "set_scale", clone, s: ctx.scale };
    },
  },
  {
    op: "switch_control",
    label: "Switch control into clone",
    key: "enter",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone === null ? null : { op: "switch_control", target: clone };
    },
  },
  {
    op: "set_group",
    label: "Group selected clones",
    key: "g",
    build: (ctx) =>
      ctx.selection.length >= 2 ? { op: "set_group", members: [...ctx.selection] } : null,
  },
  {
    op: "move",
    label: "Move clone/group to cursor",
    key: "v",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone !== null && ctx.groundTarget
        ? {
            op: "move",
            target: clone,
            new_root: { p: [ctx.groundTarget[0], 0, ctx.groundTarget[2]] },
          }
        : null;
    },
  },
  {
    op: "duplicate",
    label: "Duplicate clone/group at offset",
    key: "d",
    build: (ctx) => {
      const target = ctx.selectedGroup ?? needClone(ctx);
      return target === null
        ? null
        : { op: "duplicate", target, placement: { p: [2, 0, 0] } };
    },
  },
  {
    op: "remove_clone",
    label: "Remove clone",
    key: "delete",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone === null ? null : { op: "remove_clone", target: clone };
    },
  },
  { op: "undo", label: "Undo last spawn/group/duplicate", key: "z", build: () => ({ op: "undo" }) },
  {
    op: "teleport",
    label: "Teleport avatar to cursor",
    key: "t",
    build: (ctx) =>
      ctx.groundTarget
        ? { op: "teleport", to: [ctx.groundTarget[0], 0, ctx.groundTarget[2]] }
        : null,
  },
  {
    op: "rotate",
    label: "Rotate avatar",
    key: "q/e",
    build: (ctx) => ({ op: "rotate", yaw_delta_deg: ctx.yawStep }),
  },
  {
    op: "step_onto",
    label: "Step onto static clone",
    key: "o",
    build: (ctx) => {
      const clone = needClone(ctx);
      return clone === null ? null : { op: "step_onto", target: clone };
    },
  },
  {
    op: "start_recording",
    label: "Start recording",
    key: "r",
    build: (ctx) => ({
      op: "start_recording",
      scope: ctx.extendedScope ? "extended" : "poses_and_grabs",
    }),
  },
  { op: "stop_recording", label: "Stop recording", key: "shift+r", build: () => ({ op: "stop_recording" }) },
  {
    op: "apply_recording",
    label: "Apply recording (clone/group/self)",
    key: "p",
    build: (ctx) => {
      if (ctx.selectedRecording === null) return null;
      if (ctx.applyTo === "self") {
        return { op: "apply_recording", recording: ctx.selectedRecording, target: "self" };
      }
      if (ctx.applyTo === "group") {
        return ctx.selectedGroup === null
          ? null
          : {
              op: "apply_recording",
              recording: ctx.selectedRecording,
              target: ctx.selectedGroup,
              delta: ctx.phaseDelta,
            };
      }
      const clone = needClone(ctx);
      return clone === null
        ? null
        : { op: "apply_recording", recording: ctx.selectedRecording, target: clone };
    },
  },
  {
    op: "list_recordings",
    label: "Refresh recordings panel",
    key: "l",
    build: () => ({ op: "list_recordings" }),
  },
];

export function fullContext(): PaletteContext {
  // a context with everything selected; used by tests and tooltips
  return {
    selection: [10, 11],
    selectedGroup: 12,
    selectedObject: 5,
    referenceObject: 4,
    groundTarget: [1, 0, 2],
    scale: 2.0,
    phaseDelta: 0.5,
    yawStep: 15,
    selectedRecording: 20,
    applyTo: "group",
    snap: "grid",
    extendedScope: true,
  };
}
