/** Wire types for clonemator-proto/1. */

export const PROTOCOL = "clonemator-proto/1";

export type WireVec = [number, number, number];
export type WireQuat = [number, number, number, number]; // w, x, y, z

export interface WirePose {
  p: WireVec;
  q: WireQuat;
}

export interface WireBody {
  head: WirePose;
  left: WirePose;
  right: WirePose;
  lg: boolean;
  rg: boolean;
}

export interface WireClone {
  id: number;
  root: WirePose;
  body: WireBody;
  mode: "static" | "synchronous" | "replayed";
  recording: number | null;
  mirror: boolean;
  scale: number;
  group: number | null;
  color: number;
}

export interface WireObject {
  id: number;
  tag: string;
  pose: WirePose;
  grabbable: boolean;
  scalar_state: Record<string, number>;
  held_by: number | null;
}

export interface WireAvatar {
  id: number;
  root: WirePose;
  body: WireBody;
  scale: number;
  controlled: number | null;
}

export interface Snapshot {
  tick: number;
  avatar: WireAvatar;
  clones: Record<string, WireClone>;
  objects: Record<string, WireObject>;
  groups: Record<string, number[]>;
  recorder: { active: boolean; scope: string };
  recordings: [number, number, string, number][]; // id, duration, scope, frames
}

export interface StateMessage extends Partial<Snapshot> {
  v: string;
  type: "state";
  mode: "full" | "delta";
  tick: number;
  changed?: { clones?: Record<string, WireClone>; objects?: Record<string, WireObject> };
  removed?: { clones?: string[]; objects?: string[] };
}

export interface EventMessage {
  v: string;
  type: "event";
  event: {
    kind: string;
    seq?: number;
    result?: unknown;
    code?: string;
    detail?: string;
    [key: string]: unknown;
  };
}

export interface WelcomeMessage {
  v: string;
  type: "welcome";
  role: "controller" | "observer";
}

export type ServerMessage = StateMessage | EventMessage | WelcomeMessage;

export interface CommandPayload {
  op: string;
  [key: string]: unknown;
}
