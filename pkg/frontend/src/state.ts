/** Viewer state machine: a pure function of (manifest, action sequence). */

import type { EdgeEntry, WorldManifest } from "./types.js";

export interface ViewerState {
  sceneId: string;
  yaw: number;
  pitch: number;
  fovY: number;
}

export type Action =
  | { kind: "navigate"; from: string; to: string }
  | { kind: "look"; dyaw: number; dpitch: number }
  | { kind: "jump"; sceneId: string }; // hash-driven deep link

export const DEFAULT_FOV_Y = (75 * Math.PI) / 180;
const PITCH_LIMIT = Math.PI / 2 - 1e-6;

export function clampPitch(pitch: number): number {
  return Math.max(-PITCH_LIMIT, Math.min(PITCH_LIMIT, pitch));
}

export function wrapAngle(a: number): number {
  const w = (((a + Math.PI) % (2 * Math.PI)) + 2 * Math.PI) % (2 * Math.PI);
  return w - Math.PI;
}

export function sceneById(manifest: WorldManifest, id: string) {
  return manifest.scenes.find((s) => s.id === id);
}

/** Outgoing moves of a scene, in manifest order. */
export function edgesFrom(manifest: WorldManifest, id: string): EdgeEntry[] {
  return manifest.edges.filter((e) => e.from === id);
}

export function createInitialState(
  manifest: WorldManifest,
  sceneId?: string,
): ViewerState {
  const first = manifest.scenes[0];
  if (!first) throw new Error("manifest lists no scenes");
  const id = sceneId !== undefined && sceneById(manifest, sceneId) ? sceneId : first.id;
  return { sceneId: id, yaw: 0, pitch: 0, fovY: DEFAULT_FOV_Y };
}

/**
 * Follow an edge out of the current scene: the target becomes current and
 * the camera yaw aligns with the move direction. A stale edge (one that no
 * longer originates at the current scene) is a warned no-op.
 */
export function navigate(
  manifest: WorldManifest,
  state: ViewerState,
  edge: EdgeEntry,
  warn: (msg: string) => void = console.warn,
): ViewerState {
  const live = edgesFrom(manifest, state.sceneId).some(
    (e) => e.from === edge.from && e.to === edge.to,
  );
  if (edge.from !== state.sceneId || !live) {
    warn(`stale edge ${edge.from}->${edge.to} ignored at scene ${state.sceneId}`);
    return state;
  }
  return {
    ...state,
    sceneId: edge.to,
    yaw: (edge.displacement.direction * Math.PI) / 180,
  };
}

export function reduce(
  manifest: WorldManifest,
  state: ViewerState,
  action: Action,
  warn: (msg: string) => void = console.warn,
): ViewerState {
  switch (action.kind) {
    case "look":
      return {
        ...state,
        yaw: wrapAngle(state.yaw + action.dyaw),
        pitch: clampPitch(state.pitch + action.dpitch),
      };
    case "navigate": {
      const edge = edgesFrom(manifest, state.sceneId).find(
        (e) => e.from === action.from && e.to === action.to,
      );
      if (!edge) {
        warn(`stale edge ${action.from}->${action.to} ignored at scene ${state.sceneId}`);
        return state;
      }
      return navigate(manifest, state, edge, warn);
    }
    case "jump": {
      if (!sceneById(manifest, action.sceneId)) {
        warn(`unknown scene ${action.sceneId} ignored`);
        return state;
      }
      return { ...state, sceneId: action.sceneId };
    }
  }
}

/**
 * Replay a recorded action log from the initial state; returns the visited
 * scene-id sequence (including the initial scene). Pure: identical logs
 * always reproduce identical sequences.
 */
export function replay(
  manifest: WorldManifest,
  actions: readonly Action[],
  startSceneId?: string,
): string[] {
  let state = createInitialState(manifest, startSceneId);
  const visited = [state.sceneId];
  for (const action of actions) {
    const next = reduce(manifest, state, action, () => {});
    if (next.sceneId !== state.sceneId) visited.push(next.sceneId);
    state = next;
  }
  return visited;
}
