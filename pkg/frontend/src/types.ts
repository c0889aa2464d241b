/** Wire types for a world bundle's `world.json` manifest. */

export interface SceneEntry {
  id: string;
  image: string;
  prompt?: string;
}

export interface DisplacementEntry {
  step: number;
  direction: number;
}

export interface EdgeEntry {
  from: string;
  to: string;
  displacement: DisplacementEntry;
}

export interface WorldManifest {
  scenes: SceneEntry[];
  edges: EdgeEntry[];
  metadata?: Record<string, unknown>;
}

export interface ViewVector {
  yaw: number;   // radians, azimuth of the view center
  pitch: number; // radians, positive looks up, clamped to (-pi/2, pi/2)
  fovY: number;  // radians, vertical field of view
}
