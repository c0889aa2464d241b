/** Screen placement of navigation affordances along the horizon. */

import { wrapAngle } from "./state.js";
import type { EdgeEntry } from "./types.js";

export interface Hotspot {
  edge: EdgeEntry;
  /** horizontal screen position in pixels, 0 = left edge of the viewport */
  x: number;
  /** vertical screen position in pixels */
  y: number;
}

/**
 * Project each outgoing edge's direction angle onto the viewport. Edges
 * outside the horizontal field of view are culled; visible ones sit on a
 * horizon band at 58% viewport height (matching point-and-click affordances
 * rather than precise geometry).
 */
export function computeHotspots(
  edges: readonly EdgeEntry[],
  yaw: number,
  fovY: number,
  viewportWidth: number,
  viewportHeight: number,
): Hotspot[] {
  const aspect = viewportWidth / Math.max(viewportHeight, 1);
  const fovX = 2 * Math.atan(Math.tan(fovY / 2) * aspect);
  const spots: Hotspot[] = [];
  for (const edge of edges) {
    const azimuth = (edge.displacement.direction * Math.PI) / 180;
    const rel = wrapAngle(azimuth - yaw);
    if (Math.abs(rel) > fovX / 2) continue;
    spots.push({
      edge,
      x: (0.5 + rel / fovX) * viewportWidth,
      y: 0.58 * viewportHeight,
    });
  }
  return spots;
}
