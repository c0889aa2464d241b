/** Manifest loading and the structural checks a bundle must pass. */

import type { EdgeEntry, SceneEntry, WorldManifest } from "./types.js";

/**
 * Structural validation mirroring the builder's manifest checks (minus file
 * access): scenes and edges are well-formed, ids are unique, edges reference
 * known scenes with in-range displacements, and everything is reachable from
 * the initial scene. Returns human-readable violations; empty means valid.
 */
export function validateManifest(data: unknown): string[] {
  if (typeof data !== "object" || data === null) {
    return ["malformed: manifest is not an object"];
  }
  const m = data as Partial<WorldManifest>;
  if (!Array.isArray(m.scenes) || !Array.isArray(m.edges)) {
    return ["malformed: manifest needs scenes and edges arrays"];
  }
  if (m.scenes.length === 0) {
    return ["malformed: manifest lists no scenes"];
  }
  const violations: string[] = [];
  const ids: string[] = [];
  for (const scene of m.scenes as unknown[]) {
    const s = scene as Partial<SceneEntry>;
    if (typeof s?.id !== "string" || typeof s?.image !== "string") {
      violations.push(`malformed: scene entry ${JSON.stringify(scene)} needs id and image`);
      continue;
    }
    ids.push(s.id);
  }
  const known = new Set(ids);
  for (const id of known) {
    const count = ids.filter((x) => x === id).length;
    if (count > 1) violations.push(`duplicate-id: scene id ${JSON.stringify(id)} appears ${count} times`);
  }

  const adjacency = new Map<string, string[]>();
  for (const edge of m.edges as unknown[]) {
    const e = edge as Partial<EdgeEntry>;
    const step = e?.displacement?.step;
    if (
      typeof e?.from !== "string" ||
      typeof e?.to !== "string" ||
      typeof step !== "number" ||
      typeof e?.displacement?.direction !== "number"
    ) {
      violations.push(`malformed: edge entry ${JSON.stringify(edge)}`);
      continue;
    }
    for (const endpoint of [e.from, e.to]) {
      if (!known.has(endpoint)) {
        violations.push(
          `dangling-edge: edge ${e.from}->${e.to} references unknown id ${JSON.stringify(endpoint)}`,
        );
      }
    }
    if (!(step > 0 && step < 1)) {
      violations.push(`bad-displacement: edge ${e.from}->${e.to} step ${step} outside (0, 1)`);
    }
    const out = adjacency.get(e.from) ?? [];
    out.push(e.to);
    adjacency.set(e.from, out);
  }

  if (ids.length > 0) {
    const initial = ids[0]!;
    const reached = new Set([initial]);
    const frontier = [initial];
    while (frontier.length) {
      for (const next of adjacency.get(frontier.pop()!) ?? []) {
        if (!reached.has(next)) {
          reached.add(next);
          frontier.push(next);
        }
      }
    }
    for (const id of ids) {
      if (!reached.has(id)) {
        violations.push(`unreachable: scene ${JSON.stringify(id)} is not connected from ${JSON.stringify(initial)}`);
      }
    }
  }
  return violations;
}

/** Fetch and validate a manifest; rejects with the violation list joined. */
export async function loadManifest(
  url: string,
  fetchFn: typeof fetch = fetch,
): Promise<WorldManifest> {
  const response = await fetchFn(url);
  if (!response.ok) {
    throw new Error(`failed to load ${url}: HTTP ${response.status}`);
  }
  const data: unknown = await response.json();
  const violations = validateManifest(data);
  if (violations.length) {
    throw new Error(`invalid manifest: ${violations.join("; ")}`);
  }
  return data as WorldManifest;
}
