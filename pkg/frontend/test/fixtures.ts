import type { WorldManifest } from "../src/types.js";

/** The six-scene chain 1->2->3->4->5->6 a builder export produces. */
export function chainManifest(): WorldManifest {
  const ids = ["1", "2", "3", "4", "5", "6"];
  return {
    scenes: ids.map((id) => ({
      id,
      image: `scenes/${id}.png`,
      prompt: "a quiet desert",
    })),
    edges: ids.slice(0, -1).map((id, i) => ({
      from: id,
      to: ids[i + 1]!,
      displacement: { step: 0.3, direction: 0 },
    })),
    metadata: {
      created_at: "1970-01-01T00:00:00+00:00",
      tool_version: "0.1.0",
      remap_method: "oracle3d",
      partial: false,
    },
  };
}
