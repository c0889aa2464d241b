/** URL-hash deep links: #scene=<id>. */

export function encodeHash(sceneId: string): string {
  return `#scene=${encodeURIComponent(sceneId)}`;
}

export function decodeHash(hash: string): string | null {
  const match = /scene=([^&]+)/.exec(hash);
  return match ? decodeURIComponent(match[1]!) : null;
}
