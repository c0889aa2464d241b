/** Application wiring: manifest, state, renderer, hotspots, and deep links.
 *
 * Every collaborator with a browser-only implementation (fetch, image
 * decoding, WebGL) is injectable, so the whole navigation surface runs under
 * a DOM test environment with fakes.
 */

import { decodeHash, encodeHash } from "./hash.js";
import { computeHotspots } from "./hotspots.js";
import { loadManifest } from "./manifest.js";
import type { SceneRenderer } from "./renderer.js";
import { createWebGLRenderer } from "./renderer.js";
import {
  type Action,
  type ViewerState,
  createInitialState,
  edgesFrom,
  reduce,
  sceneById,
} from "./state.js";
import type { EdgeEntry, WorldManifest } from "./types.js";

export type LoadedImage = TexImageSource & { width: number; height: number };
export type ImageLoader = (url: string) => Promise<LoadedImage>;

export interface ViewerOptions {
  root: HTMLElement;
  manifestUrl?: string;
  fetchFn?: typeof fetch;
  imageLoader?: ImageLoader;
  rendererFactory?: (canvas: HTMLCanvasElement) => SceneRenderer;
  windowRef?: Window;
  /** scene-change presentation; fade is the default, cut is instant */
  transition?: "fade" | "cut";
  /** initial vertical field of view in radians */
  fovY?: number;
}

function defaultImageLoader(url: string): Promise<LoadedImage> {
  return new Promise((resolve, reject) => {
    const image = new Image();
    image.onload = () => resolve(image);
    image.onerror = () => reject(new Error(`missing image: ${url}`));
    image.src = url;
  });
}

export class ViewerApp {
  private readonly opts: Required<Pick<ViewerOptions, "manifestUrl" | "transition">> &
    ViewerOptions;
  private readonly win: Window;
  private manifest: WorldManifest | null = null;
  private state: ViewerState | null = null;
  private renderer: SceneRenderer | null = null;
  private readonly images = new Map<string, Promise<LoadedImage>>();
  private readonly actionLog: Action[] = [];

  readonly canvas: HTMLCanvasElement;
  readonly hud: HTMLElement;
  readonly errorPanel: HTMLElement;
  readonly hotspotLayer: HTMLElement;

  constructor(options: ViewerOptions) {
    this.opts = { manifestUrl: "world.json", transition: "fade", ...options };
    this.win = options.windowRef ?? window;
    this.canvas = this.win.document.createElement("canvas");
    this.canvas.className = "viewer-canvas";
    this.hud = this.win.document.createElement("div");
    this.hud.className = "viewer-hud";
    this.errorPanel = this.win.document.createElement("div");
    this.errorPanel.className = "viewer-error";
    this.errorPanel.style.display = "none";
    this.hotspotLayer = this.win.document.createElement("div");
    this.hotspotLayer.className = "viewer-hotspots";
    for (const el of [this.canvas, this.hotspotLayer, this.hud, this.errorPanel]) {
      options.root.appendChild(el);
    }
  }

  get currentSceneId(): string | null {
    return this.state?.sceneId ?? null;
  }

  get currentState(): ViewerState | null {
    return this.state ? { ...this.state } : null;
  }

  /** The recorded action log; replaying it reproduces the scene sequence. */
  getActionLog(): Action[] {
    return [...this.actionLog];
  }

  async start(): Promise<void> {
    const fetchFn = this.opts.fetchFn ?? this.win.fetch.bind(this.win);
    try {
      this.manifest = await loadManifest(this.opts.manifestUrl, fetchFn);
    } catch (err) {
      this.showError((err as Error).message);
      throw err;
    }
    const factory = this.opts.rendererFactory ?? createWebGLRenderer;
    try {
      this.renderer = factory(this.canvas);
    } catch (err) {
      this.showError((err as Error).message);
      throw err;
    }
    const fromHash = decodeHash(this.win.location.hash);
    this.state = createInitialState(this.manifest, fromHash ?? undefined);
    if (this.opts.fovY !== undefined) {
      this.state = { ...this.state, fovY: this.opts.fovY };
    }
    this.bindInput();
    this.win.addEventListener("hashchange", () => {
      const id = decodeHash(this.win.location.hash);
      if (id !== null && this.state && id !== this.state.sceneId) {
        this.apply({ kind: "jump", sceneId: id });
      }
    });
    await this.showCurrentScene();
  }

  /** Follow an edge; stale edges are ignored with a warning. */
  async navigate(edge: EdgeEntry): Promise<void> {
    await this.apply({ kind: "navigate", from: edge.from, to: edge.to });
  }

  async apply(action: Action): Promise<void> {
    if (!this.manifest || !this.state) return;
    const before = this.state;
    const after = reduce(this.manifest, before, action);
    this.state = after;
    this.actionLog.push(action);
    if (after.sceneId !== before.sceneId) {
      if (this.opts.transition === "fade") {
        this.canvas.classList.add("fading");
      }
      await this.showCurrentScene();
      this.canvas.classList.remove("fading");
    } else {
      this.draw();
    }
  }

  private loadImage(sceneId: string): Promise<LoadedImage> {
    const cached = this.images.get(sceneId);
    if (cached) return cached;
    const scene = sceneById(this.manifest!, sceneId);
    if (!scene) return Promise.reject(new Error(`unknown scene ${sceneId}`));
    const loader = this.opts.imageLoader ?? defaultImageLoader;
    const promise = loader(scene.image);
    this.images.set(sceneId, promise);
    promise.catch(() => this.images.delete(sceneId)); // allow retry
    return promise;
  }

  private async showCurrentScene(): Promise<void> {
    if (!this.manifest || !this.state || !this.renderer) return;
    const id = this.state.sceneId;
    let image: LoadedImage;
    try {
      image = await this.loadImage(id);
    } catch {
      this.showError(`missing image for scene ${id}`);
      return;
    }
    this.errorPanel.style.display = "none";
    this.renderer.setImage(image);
    if (this.win.location.hash !== encodeHash(id)) {
      this.win.location.hash = encodeHash(id);
    }
    this.draw();
    for (const edge of edgesFrom(this.manifest, id)) {
      this.loadImage(edge.to).catch(() => {}); // preload, failures surface on navigate
    }
  }

  private draw(): void {
    if (!this.state || !this.renderer) return;
    this.renderer.render({
      yaw: this.state.yaw,
      pitch: this.state.pitch,
      fovY: this.state.fovY,
    });
    this.layoutHotspots();
    this.updateHud();
  }

  private layoutHotspots(): void {
    if (!this.manifest || !this.state) return;
    this.hotspotLayer.replaceChildren();
    const width = this.canvas.clientWidth || this.canvas.width || 800;
    const height = this.canvas.clientHeight || this.canvas.height || 400;
    const edges = edgesFrom(this.manifest, this.state.sceneId);
    for (const spot of computeHotspots(edges, this.state.yaw, this.state.fovY, width, height)) {
      const button = this.win.document.createElement("button");
      button.className = "hotspot";
      button.dataset["to"] = spot.edge.to;
      button.textContent = `→ ${spot.edge.to}`;
      button.style.left = `${spot.x}px`;
      button.style.top = `${spot.y}px`;
      button.addEventListener("click", () => void this.navigate(spot.edge));
      this.hotspotLayer.appendChild(button);
    }
  }

  private updateHud(): void {
    if (!this.manifest || !this.state) return;
    const moves = edgesFrom(this.manifest, this.state.sceneId).length;
    this.hud.textContent =
      `scene ${this.state.sceneId} · ${moves} move${moves === 1 ? "" : "s"}` +
      " · drag to look";
  }

  private bindInput(): void {
    let last: { x: number; y: number } | null = null;
    this.canvas.addEventListener("pointerdown", (e) => {
      last = { x: e.clientX, y: e.clientY };
    });
    this.canvas.addEventListener("pointermove", (e) => {
      if (!last || !this.state) return;
      const scale = this.state.fovY / Math.max(this.canvas.clientHeight || 400, 1);
      void this.apply({
        kind: "look",
        dyaw: (e.clientX - last.x) * scale,
        dpitch: -(e.clientY - last.y) * scale,
      });
      last = { x: e.clientX, y: e.clientY };
    });
    this.canvas.addEventListener("pointerup", () => {
      last = null;
    });
    this.canvas.addEventListener("wheel", (e) => {
      if (!this.state) return;
      const fovY = Math.min(2.4, Math.max(0.35, this.state.fovY * (1 + e.deltaY / 600)));
      this.state = { ...this.state, fovY };
      this.draw();
      e.preventDefault();
    });
  }

  private showError(message: string): void {
    this.errorPanel.textContent = message;
    this.errorPanel.style.display = "block";
  }
}
