/** Session state for the editor.
 *
 * Geometry truth lives on the server: every mutation goes through the
 * API and the local state is a cache of the returned scene snapshots.
 * Controls are pessimistic; `busy` is set for the duration of a call.
 */

import { ApiClient } from "./api.js";
import type {
  CsgOpName,
  EntryDto,
  JobDto,
  NodeDto,
  PrimitiveSpec,
  SceneDto,
  SearchPageDto,
  TransformDto,
} from "./types.js";
import { identityTransform } from "./types.js";

export const SELECTION_COLORS: readonly [string, string] = ["#f28c3a", "#3a9df2"];

export interface PendingJob {
  jobId: string;
  entryId: string;
  state: JobDto["state"];
  error: string;
}

export interface UiSessionState {
  query: string;
  results: SearchPageDto | null;
  searchMinimized: boolean;
  carouselActive: number;
  scene: SceneDto | null;
  /** ordered, at most two entries; first is the difference minuend */
  selection: number[];
  pendingJobs: PendingJob[];
  busy: boolean;
  lastError: string;
}

type Listener = (state: UiSessionState) => void;

export class SessionStore {
  state: UiSessionState = {
    query: "",
    results: null,
    searchMinimized: false,
    carouselActive: 0,
    scene: null,
    selection: [],
    pendingJobs: [],
    busy: false,
    lastError: "",
  };

  private listeners = new Set<Listener>();

  constructor(
    readonly api: ApiClient,
    private readonly pollMs = 150,
  ) {}

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private patch(changes: Partial<UiSessionState>): void {
    this.state = { ...this.state, ...changes };
    this.emit();
  }

  /** Reconcile the cached snapshot (and everything derived from it). */
  applyScene(scene: SceneDto): void {
    const ids = new Set(scene.nodes.map((n) => n.id));
    const selection = this.state.selection.filter((id) => ids.has(id));
    const active = Math.min(
      this.state.carouselActive,
      Math.max(scene.gathered.length - 1, 0),
    );
    this.patch({ scene, selection, carouselActive: active });
  }

  get undoAvailable(): boolean {
    return (this.state.scene?.undo_depth ?? 0) > 0;
  }

  node(id: number): NodeDto | undefined {
    return this.state.scene?.nodes.find((n) => n.id === id);
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T> {
    this.patch({ busy: true, lastError: "" });
    try {
      return await work();
    } catch (error) {
      this.patch({ lastError: error instanceof Error ? error.message : String(error) });
      throw error;
    } finally {
      this.patch({ busy: false });
    }
  }

  async init(sceneId?: string): Promise<void> {
    await this.guarded(async () => {
      const scene = await this.api.createScene(sceneId);
      this.applyScene(scene);
    });
  }

  async search(query: string, page = 0): Promise<void> {
    await this.guarded(async () => {
      const results = await this.api.search(query, page);
      this.patch({ query, results });
    });
  }

  toggleSearchPanel(): void {
    this.patch({ searchMinimized: !this.state.searchMinimized });
  }

  /** Click a search result: download, then it appears in the carousel. */
  async gather(entry: EntryDto): Promise<void> {
    const sceneId = this.requireScene().scene_id;
    const job = await this.api.gather(entry.id, sceneId);
    this.patch({
      pendingJobs: [
        ...this.state.pendingJobs.filter((p) => p.jobId !== job.job_id),
        { jobId: job.job_id, entryId: entry.id, state: job.state, error: "" },
      ],
    });
    await this.waitForGather(job.job_id, sceneId);
  }

  private async waitForGather(jobId: string, sceneId: string): Promise<void> {
    for (;;) {
      const job = await this.api.job(jobId);
      this.patch({
        pendingJobs: this.state.pendingJobs.map((p) =>
          p.jobId === jobId ? { ...p, state: job.state, error: job.error } : p,
        ),
      });
      if (job.state === "failed") {
        this.patch({ lastError: `download failed: ${job.error}` });
        return;
      }
      if (job.state === "ready" && job.gathered_into.includes(sceneId)) {
        this.patch({
          pendingJobs: this.state.pendingJobs.filter((p) => p.jobId !== jobId),
        });
        this.applyScene(await this.api.scene(sceneId));
        return;
      }
      await new Promise((resolve) => setTimeout(resolve, this.pollMs));
    }
  }

  // -- carousel ------------------------------------------------------------

  cycleCarousel(step: number): void {
    const count = this.state.scene?.gathered.length ?? 0;
    if (count === 0) return;
    const active = (((this.state.carouselActive + step) % count) + count) % count;
    this.patch({ carouselActive: active });
  }

  async placeActive(transform?: TransformDto): Promise<NodeDto | null> {
    const scene = this.requireScene();
    if (scene.gathered.length === 0) return null;
    return this.guarded(async () => {
      const response = await this.api.placeGathered(
        scene.scene_id,
        this.state.carouselActive,
        transform,
      );
      this.applyScene(response.scene);
      return response.node;
    });
  }

  async discardActive(): Promise<void> {
    const scene = this.requireScene();
    if (scene.gathered.length === 0) return;
    await this.guarded(async () => {
      const updated = await this.api.removeGathered(
        scene.scene_id,
        this.state.carouselActive,
      );
      this.applyScene(updated);
    });
  }

  // -- selection (two color-coded operands) ---------------------------------

  toggleSelect(nodeId: number): void {
    const current = [...this.state.selection];
    const index = current.indexOf(nodeId);
    if (index >= 0) {
      current.splice(index, 1);
    } else {
      current.push(nodeId);
      while (current.length > 2) current.shift(); // replace the oldest
    }
    this.patch({ selection: current });
  }

  clearSelection(): void {
    this.patch({ selection: [] });
  }

  /** node id -> outline color; first and second are always distinct. */
  selectionColors(): Map<number, string> {
    const colors = new Map<number, string>();
    this.state.selection.forEach((id, position) => {
      colors.set(id, SELECTION_COLORS[position]);
    });
    return colors;
  }

  get csgReady(): boolean {
    return this.state.selection.length === 2 && !this.state.busy;
  }

  // -- mutations -------------------------------------------------------------

  async placePrimitive(spec: PrimitiveSpec, transform?: TransformDto): Promise<NodeDto> {
    const scene = this.requireScene();
    return this.guarded(async () => {
      const response = await this.api.placePrimitive(scene.scene_id, spec, transform);
      this.applyScene(response.scene);
      return response.node;
    });
  }

  async setTransform(nodeId: number, transform: TransformDto): Promise<NodeDto> {
    const scene = this.requireScene();
    return this.guarded(async () => {
      const response = await this.api.setTransform(scene.scene_id, nodeId, transform);
      this.applyScene(response.scene);
      return response.node;
    });
  }

  /** Numeric entry: uniform percentage scale, e.g. 150 for 150%. */
  async scaleNodePercent(nodeId: number, percent: number): Promise<NodeDto> {
    const node = this.node(nodeId);
    if (!node) throw new Error(`unknown node ${nodeId}`);
    const factor = percent / 100;
    const transform: TransformDto = {
      ...node.transform,
      s: [factor, factor, factor],
    };
    return this.setTransform(nodeId, transform);
  }

  async duplicateNode(nodeId: number): Promise<NodeDto> {
    const scene = this.requireScene();
    return this.guarded(async () => {
      const response = await this.api.duplicate(scene.scene_id, nodeId);
      this.applyScene(response.scene);
      return response.node;
    });
  }

  async applyCsg(op: CsgOpName): Promise<NodeDto> {
    const scene = this.requireScene();
    if (this.state.selection.length !== 2) {
      throw new Error("select exactly two nodes first");
    }
    const [first, second] = this.state.selection;
    return this.guarded(async () => {
      const response = await this.api.applyCsg(scene.scene_id, op, first, second);
      this.applyScene(response.scene);
      this.patch({ selection: [response.node.id] });
      return response.node;
    });
  }

  async undo(): Promise<string> {
    const scene = this.requireScene();
    return this.guarded(async () => {
      const response = await this.api.undo(scene.scene_id);
      this.applyScene(response.scene);
      return response.reverted;
    });
  }

  async importEnvironment(
    file: Blob,
    filename: string,
    pose: TransformDto = identityTransform(),
    label = "environment",
  ): Promise<NodeDto> {
    const scene = this.requireScene();
    return this.guarded(async () => {
      const response = await this.api.importEnvironment(
        scene.scene_id,
        file,
        filename,
        pose,
        label,
      );
      this.applyScene(response.scene);
      return response.node;
    });
  }

  async exportStl(nodeId: number): Promise<ArrayBuffer> {
    const scene = this.requireScene();
    return this.api.nodeMesh(scene.scene_id, nodeId, "world");
  }

  async exportGcode(
    nodeId: number,
    overrides: Record<string, unknown> = {},
  ): Promise<string> {
    const scene = this.requireScene();
    return this.api.exportGcode(scene.scene_id, nodeId, overrides);
  }

  private requireScene(): SceneDto {
    if (!this.state.scene) throw new Error("no active scene");
    return this.state.scene;
  }
}
