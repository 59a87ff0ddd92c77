/** Typed client for the remix service. All geometry truth lives on the
 * server; this layer only moves payloads. */

import type {
  ApiErrorDto,
  CsgOpName,
  CsgStatsDto,
  JobDto,
  NodeDto,
  PrimitiveSpec,
  SceneDto,
  SearchPageDto,
  TransformDto,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

export interface NodeResponse {
  node: NodeDto;
  scene: SceneDto;
  notes?: string[];
}

export interface CsgResponse {
  node: NodeDto;
  stats: CsgStatsDto;
  scene: SceneDto;
}

export interface UndoResponse {
  reverted: string;
  scene: SceneDto;
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let payload: ApiErrorDto | null = null;
      try {
        payload = (await response.json()) as ApiErrorDto;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(
        response.status,
        payload?.code ?? String(response.status),
        payload?.message ?? response.statusText,
      );
    }
    return response;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const response = await this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()) as T;
  }

  search(query: string, page = 0): Promise<SearchPageDto> {
    return this.postJson("/api/search", { query, page });
  }

  gather(entryId: string, sceneId?: string): Promise<JobDto> {
    return this.postJson("/api/gather", {
      entry_id: entryId,
      scene_id: sceneId ?? null,
    });
  }

  async job(jobId: string): Promise<JobDto> {
    const response = await this.request(`/api/jobs/${jobId}`);
    return (await response.json()) as JobDto;
  }

  createScene(sceneId?: string): Promise<SceneDto> {
    return this.postJson("/api/scenes", { scene_id: sceneId ?? null });
  }

  async scene(sceneId: string): Promise<SceneDto> {
    const response = await this.request(`/api/scenes/${sceneId}`);
    return (await response.json()) as SceneDto;
  }

  placeGathered(
    sceneId: string,
    index: number,
    transform?: TransformDto,
  ): Promise<NodeResponse> {
    return this.postJson(`/api/scenes/${sceneId}/nodes`, {
      source: { kind: "gathered", index },
      ...(transform ? { transform } : {}),
    });
  }

  placePrimitive(
    sceneId: string,
    spec: PrimitiveSpec,
    transform?: TransformDto,
  ): Promise<NodeResponse> {
    return this.postJson(`/api/scenes/${sceneId}/nodes`, {
      source: { kind: "primitive", spec },
      ...(transform ? { transform } : {}),
    });
  }

  removeGathered(sceneId: string, index: number): Promise<SceneDto> {
    return this.postJson(`/api/scenes/${sceneId}/gathered/remove`, { index });
  }

  async setTransform(
    sceneId: string,
    nodeId: number,
    transform: TransformDto,
  ): Promise<NodeResponse> {
    const response = await this.request(
      `/api/scenes/${sceneId}/nodes/${nodeId}/transform`,
      {
        method: "PATCH",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ transform }),
      },
    );
    return (await response.json()) as NodeResponse;
  }

  duplicate(sceneId: string, nodeId: number): Promise<NodeResponse> {
    return this.postJson(`/api/scenes/${sceneId}/nodes/${nodeId}/duplicate`, {});
  }

  applyCsg(
    sceneId: string,
    op: CsgOpName,
    first: number,
    second: number,
  ): Promise<CsgResponse> {
    return this.postJson(`/api/scenes/${sceneId}/csg`, { op, first, second });
  }

  undo(sceneId: string): Promise<UndoResponse> {
    return this.postJson(`/api/scenes/${sceneId}/undo`, {});
  }

  async importEnvironment(
    sceneId: string,
    file: Blob,
    filename: string,
    pose: TransformDto,
    label: string,
  ): Promise<NodeResponse> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("pose", JSON.stringify(pose));
    form.append("label", label);
    const response = await this.request(`/api/scenes/${sceneId}/environment`, {
      method: "POST",
      body: form,
    });
    return (await response.json()) as NodeResponse;
  }

  async nodeMesh(
    sceneId: string,
    nodeId: number,
    frame: "local" | "world" = "local",
  ): Promise<ArrayBuffer> {
    const response = await this.request(
      `/api/scenes/${sceneId}/nodes/${nodeId}/mesh.stl?frame=${frame}`,
    );
    return response.arrayBuffer();
  }

  async exportGcode(
    sceneId: string,
    nodeId: number,
    overrides: Record<string, unknown> = {},
  ): Promise<string> {
    const response = await this.request(
      `/api/scenes/${sceneId}/nodes/${nodeId}/export/gcode`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(overrides),
      },
    );
    return response.text();
  }

  thumbnailUrl(entryId: string): string {
    return `${this.base}/api/thumbnails/${entryId}`;
  }
}
