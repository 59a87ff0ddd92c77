/** API payload shapes, mirroring the scene-file vocabulary. */

export interface TransformDto {
  t: [number, number, number];
  q: [number, number, number, number];
  s: [number, number, number];
}

export const identityTransform = (): TransformDto => ({
  t: [0, 0, 0],
  q: [1, 0, 0, 0],
  s: [1, 1, 1],
});

export interface EntryDto {
  id: string;
  title: string;
  license: string;
  remix_allowed: boolean;
  thumbnail_url: string;
  files: string[];
}

export interface SearchPageDto {
  query: string;
  page: number;
  entries: EntryDto[];
  total_available: number;
}

export interface JobDto {
  job_id: string;
  entry_id: string;
  state: "queued" | "downloading" | "preprocessing" | "ready" | "failed";
  error: string;
  triangles: number;
  auto_simplified: boolean;
  gathered_into: string[];
}

export interface BoundsDto {
  min: [number, number, number];
  max: [number, number, number];
}

export interface NodeDto {
  id: number;
  kind: "model" | "environment";
  source: Record<string, unknown>;
  transform: TransformDto;
  triangles: number;
  watertight: boolean;
  volume: number;
  bounds: BoundsDto | null;
}

export interface GatheredItemDto {
  index: number;
  entry_id: string;
  title: string;
  triangles: number;
}

export interface SceneDto {
  scene_id: string;
  nodes: NodeDto[];
  gathered: GatheredItemDto[];
  undo_depth: number;
  next_node_id: number;
}

export interface CsgStatsDto {
  input_triangles: [number, number];
  output_triangles: number;
  split_polygons: number;
  watertight: boolean;
}

export interface ApiErrorDto {
  code: string;
  message: string;
  detail?: Record<string, unknown> | null;
}

export type CsgOpName = "union" | "difference" | "intersection";

export interface PrimitiveSpec {
  kind: "cube" | "sphere" | "pyramid" | "cylinder";
  [dimension: string]: string | number;
}
