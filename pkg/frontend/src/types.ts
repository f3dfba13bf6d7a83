export interface SceneObjectDoc {
  name: string;
  min: [number, number, number];
  max: [number, number, number];
  mesh_uri?: string;
  orientation?: [number, number, number, number];
  scale?: number;
}

export interface SceneDoc {
  id: string;
  bounds?: { min: [number, number, number]; max: [number, number, number] };
  objects: SceneObjectDoc[];
}

export interface Decomposition {
  translation: [number, number, number];
  rotation: [number, number, number, number];
  scale: number;
}

export interface PlanEntry {
  variable: string;
  object: string;
  payload: unknown;
  cga_expression: string | null;
  decomposition: Decomposition;
  pre_box: [[number, number, number], [number, number, number]];
  post_box: [[number, number, number], [number, number, number]];
  resolver_shift: [number, number, number] | null;
}

export interface EditPlan {
  query: { original: string; template: string; bindings: Record<string, string> };
  strategy: string;
  entries: PlanEntry[];
  resolver_engaged: boolean;
  latency: number;
  retries: number;
  version?: number;
}

export interface EditResponse {
  version: number;
  plan: EditPlan;
  scene: SceneDoc;
}

export type StreamEvent =
  | { type: "scene_update"; version: number; changed: string[]; scene: SceneDoc }
  | { type: "edit_progress"; stage: string };

export interface ApiError {
  code: string;
  message: string;
}

export type StrategyKind = "cga" | "euclidean" | "omniverse";

export const STAGES = ["templated", "prompted", "parsed", "resolved", "committed"] as const;
