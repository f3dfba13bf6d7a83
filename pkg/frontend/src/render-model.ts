import type { AppState } from "./state";

export interface RenderBox {
  name: string;
  min: [number, number, number];
  max: [number, number, number];
  highlighted: boolean;
  ghost: boolean;
  meshUri?: string;
}

export interface RenderModel {
  boxes: RenderBox[];
  bounds?: { min: [number, number, number]; max: [number, number, number] };
}

/** Pure projection of app state into what the 3D view draws: one solid box
 * per scene object (highlighted when the last edit touched it) plus faded
 * ghost boxes showing the before pose of the displayed plan. */
export function renderModel(state: AppState): RenderModel {
  if (!state.scene) {
    return { boxes: [] };
  }
  const changed = new Set(state.changed);
  const boxes: RenderBox[] = state.scene.objects.map((o) => ({
    name: o.name,
    min: o.min,
    max: o.max,
    highlighted: changed.has(o.name),
    ghost: false,
    meshUri: o.mesh_uri,
  }));
  for (const ghost of state.ghosts) {
    boxes.push({
      name: `${ghost.name} (before)`,
      min: ghost.before[0],
      max: ghost.before[1],
      highlighted: false,
      ghost: true,
    });
  }
  return { boxes, bounds: state.scene.bounds };
}
