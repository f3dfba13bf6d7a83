import type { EditPlan, SceneDoc, StreamEvent } from "./types";

export interface GhostBox {
  name: string;
  before: [[number, number, number], [number, number, number]];
  after: [[number, number, number], [number, number, number]];
}

export interface AppState {
  sceneId: string;
  version: number;
  scene: SceneDoc | null;
  stages: string[];
  busy: boolean;
  lastPlan: EditPlan | null;
  ghosts: GhostBox[];
  changed: string[];
  history: EditPlan[];
  error: { code: string; message: string } | null;
  connected: boolean;
}

export function initialState(sceneId: string): AppState {
  return {
    sceneId,
    version: 0,
    scene: null,
    stages: [],
    busy: false,
    lastPlan: null,
    ghosts: [],
    changed: [],
    history: [],
    error: null,
    connected: false,
  };
}

/** All state transitions are pure: the UI derives everything from service
 * responses and stream events, never from client-side geometry. */
export function onStreamEvent(state: AppState, event: StreamEvent): AppState {
  if (event.type === "edit_progress") {
    return { ...state, stages: [...state.stages, event.stage], busy: true };
  }
  if (event.version < state.version) {
    return state; // stale replay
  }
  return {
    ...state,
    version: event.version,
    scene: event.scene,
    changed: event.changed,
    busy: false,
  };
}

export function onEditStarted(state: AppState): AppState {
  return { ...state, stages: [], busy: true, error: null };
}

export function onEditFinished(state: AppState, plan: EditPlan): AppState {
  return {
    ...state,
    busy: false,
    lastPlan: plan,
    history: [...state.history, plan],
    ghosts: ghostsFromPlan(plan),
    error: null,
  };
}

export function onEditFailed(state: AppState, code: string, message: string): AppState {
  return { ...state, busy: false, stages: [], error: { code, message } };
}

export function onUndone(state: AppState): AppState {
  return { ...state, ghosts: [], lastPlan: null, changed: [], stages: [], error: null };
}

export function onConnection(state: AppState, connected: boolean): AppState {
  return { ...state, connected };
}

export function showGhostsFor(state: AppState, plan: EditPlan): AppState {
  return { ...state, ghosts: ghostsFromPlan(plan), lastPlan: plan };
}

export function ghostsFromPlan(plan: EditPlan): GhostBox[] {
  return plan.entries.map((entry) => ({
    name: entry.object,
    before: entry.pre_box,
    after: entry.post_box,
  }));
}
