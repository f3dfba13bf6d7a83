import { ApiClient, ApiRequestError } from "./api";
import { EditConsole } from "./console";
import { HistoryPanel } from "./history";
import { renderModel, type RenderModel } from "./render-model";
import {
  AppState, initialState, onConnection, onEditFailed, onEditFinished,
  onEditStarted, onStreamEvent, onUndone, showGhostsFor,
} from "./state";
import { SceneStream } from "./stream";
import type { StrategyKind, StreamEvent } from "./types";

export interface ViewerLike {
  update(model: RenderModel): void;
  setTopDown(on: boolean): void;
}

export interface AppOptions {
  api: ApiClient;
  viewer: ViewerLike;
  streamFactory?: (url: string, handlers: {
    onEvent(event: StreamEvent): void;
    onConnection(connected: boolean): void;
  }) => { connect(): void; close(): void };
  wsBase?: string;
}

/** Wires the service to the widgets. All scene state flows in through HTTP
 * responses and the WebSocket stream; the app never does geometry locally. */
export class App {
  state: AppState;
  private console_: EditConsole;
  private history: HistoryPanel;
  private stream: { connect(): void; close(): void } | null = null;

  constructor(
    roots: { console: HTMLElement; history: HTMLElement; topDown?: HTMLElement },
    private options: AppOptions,
    sceneId: string,
  ) {
    this.state = initialState(sceneId);
    this.console_ = new EditConsole(roots.console, {
      onSubmit: (query, strategy) => void this.submit(query, strategy),
      onUndo: () => void this.undo(),
    });
    this.history = new HistoryPanel(roots.history,
      (plan) => this.apply(showGhostsFor(this.state, plan)));
    roots.topDown?.addEventListener("click", () => this.toggleTopDown());
  }

  private topDown = false;

  private toggleTopDown(): void {
    this.topDown = !this.topDown;
    this.options.viewer.setTopDown(this.topDown);
  }

  private apply(next: AppState): void {
    this.state = next;
    this.options.viewer.update(renderModel(next));
    this.console_.update(next);
    this.history.update(next);
    if (next.scene) {
      this.console_.setObjectNames(next.scene.objects.map((o) => o.name));
    }
  }

  async start(): Promise<void> {
    const { api } = this.options;
    const scene = await api.getScene(this.state.sceneId);
    const plans = (await api.history(this.state.sceneId)).plans;
    this.apply({ ...this.state, scene, history: plans });

    const base = this.options.wsBase
      ?? `${location.protocol === "https:" ? "wss" : "ws"}://${location.host}`;
    const url = `${base}/scenes/${encodeURIComponent(this.state.sceneId)}/stream`;
    const handlers = {
      onEvent: (event: StreamEvent) => this.apply(onStreamEvent(this.state, event)),
      onConnection: (connected: boolean) =>
        this.apply(onConnection(this.state, connected)),
    };
    this.stream = this.options.streamFactory
      ? this.options.streamFactory(url, handlers)
      : new SceneStream(url, handlers);
    this.stream.connect();
  }

  async submit(query: string, strategy: StrategyKind): Promise<void> {
    this.apply(onEditStarted(this.state));
    try {
      const response = await this.options.api.submitEdit(
        this.state.sceneId, query, strategy);
      this.apply(onEditFinished(this.state, {
        ...response.plan,
        version: response.version,
      }));
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.apply(onEditFailed(this.state, error.code, error.message));
      } else {
        this.apply(onEditFailed(this.state, "network_error", String(error)));
      }
    }
  }

  async undo(): Promise<void> {
    try {
      await this.options.api.undo(this.state.sceneId);
      this.apply(onUndone(this.state));
    } catch (error) {
      if (error instanceof ApiRequestError) {
        this.apply(onEditFailed(this.state, error.code, error.message));
      }
    }
  }

  stop(): void {
    this.stream?.close();
  }
}
