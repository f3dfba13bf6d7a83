import type { EditPlan, EditResponse, SceneDoc, StrategyKind } from "./types";

export class ApiRequestError extends Error {
  constructor(public code: string, message: string, public status: number) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Thin typed wrapper over the service endpoints; fetch is injectable so
 * tests can run without a network. */
export class ApiClient {
  constructor(private base = "", private fetchFn: FetchLike = fetch.bind(globalThis)) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail = (body as { detail?: { code?: string; message?: string } }).detail ?? {};
      throw new ApiRequestError(detail.code ?? "http_error",
        detail.message ?? `request failed with ${response.status}`,
        response.status);
    }
    return body as T;
  }

  listScenes(): Promise<{ scenes: { id: string; version: number; objects: number }[] }> {
    return this.request("/scenes");
  }

  getScene(id: string): Promise<SceneDoc> {
    return this.request(`/scenes/${encodeURIComponent(id)}`);
  }

  history(id: string): Promise<{ plans: EditPlan[] }> {
    return this.request(`/scenes/${encodeURIComponent(id)}/history`);
  }

  submitEdit(id: string, query: string, strategy?: StrategyKind,
             expectedVersion?: number): Promise<EditResponse> {
    return this.request(`/scenes/${encodeURIComponent(id)}/edits`, {
      method: "POST",
      body: JSON.stringify({
        query,
        strategy: strategy ?? null,
        expected_version: expectedVersion ?? null,
      }),
    });
  }

  undo(id: string): Promise<{ version: number; scene: SceneDoc }> {
    return this.request(`/scenes/${encodeURIComponent(id)}/undo`, { method: "POST" });
  }
}
