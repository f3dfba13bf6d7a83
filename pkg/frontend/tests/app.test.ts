/** Scripted UI test of the acceptance flow against a faked service:
 * load scene -> all objects rendered; submit "move the 'sofa' to the right"
 * -> stages stream, sofa box updates, CGA expression and (t, q, s) shown;
 * undo -> prior view restored; reconnect -> latest version replayed. */
import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api";
import { App } from "../src/app";
import type { RenderModel } from "../src/render-model";
import type { EditPlan, SceneDoc, StreamEvent } from "../src/types";

const INITIAL: SceneDoc = {
  id: "living_room",
  bounds: { min: [0, 0, 0], max: [8, 6, 3] },
  objects: [
    { name: "sofa", min: [1, 0.5, 0], max: [3, 1.5, 0.9] },
    { name: "coffee table", min: [3.6, 2.6, 0], max: [4.6, 3.4, 0.45] },
    { name: "floor lamp", min: [6.5, 0.5, 0], max: [6.9, 0.9, 1.6] },
  ],
};

const EXPRESSION = "1 - 0.5*(1*e1)*einf";

class FakeViewer {
  models: RenderModel[] = [];
  topDown = false;
  update(model: RenderModel) { this.models.push(model); }
  setTopDown(on: boolean) { this.topDown = on; }
  get latest() { return this.models[this.models.length - 1]; }
}

class FakeStream {
  static current: FakeStream | null = null;
  connected = false;
  constructor(public url: string, public handlers: {
    onEvent(event: StreamEvent): void;
    onConnection(connected: boolean): void;
  }) {
    FakeStream.current = this;
  }
  connect() {
    this.connected = true;
    this.handlers.onConnection(true);
    this.handlers.onEvent(service.snapshot());
  }
  close() { this.connected = false; }
  push(event: StreamEvent) { this.handlers.onEvent(event); }
  drop() { this.handlers.onConnection(false); }
}

/** In-memory stand-in for the backend with real version/undo bookkeeping. */
class FakeService {
  version = 1;
  scenes: SceneDoc[] = [INITIAL];
  plans: EditPlan[] = [];

  get scene() { return this.scenes[this.scenes.length - 1]; }

  snapshot(): StreamEvent {
    return { type: "scene_update", version: this.version, changed: [],
             scene: this.scene };
  }

  moveSofaRight(): { plan: EditPlan; version: number; scene: SceneDoc } {
    const sofa = this.scene.objects[0];
    const moved: SceneDoc = {
      ...this.scene,
      objects: this.scene.objects.map((o) =>
        o.name === "sofa"
          ? { ...o, min: [o.min[0] + 1, o.min[1], o.min[2]] as [number, number, number],
              max: [o.max[0] + 1, o.max[1], o.max[2]] as [number, number, number] }
          : o),
    };
    this.scenes.push(moved);
    this.version += 1;
    const plan: EditPlan = {
      query: { original: "move the 'sofa' to the right",
               template: "move the X1 to the right", bindings: { X1: "sofa" } },
      strategy: "cga",
      entries: [{
        variable: "X1", object: "sofa", payload: EXPRESSION,
        cga_expression: EXPRESSION,
        decomposition: { translation: [1, 0, 0], rotation: [1, 0, 0, 0], scale: 1 },
        pre_box: [sofa.min, sofa.max],
        post_box: [moved.objects[0].min, moved.objects[0].max],
        resolver_shift: null,
      }],
      resolver_engaged: false, latency: 0.021, retries: 0, version: this.version,
    };
    this.plans.push(plan);
    return { plan, version: this.version, scene: moved };
  }

  undo(): { version: number; scene: SceneDoc } {
    this.scenes.pop();
    this.version += 1;
    return { version: this.version, scene: this.scene };
  }
}

let service: FakeService;

function fakeFetch(): typeof fetch {
  return (async (url: string, init?: RequestInit) => {
    const respond = (body: unknown, status = 200) =>
      ({ ok: status < 300, status, json: async () => body } as Response);
    if (url.endsWith("/edits") && init?.method === "POST") {
      const stream = FakeStream.current!;
      for (const stage of ["templated", "prompted", "parsed", "resolved", "committed"]) {
        stream.push({ type: "edit_progress", stage });
      }
      const result = service.moveSofaRight();
      stream.push({ type: "scene_update", version: result.version,
                    changed: ["sofa"], scene: result.scene });
      return respond(result);
    }
    if (url.endsWith("/undo") && init?.method === "POST") {
      const result = service.undo();
      FakeStream.current!.push({ type: "scene_update", version: result.version,
                                 changed: ["sofa"], scene: result.scene });
      return respond(result);
    }
    if (url.endsWith("/history")) {
      return respond({ plans: [...service.plans] });
    }
    if (url.includes("/scenes/")) {
      return respond(service.scene);
    }
    return respond({ detail: { code: "unknown", message: url } }, 404);
  }) as typeof fetch;
}

function mount() {
  document.body.innerHTML =
    '<div id="console"></div><div id="history"></div><button id="td"></button>';
  return {
    console: document.getElementById("console")!,
    history: document.getElementById("history")!,
    topDown: document.getElementById("td")!,
  };
}

async function bootApp() {
  const roots = mount();
  const viewer = new FakeViewer();
  const app = new App(roots, {
    api: new ApiClient("", fakeFetch()),
    viewer,
    streamFactory: (url, handlers) => new FakeStream(url, handlers),
    wsBase: "ws://test",
  }, "living_room");
  await app.start();
  return { app, viewer, roots };
}

beforeEach(() => {
  service = new FakeService();
  FakeStream.current = null;
});

describe("app", () => {
  it("renders every fixture object after loading", async () => {
    const { viewer } = await bootApp();
    const names = viewer.latest.boxes.map((b) => b.name);
    expect(names).toEqual(["sofa", "coffee table", "floor lamp"]);
    expect(viewer.latest.bounds).toEqual(INITIAL.bounds);
  });

  it("runs the edit flow: stages, moved box, expression, decomposition", async () => {
    const { app, viewer, roots } = await bootApp();
    const input = roots.console.querySelector<HTMLInputElement>("[data-role=query]")!;
    input.value = "move the 'sofa' to the right";
    roots.console.querySelector<HTMLButtonElement>("[data-role=submit]")!.click();
    await Promise.resolve();
    await new Promise((resolve) => setTimeout(resolve, 0));

    expect(app.state.stages).toEqual(
      ["templated", "prompted", "parsed", "resolved", "committed"]);
    const sofa = viewer.latest.boxes.find((b) => b.name === "sofa")!;
    expect(sofa.min).toEqual([2, 0.5, 0]);
    expect(sofa.highlighted).toBe(true);
    const ghost = viewer.latest.boxes.find((b) => b.name === "sofa (before)")!;
    expect(ghost.min).toEqual([1, 0.5, 0]);

    const expression = roots.console.querySelector(".expression")!;
    expect(expression.textContent).toBe(EXPRESSION);
    const decomposition = roots.console.querySelector(".decomposition")!;
    expect(decomposition.textContent).toContain("t = (1, 0, 0)");
    expect(decomposition.textContent).toContain("q = (1, 0, 0, 0)");
    expect(decomposition.textContent).toContain("s = 1");

    const history = roots.history.querySelectorAll("li");
    expect(history).toHaveLength(1);
    expect(history[0].textContent).toContain("move the 'sofa' to the right");
  });

  it("undo restores the prior view and clears ghosts", async () => {
    const { app, viewer, roots } = await bootApp();
    const input = roots.console.querySelector<HTMLInputElement>("[data-role=query]")!;
    input.value = "move the 'sofa' to the right";
    roots.console.querySelector<HTMLButtonElement>("[data-role=submit]")!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(app.state.version).toBe(2);

    roots.console.querySelector<HTMLButtonElement>("[data-role=undo]")!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(app.state.version).toBe(3);
    const sofa = viewer.latest.boxes.find((b) => b.name === "sofa")!;
    expect(sofa.min).toEqual([1, 0.5, 0]);
    expect(viewer.latest.boxes.some((b) => b.ghost)).toBe(false);
  });

  it("reconnect replays a consistent view at the latest version", async () => {
    const { app } = await bootApp();
    const stream = FakeStream.current!;
    service.moveSofaRight(); // committed while we were away
    stream.drop();
    expect(app.state.connected).toBe(false);
    stream.connect(); // snapshot carries the latest version
    expect(app.state.connected).toBe(true);
    expect(app.state.version).toBe(2);
    expect(app.state.scene?.objects[0].min).toEqual([2, 0.5, 0]);
  });

  it("renders error states distinctly", async () => {
    const { roots, app } = await bootApp();
    const failingFetch = (async () => ({
      ok: false, status: 409,
      json: async () => ({ detail: { code: "unresolvable",
                                     message: "no valid placement" } }),
    })) as unknown as typeof fetch;
    (app as unknown as { options: { api: ApiClient } }).options.api =
      new ApiClient("", failingFetch);
    const input = roots.console.querySelector<HTMLInputElement>("[data-role=query]")!;
    input.value = "move the 'sofa' into the wall";
    roots.console.querySelector<HTMLButtonElement>("[data-role=submit]")!.click();
    await new Promise((resolve) => setTimeout(resolve, 0));
    const errorBox = roots.console.querySelector<HTMLDivElement>("[data-role=error]")!;
    expect(errorBox.hidden).toBe(false);
    expect(errorBox.dataset.code).toBe("unresolvable");
    expect(errorBox.textContent).toContain("no valid placement");
  });

  it("autocomplete inserts stored names quote-wrapped", async () => {
    const { roots } = await bootApp();
    const input = roots.console.querySelector<HTMLInputElement>("[data-role=query]")!;
    input.value = "move the 'cof";
    input.setSelectionRange(input.value.length, input.value.length);
    input.dispatchEvent(new Event("input"));
    const suggestions = roots.console.querySelectorAll("[data-role=suggestions] li");
    expect([...suggestions].map((s) => s.textContent)).toEqual(["coffee table"]);
    (suggestions[0] as HTMLElement).dispatchEvent(
      new MouseEvent("mousedown", { bubbles: true }));
    expect(input.value).toBe("move the 'coffee table'");
  });

  it("top-down toggle reaches the viewer", async () => {
    const { viewer, roots } = await bootApp();
    roots.topDown.click();
    expect(viewer.topDown).toBe(true);
    roots.topDown.click();
    expect(viewer.topDown).toBe(false);
  });
});
