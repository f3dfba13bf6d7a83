import { ApiClient } from "./api";
import { App } from "./app";
import { ThreeViewer } from "./viewer";

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const viewerRoot = document.getElementById("viewer")!;
  const consoleRoot = document.getElementById("console")!;
  const historyRoot = document.getElementById("history")!;
  const topDown = document.getElementById("top-down")!;
  const picker = document.getElementById("scene-picker") as HTMLSelectElement;

  const listing = await api.listScenes();
  if (listing.scenes.length === 0) {
    consoleRoot.textContent =
      "No scenes registered. POST a scene document to /scenes first.";
    return;
  }
  const params = new URLSearchParams(location.search);
  const requested = params.get("scene");
  const sceneId = listing.scenes.some((s) => s.id === requested)
    ? requested!
    : listing.scenes[0].id;

  for (const scene of listing.scenes) {
    const option = document.createElement("option");
    option.value = scene.id;
    option.textContent = `${scene.id} (${scene.objects} objects)`;
    option.selected = scene.id === sceneId;
    picker.appendChild(option);
  }
  picker.addEventListener("change", () => {
    params.set("scene", picker.value);
    location.search = params.toString();
  });

  const viewer = new ThreeViewer(viewerRoot);
  const app = new App({ console: consoleRoot, history: historyRoot, topDown },
                      { api, viewer }, sceneId);
  await app.start();
}

boot().catch((error) => {
  document.getElementById("console")!.textContent = `failed to start: ${error}`;
});
