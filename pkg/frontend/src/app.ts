import { ApiClient } from "./api.js";
import { mountCarousel, mountPalette, mountScenePanel, mountSearchPanel } from "./panels.js";
import { SessionStore } from "./state.js";
import { Viewport } from "./viewport.js";

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const store = new SessionStore(api);

  const left = document.getElementById("left")!;
  const right = document.getElementById("right")!;
  const bottom = document.getElementById("bottom")!;
  const canvas = document.getElementById("viewport") as HTMLCanvasElement;

  const viewport = new Viewport(store, canvas);
  viewport.onPick = (nodeId) => {
    store.toggleSelect(nodeId);
    viewport.attachGizmo(store.state.selection.at(-1) ?? null);
  };
  viewport.onGizmoCommit = (nodeId, transform) => {
    void store.setTransform(nodeId, transform);
  };

  mountSearchPanel(store, left);
  mountScenePanel(store, right, {
    onGizmo: (nodeId) => viewport.attachGizmo(nodeId),
  });
  mountCarousel(store, bottom);
  mountPalette(store, right);

  for (const [key, mode] of [
    ["g", "translate"],
    ["r", "rotate"],
    ["s", "scale"],
  ] as const) {
    window.addEventListener("keydown", (event) => {
      if (event.key === key) viewport.setGizmoMode(mode);
    });
  }

  store.subscribe(() => void viewport.sync());
  await store.init();
}

void boot();
