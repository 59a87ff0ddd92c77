/** DOM panels: search, carousel, node list with transforms, CSG, and the
 * environment/export palette. Plain DOM, no framework. */

import { SELECTION_COLORS, SessionStore } from "./state.js";
import type { PrimitiveSpec } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function download(filename: string, payload: BlobPart, type: string): void {
  const blob = new Blob([payload], { type });
  const url = URL.createObjectURL(blob);
  const anchor = el("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

export function mountSearchPanel(store: SessionStore, root: HTMLElement): void {
  const panel = el("section", "panel search-panel");
  const header = el("header");
  const input = el("input") as HTMLInputElement;
  input.placeholder = "search the repository…";
  const go = el("button", "", "Search");
  const minimize = el("button", "pill", "–");
  header.append(input, go, minimize);
  const results = el("div", "results");
  panel.append(header, results);
  root.append(panel);

  const submit = () => {
    if (input.value.trim()) void store.search(input.value.trim());
  };
  go.addEventListener("click", submit);
  input.addEventListener("keydown", (e) => {
    if (e.key === "Enter") submit();
  });
  minimize.addEventListener("click", () => store.toggleSearchPanel());

  store.subscribe((state) => {
    panel.classList.toggle("minimized", state.searchMinimized);
    minimize.textContent = state.searchMinimized ? "+" : "–";
    results.replaceChildren();
    for (const entry of state.results?.entries ?? []) {
      const row = el("div", "result");
      const thumb = el("img") as HTMLImageElement;
      thumb.src = store.api.thumbnailUrl(entry.id);
      thumb.width = 48;
      thumb.height = 48;
      const label = el("div", "", entry.title);
      label.title = `${entry.id} (${entry.license})`;
      const pending = state.pendingJobs.find((p) => p.entryId === entry.id);
      const action = el("button", "", pending ? pending.state : "gather");
      action.disabled = Boolean(pending);
      action.addEventListener("click", () => void store.gather(entry));
      row.append(thumb, label, action);
      results.append(row);
    }
  });
}

export function mountCarousel(store: SessionStore, root: HTMLElement): void {
  const bar = el("section", "panel carousel");
  const prev = el("button", "", "◀");
  const label = el("span", "active", "nothing gathered");
  const next = el("button", "", "▶");
  const place = el("button", "", "place");
  const discard = el("button", "", "discard");
  bar.append(prev, label, next, place, discard);
  root.append(bar);

  prev.addEventListener("click", () => store.cycleCarousel(-1));
  next.addEventListener("click", () => store.cycleCarousel(1));
  place.addEventListener("click", () => void store.placeActive());
  discard.addEventListener("click", () => void store.discardActive());

  store.subscribe((state) => {
    const items = state.scene?.gathered ?? [];
    const active = items[state.carouselActive];
    label.textContent = active
      ? `${state.carouselActive + 1}/${items.length}: ${active.title}`
      : "nothing gathered";
    const empty = items.length === 0;
    for (const button of [prev, next, place, discard]) {
      button.disabled = empty || state.busy;
    }
  });
}

export function mountScenePanel(
  store: SessionStore,
  root: HTMLElement,
  hooks: { onGizmo: (nodeId: number | null) => void },
): void {
  const panel = el("section", "panel scene-panel");
  panel.append(el("h3", "", "Scene"));
  const list = el("div", "nodes");
  panel.append(list);

  const csg = el("div", "csg");
  const legend = el("div", "legend");
  const firstTag = el("span", "tag", "1st (kept/minuend)");
  firstTag.style.borderColor = SELECTION_COLORS[0];
  const secondTag = el("span", "tag", "2nd (subtrahend)");
  secondTag.style.borderColor = SELECTION_COLORS[1];
  legend.append(firstTag, secondTag);
  const unionBtn = el("button", "", "union");
  const diffBtn = el("button", "", "difference");
  const interBtn = el("button", "", "intersect");
  const undoBtn = el("button", "", "undo");
  csg.append(legend, unionBtn, diffBtn, interBtn, undoBtn);
  panel.append(csg);
  root.append(panel);

  unionBtn.addEventListener("click", () => void store.applyCsg("union"));
  diffBtn.addEventListener("click", () => void store.applyCsg("difference"));
  interBtn.addEventListener("click", () => void store.applyCsg("intersection"));
  undoBtn.addEventListener("click", () => void store.undo());

  store.subscribe((state) => {
    for (const button of [unionBtn, diffBtn, interBtn]) {
      button.disabled = !store.csgReady;
    }
    undoBtn.disabled = !store.undoAvailable || state.busy;
    list.replaceChildren();
    const colors = store.selectionColors();
    for (const node of state.scene?.nodes ?? []) {
      const row = el("div", "node");
      const color = colors.get(node.id);
      row.style.borderLeft = color ? `4px solid ${color}` : "4px solid transparent";
      const title = el(
        "span",
        "title",
        `#${node.id} ${node.kind === "environment" ? "[env] " : ""}${String(
          (node.source as { type?: string }).type ?? "node",
        )}`,
      );
      if (node.kind === "environment") {
        const badge = el("span", "badge", "retained");
        badge.title = "environment geometry survives boolean operations";
        title.append(badge);
      }
      row.append(title);

      const dims = node.bounds
        ? node.bounds.max.map((v, i) => v - (node.bounds?.min[i] ?? 0))
        : null;
      row.append(
        el(
          "span",
          "dims",
          dims
            ? `${dims.map((v) => v.toFixed(1)).join(" × ")} mm`
            : "(empty)",
        ),
      );

      const select = el("button", "", colors.has(node.id) ? "deselect" : "select");
      select.addEventListener("click", () => {
        store.toggleSelect(node.id);
        hooks.onGizmo(store.state.selection.at(-1) ?? null);
      });
      row.append(select);

      const scaleInput = el("input", "scale") as HTMLInputElement;
      scaleInput.type = "number";
      scaleInput.min = "1";
      scaleInput.value = String(Math.round(node.transform.s[0] * 100));
      scaleInput.title = "uniform scale, percent";
      scaleInput.addEventListener("change", () => {
        const percent = Number(scaleInput.value);
        if (percent > 0) void store.scaleNodePercent(node.id, percent);
      });
      row.append(scaleInput, el("span", "", "%"));

      const dup = el("button", "", "duplicate");
      dup.addEventListener("click", () => void store.duplicateNode(node.id));
      row.append(dup);

      const exportStl = el("button", "", "export STL");
      const exportable = node.kind !== "environment";
      exportStl.disabled = !exportable;
      if (!exportable) exportStl.title = "environment geometry is not exportable";
      exportStl.addEventListener("click", () =>
        void store
          .exportStl(node.id)
          .then((buffer) => download(`node-${node.id}.stl`, buffer, "model/stl")),
      );
      row.append(exportStl);

      const exportG = el("button", "", "export G-code");
      exportG.disabled = !exportable;
      exportG.addEventListener("click", () =>
        void store
          .exportGcode(node.id, {})
          .then((text) => download(`node-${node.id}.gcode`, text, "text/plain")),
      );
      row.append(exportG);
      list.append(row);
    }
  });
}

export function mountPalette(store: SessionStore, root: HTMLElement): void {
  const panel = el("section", "panel palette");
  panel.append(el("h3", "", "Primitives & environment"));

  const primitiveRow = el("div", "row");
  const kind = el("select") as HTMLSelectElement;
  for (const name of ["cube", "sphere", "pyramid", "cylinder"]) {
    const option = el("option", "", name) as HTMLOptionElement;
    option.value = name;
    kind.append(option);
  }
  const dims = el("input") as HTMLInputElement;
  dims.placeholder = "e.g. radius=20 height=60";
  const add = el("button", "", "add");
  primitiveRow.append(kind, dims, add);
  panel.append(primitiveRow);

  add.addEventListener("click", () => {
    const spec: PrimitiveSpec = { kind: kind.value as PrimitiveSpec["kind"] };
    for (const chunk of dims.value.split(/\s+/)) {
      const [key, value] = chunk.split("=");
      if (key && value !== undefined && Number.isFinite(Number(value))) {
        spec[key] = Number(value);
      }
    }
    void store.placePrimitive(spec);
  });

  const envRow = el("div", "row");
  const file = el("input") as HTMLInputElement;
  file.type = "file";
  file.accept = ".stl";
  const pose = el("input") as HTMLInputElement;
  pose.placeholder = 'pose, e.g. {"t":[0,0,-9]}';
  const upload = el("button", "", "import scan");
  envRow.append(file, pose, upload);
  panel.append(envRow);

  upload.addEventListener("click", () => {
    const chosen = file.files?.[0];
    if (!chosen) return;
    let parsed = undefined;
    try {
      parsed = pose.value ? JSON.parse(pose.value) : undefined;
    } catch {
      store.state.lastError = "pose must be JSON";
      return;
    }
    void store.importEnvironment(
      chosen,
      chosen.name,
      parsed && { t: [0, 0, 0], q: [1, 0, 0, 0], s: [1, 1, 1], ...parsed },
      chosen.name.replace(/\.stl$/i, ""),
    );
  });

  const status = el("div", "status");
  panel.append(status);
  root.append(panel);
  store.subscribe((state) => {
    status.textContent = state.lastError
      ? `⚠ ${state.lastError}`
      : state.busy
        ? "working…"
        : "";
  });
}
