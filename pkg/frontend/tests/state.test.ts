import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { SELECTION_COLORS, SessionStore } from "../src/state.js";
import type { SceneDto } from "../src/types.js";

function sceneWith(nodeIds: number[], gathered = 0, undoDepth = 0): SceneDto {
  return {
    scene_id: "s",
    nodes: nodeIds.map((id) => ({
      id,
      kind: "model",
      source: { type: "primitive" },
      transform: { t: [0, 0, 0], q: [1, 0, 0, 0], s: [1, 1, 1] },
      triangles: 12,
      watertight: true,
      volume: 1,
      bounds: { min: [0, 0, 0], max: [1, 1, 1] },
    })),
    gathered: Array.from({ length: gathered }, (_, index) => ({
      index,
      entry_id: `e${index}`,
      title: `Item ${index}`,
      triangles: 12,
    })),
    undo_depth: undoDepth,
    next_node_id: Math.max(0, ...nodeIds) + 1,
  };
}

function makeStore(): SessionStore {
  return new SessionStore(new ApiClient("http://unused.invalid"));
}

describe("selection rules", () => {
  it("keeps order and replaces the oldest beyond two", () => {
    const store = makeStore();
    store.applyScene(sceneWith([1, 2, 3]));
    store.toggleSelect(1);
    store.toggleSelect(2);
    expect(store.state.selection).toEqual([1, 2]);
    store.toggleSelect(3); // third click replaces the oldest
    expect(store.state.selection).toEqual([2, 3]);
  });

  it("deselects on second click", () => {
    const store = makeStore();
    store.applyScene(sceneWith([1, 2]));
    store.toggleSelect(1);
    store.toggleSelect(1);
    expect(store.state.selection).toEqual([]);
  });

  it("assigns two distinct operand colors in selection order", () => {
    const store = makeStore();
    store.applyScene(sceneWith([7, 9]));
    store.toggleSelect(9);
    store.toggleSelect(7);
    const colors = store.selectionColors();
    expect(colors.get(9)).toBe(SELECTION_COLORS[0]);
    expect(colors.get(7)).toBe(SELECTION_COLORS[1]);
    expect(colors.get(9)).not.toBe(colors.get(7));
  });

  it("drops selections whose nodes vanished from the snapshot", () => {
    const store = makeStore();
    store.applyScene(sceneWith([1, 2, 3]));
    store.toggleSelect(1);
    store.toggleSelect(2);
    store.applyScene(sceneWith([2, 3]));
    expect(store.state.selection).toEqual([2]);
  });

  it("enables csg only with exactly two selections", () => {
    const store = makeStore();
    store.applyScene(sceneWith([1, 2, 3]));
    expect(store.csgReady).toBe(false);
    store.toggleSelect(1);
    expect(store.csgReady).toBe(false);
    store.toggleSelect(2);
    expect(store.csgReady).toBe(true);
  });
});

describe("carousel", () => {
  it("cycles with wraparound in both directions", () => {
    const store = makeStore();
    store.applyScene(sceneWith([], 3));
    expect(store.state.carouselActive).toBe(0);
    store.cycleCarousel(1);
    store.cycleCarousel(1);
    expect(store.state.carouselActive).toBe(2);
    store.cycleCarousel(1);
    expect(store.state.carouselActive).toBe(0); // wrap forward
    store.cycleCarousel(-1);
    expect(store.state.carouselActive).toBe(2); // wrap backward
  });

  it("clamps the active index when items are discarded", () => {
    const store = makeStore();
    store.applyScene(sceneWith([], 3));
    store.cycleCarousel(2);
    expect(store.state.carouselActive).toBe(2);
    store.applyScene(sceneWith([], 1));
    expect(store.state.carouselActive).toBe(0);
  });

  it("does nothing on an empty carousel", () => {
    const store = makeStore();
    store.applyScene(sceneWith([], 0));
    store.cycleCarousel(1);
    expect(store.state.carouselActive).toBe(0);
  });
});

describe("undo availability", () => {
  it("mirrors the server-reported undo depth", () => {
    const store = makeStore();
    store.applyScene(sceneWith([1], 0, 0));
    expect(store.undoAvailable).toBe(false);
    store.applyScene(sceneWith([1], 0, 4));
    expect(store.undoAvailable).toBe(true);
  });
});
