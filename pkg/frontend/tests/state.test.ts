import { describe, expect, it } from "vitest";

import { beginStroke, clear, emptyState, extendStroke, hasContent,
         replaceWithUpload, undo } from "../src/state.js";

describe("canvas state", () => {
  it("starts empty and blocks submit", () => {
    const state = emptyState();
    expect(state.strokes).toHaveLength(0);
    expect(hasContent(state)).toBe(false);
  });

  it("undo after one stroke returns to an empty canvas", () => {
    let state = beginStroke(emptyState(), "draw", 5, 10, 10);
    state = extendStroke(state, 20, 20);
    state = undo(state);
    expect(state.strokes).toHaveLength(0);
    expect(hasContent(state)).toBe(false);
  });

  it("undo removes only the latest stroke", () => {
    let state = beginStroke(emptyState(), "draw", 5, 1, 1);
    state = beginStroke(state, "draw", 5, 2, 2);
    state = undo(state);
    expect(state.strokes).toHaveLength(1);
    expect(state.strokes[0]!.points[0]).toEqual([1, 1]);
  });

  it("extend appends points to the open stroke without mutating history", () => {
    const first = beginStroke(emptyState(), "draw", 3, 0, 0);
    const extended = extendStroke(first, 5, 5);
    expect(first.strokes[0]!.points).toHaveLength(1);
    expect(extended.strokes[0]!.points).toEqual([[0, 0], [5, 5]]);
  });

  it("erase-only strokes do not count as content", () => {
    const state = beginStroke(emptyState(), "erase", 8, 10, 10);
    expect(hasContent(state)).toBe(false);
  });

  it("clear wipes strokes and upload, blocking submit again", () => {
    let state = beginStroke(emptyState(), "draw", 5, 10, 10);
    state = replaceWithUpload(state, "data:image/png;base64,AAAA");
    state = clear(state);
    expect(hasContent(state)).toBe(false);
    expect(state.background).toBeNull();
  });

  it("upload replaces drawn content and counts as content", () => {
    let state = beginStroke(emptyState(), "draw", 5, 10, 10);
    state = replaceWithUpload(state, "data:image/png;base64,AAAA");
    expect(state.strokes).toHaveLength(0);
    expect(state.background).toContain("data:image/png");
    expect(hasContent(state)).toBe(true);
  });
});
