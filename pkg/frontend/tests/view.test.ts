import { describe, expect, it } from "vitest";

import { ApiError } from "../src/api.js";
import { bannerMessage, buildViewModel, formatScore, ringGridUrls } from "../src/view.js";

const RESPONSE = {
  results: [
    { object_id: "shape02", score: -0.0123456, thumbnail: "/api/objects/shape02/views/3/0" },
    { object_id: "shape00", score: -0.5, thumbnail: "/api/objects/shape00/views/3/0" },
  ],
  scorer: "fused",
  top_k: 2,
  gallery_size: 20,
};

describe("buildViewModel", () => {
  it("keeps the server's result order", () => {
    const model = buildViewModel(RESPONSE, "http://svc:8000");
    expect(model.cards.map((c) => c.objectId)).toEqual(["shape02", "shape00"]);
    expect(model.scorer).toBe("fused");
    expect(model.gallerySize).toBe(20);
  });

  it("absolutizes thumbnail URLs against the service root", () => {
    const model = buildViewModel(RESPONSE, "http://svc:8000/");
    expect(model.cards[0]!.thumbnailUrl)
      .toBe("http://svc:8000/api/objects/shape02/views/3/0");
  });

  it("builds a ring-view grid per card", () => {
    const model = buildViewModel(RESPONSE, "http://svc:8000");
    const grid = model.cards[0]!.ringGrid;
    expect(grid).toHaveLength(3);
    expect(grid[0]).toHaveLength(4);
    expect(grid[1]![0]).toBe("http://svc:8000/api/objects/shape02/views/3/0");
    expect(grid[2]![3]).toBe("http://svc:8000/api/objects/shape02/views/4/9");
  });
});

describe("ringGridUrls", () => {
  it("honors custom ring and view choices", () => {
    const grid = ringGridUrls("http://x", "obj", [3], [0, 6]);
    expect(grid).toEqual([[
      "http://x/api/objects/obj/views/3/0",
      "http://x/api/objects/obj/views/3/6",
    ]]);
  });
});

describe("formatScore", () => {
  it("renders four decimals", () => {
    expect(formatScore(-0.0123456)).toBe("-0.0123");
    expect(formatScore(1)).toBe("1.0000");
  });
});

describe("bannerMessage", () => {
  it("names unreachable servers", () => {
    expect(bannerMessage(new ApiError(0, "could not reach the retrieval service")))
      .toMatch(/Could not reach/);
  });

  it("labels 5xx as server failures", () => {
    expect(bannerMessage(new ApiError(500, "server returned HTTP 500")))
      .toMatch(/HTTP 500/);
  });

  it("passes 4xx detail through", () => {
    expect(bannerMessage(new ApiError(400, "empty sketch")))
      .toBe("The server rejected the query: empty sketch");
  });

  it("copes with arbitrary errors", () => {
    expect(bannerMessage(new Error("boom"))).toBe("Unexpected error: boom");
    expect(bannerMessage("wat")).toBe("Unexpected error.");
  });
});
