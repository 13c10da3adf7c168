import { describe, expect, it } from "vitest";

import { downsampleToQuery, hasInk } from "../src/downsample.js";

function rgbaCanvas(size: number, value: number): Uint8ClampedArray {
  const data = new Uint8ClampedArray(size * size * 4);
  for (let i = 0; i < size * size; i++) {
    data[i * 4] = value;
    data[i * 4 + 1] = value;
    data[i * 4 + 2] = value;
    data[i * 4 + 3] = 255;
  }
  return data;
}

describe("downsampleToQuery", () => {
  it("produces the target size", () => {
    const out = downsampleToQuery(rgbaCanvas(448, 255), 448, 224);
    expect(out.size).toBe(224);
    expect(out.pixels).toHaveLength(224 * 224);
  });

  it("keeps blank paper white (dark-on-light preserved)", () => {
    const out = downsampleToQuery(rgbaCanvas(8, 255), 8, 4);
    expect(Array.from(out.pixels).every((v) => v === 255)).toBe(true);
  });

  it("averages each 2x2 block", () => {
    const data = rgbaCanvas(4, 255);
    // blacken the top-left 2x2 block, half of the top-right block
    for (const [x, y] of [[0, 0], [1, 0], [0, 1], [1, 1], [2, 0], [3, 0]]) {
      const i = (y! * 4 + x!) * 4;
      data[i] = 0; data[i + 1] = 0; data[i + 2] = 0;
    }
    const out = downsampleToQuery(data, 4, 2);
    expect(out.pixels[0]).toBe(0);                 // fully black block
    expect(out.pixels[1]).toBe(128);               // half black → mean 127.5 → 128
    expect(out.pixels[2]).toBe(255);               // untouched paper
    expect(out.pixels[3]).toBe(255);
  });

  it("weights channels by luminance", () => {
    const data = rgbaCanvas(2, 0);
    for (let i = 0; i < 4; i++) data[i * 4 + 1] = 255;  // pure green
    const out = downsampleToQuery(data, 2, 1);
    expect(out.pixels[0]).toBe(Math.round(0.587 * 255));
  });

  it("rejects mismatched sizes", () => {
    expect(() => downsampleToQuery(rgbaCanvas(10, 255), 10, 4)).toThrow(/multiple/);
    expect(() => downsampleToQuery(rgbaCanvas(8, 255), 448, 224)).toThrow(/RGBA bytes/);
  });
});

describe("hasInk", () => {
  it("is false on blank paper", () => {
    expect(hasInk(downsampleToQuery(rgbaCanvas(8, 255), 8, 4))).toBe(false);
  });

  it("is true once a block averages below the threshold", () => {
    const data = rgbaCanvas(8, 255);
    for (const [x, y] of [[0, 0], [1, 0], [0, 1], [1, 1]]) {
      const i = (y! * 8 + x!) * 4;
      data[i] = 0; data[i + 1] = 0; data[i + 2] = 0;
    }
    const out = downsampleToQuery(data, 8, 4);
    expect(out.pixels[0]).toBe(0);
    expect(hasInk(out)).toBe(true);
  });

  it("ignores faint smudges above the threshold", () => {
    const out = downsampleToQuery(rgbaCanvas(8, 200), 8, 4);
    expect(hasInk(out, 128)).toBe(false);
  });
});
