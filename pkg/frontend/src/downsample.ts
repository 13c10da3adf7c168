/** The one documented transform between canvas and query PNG.
 *
 * The 448x448 RGBA canvas is reduced to a 224x224 grayscale image by
 * averaging each 2x2 pixel block (luminance first, then box mean). No
 * thresholding, cropping, or other preprocessing happens client-side;
 * the server applies its own pipeline to the posted PNG.
 */

export interface GrayImage {
  size: number;
  /** Row-major grayscale bytes, 0 = black ink, 255 = white paper. */
  pixels: Uint8ClampedArray;
}

function luminance(r: number, g: number, b: number): number {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

/** Box-downsample RGBA canvas data by an integer factor to grayscale. */
export function downsampleToQuery(rgba: Uint8ClampedArray, srcSize: number,
                                  dstSize: number): GrayImage {
  if (srcSize % dstSize !== 0) {
    throw new Error(`source size ${srcSize} is not a multiple of ${dstSize}`);
  }
  if (rgba.length !== srcSize * srcSize * 4) {
    throw new Error(`expected ${srcSize * srcSize * 4} RGBA bytes, got ${rgba.length}`);
  }
  const factor = srcSize / dstSize;
  const out = new Uint8ClampedArray(dstSize * dstSize);
  for (let y = 0; y < dstSize; y++) {
    for (let x = 0; x < dstSize; x++) {
      let sum = 0;
      for (let dy = 0; dy < factor; dy++) {
        for (let dx = 0; dx < factor; dx++) {
          const i = ((y * factor + dy) * srcSize + x * factor + dx) * 4;
          sum += luminance(rgba[i]!, rgba[i + 1]!, rgba[i + 2]!);
        }
      }
      out[y * dstSize + x] = Math.round(sum / (factor * factor));
    }
  }
  return { size: dstSize, pixels: out };
}

/** True when any pixel is meaningfully darker than the blank background. */
export function hasInk(image: GrayImage, threshold = 128): boolean {
  for (let i = 0; i < image.pixels.length; i++) {
    if (image.pixels[i]! < threshold) return true;
  }
  return false;
}
