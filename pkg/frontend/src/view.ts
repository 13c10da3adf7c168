/** Pure view-model construction: server responses and failures mapped to
 * what the page renders. Card order always mirrors the server response.
 */

import { ApiError, QueryResponse } from "./api.js";

export interface ResultCard {
  objectId: string;
  score: string;
  thumbnailUrl: string;
  /** Lazy expansion: ring-view grid URLs, row per ring. */
  ringGrid: string[][];
}

export interface ResultViewModel {
  cards: ResultCard[];
  scorer: string;
  topK: number;
  gallerySize: number;
}

export const GRID_RINGS = [2, 3, 4];
export const GRID_VIEWS = [0, 3, 6, 9];

export function formatScore(score: number): string {
  return score.toFixed(4);
}

export function ringGridUrls(baseUrl: string, objectId: string,
                             rings: number[] = GRID_RINGS,
                             views: number[] = GRID_VIEWS): string[][] {
  const root = baseUrl.replace(/\/+$/, "");
  return rings.map((ring) =>
    views.map((view) => `${root}/api/objects/${objectId}/views/${ring}/${view}`));
}

export function buildViewModel(response: QueryResponse, baseUrl: string): ResultViewModel {
  const root = baseUrl.replace(/\/+$/, "");
  return {
    cards: response.results.map((row) => ({
      objectId: row.object_id,
      score: formatScore(row.score),
      thumbnailUrl: root + row.thumbnail,
      ringGrid: ringGridUrls(root, row.object_id),
    })),
    scorer: response.scorer,
    topK: response.top_k,
    gallerySize: response.gallery_size,
  };
}

/** One user-facing sentence for the dismissible error banner. */
export function bannerMessage(err: unknown): string {
  if (err instanceof ApiError) {
    if (err.status === 0) return "Could not reach the retrieval service — is it running?";
    if (err.status >= 500) return `The server failed to process the sketch (HTTP ${err.status}).`;
    return `The server rejected the query: ${err.message}`;
  }
  if (err instanceof Error) return `Unexpected error: ${err.message}`;
  return "Unexpected error.";
}
