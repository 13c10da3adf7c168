/** Typed client for the retrieval service's HTTP/JSON API.
 *
 * The fetch implementation is injected so tests can run without a
 * server. All failures (HTTP error statuses and network faults) are
 * normalized to ApiError; status 0 means the request never got a
 * response.
 */

export interface ResultRow {
  object_id: string;
  score: number;
  thumbnail: string;
}

export interface QueryResponse {
  results: ResultRow[];
  scorer: string;
  top_k: number;
  gallery_size: number;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface QueryOptions {
  topK?: number;
  scorer?: string;
  signal?: AbortSignal;
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn: FetchLike = fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn;
  }

  url(path: string): string {
    return this.baseUrl + path;
  }

  async health(): Promise<boolean> {
    try {
      const response = await this.fetchFn(this.url("/api/health"));
      return response.ok;
    } catch {
      return false;
    }
  }

  async query(png: Blob, options: QueryOptions = {}): Promise<QueryResponse> {
    const form = new FormData();
    form.append("file", png, "sketch.png");
    form.append("top_k", String(options.topK ?? 10));
    if (options.scorer) form.append("scorer", options.scorer);

    let response: Response;
    try {
      response = await this.fetchFn(this.url("/api/query"), {
        method: "POST",
        body: form,
        signal: options.signal,
      });
    } catch (err) {
      if (err instanceof DOMException && err.name === "AbortError") throw err;
      throw new ApiError(0, "could not reach the retrieval service");
    }
    if (!response.ok) {
      throw new ApiError(response.status, await describeFailure(response));
    }
    return (await response.json()) as QueryResponse;
  }
}

async function describeFailure(response: Response): Promise<string> {
  try {
    const body = await response.json();
    if (body && typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON body: fall through to the generic message */
  }
  return `server returned HTTP ${response.status}`;
}
