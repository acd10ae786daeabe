/**
 * Typed client for the archive search API. The fetch implementation is
 * injectable so tests can observe requests and script responses.
 */

import type { LabelsResponse, QueryDescriptor, SearchResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = response.statusText || `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") {
      detail = body.detail;
    } else if (body.detail !== undefined) {
      detail = JSON.stringify(body.detail);
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, detail);
}

export class SearchClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  async search(query: QueryDescriptor, signal?: AbortSignal): Promise<SearchResponse> {
    if (query.family === "similar") {
      const body: Record<string, unknown> = {
        alpha: query.alpha,
        k: query.k,
        offset: query.offset,
      };
      if (query.shot !== undefined) {
        body.shot = query.shot;
        body.position = query.position === undefined ? 2 : query.position;
      }
      if (query.vector !== undefined) {
        body.vector = query.vector;
      }
      return this.request<SearchResponse>("/api/search/similar", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
        signal,
      });
    }
    const params = new URLSearchParams({
      k: String(query.k),
      offset: String(query.offset),
    });
    let path: string;
    if (query.family === "text") {
      params.set("q", query.q);
      path = "/api/search/text";
    } else {
      params.set("label", query.label);
      path = `/api/search/${query.family}`;
    }
    return this.request<SearchResponse>(`${path}?${params.toString()}`, { signal });
  }

  async labels(kind: "concept" | "person", signal?: AbortSignal): Promise<LabelsResponse> {
    return this.request<LabelsResponse>(`/api/labels?kind=${kind}`, { signal });
  }
}
