/**
 * Payload types of the archive search API.
 */

export type QueryFamily = "similarity" | "concept" | "person" | "text";

export interface KeyframeDescriptor {
  position: number;
  frame_number: number;
  thumb_url: string;
}

export interface ShotResult {
  rank: number;
  shot_id: string;
  video_id: string;
  shot_index: number;
  start_frame: number;
  end_frame: number;
  score: number;
  keyframes: KeyframeDescriptor[];
}

export interface SearchResponse {
  query_kind: QueryFamily;
  k: number;
  offset: number;
  returned: number;
  results: ShotResult[];
}

export interface LabelEntry {
  label: string;
  postings: number;
}

export interface LabelsResponse {
  kind: "concept" | "person";
  labels: LabelEntry[];
}

/** What the user asked for; the session replays these verbatim. */
export type QueryDescriptor =
  | { family: "concept" | "person"; label: string; k: number; offset: number }
  | { family: "text"; q: string; k: number; offset: number }
  | {
      family: "similar";
      shot?: string;
      position?: number;
      vector?: number[];
      alpha: number;
      k: number;
      offset: number;
    };

export function describeQuery(query: QueryDescriptor): string {
  switch (query.family) {
    case "concept":
    case "person":
      return `${query.family}: ${query.label}`;
    case "text":
      return `text: ${query.q}`;
    case "similar":
      if (query.shot !== undefined) {
        const position = query.position === undefined ? 2 : query.position;
        return `similar to ${query.shot}/${position} (alpha ${query.alpha.toFixed(2)})`;
      }
      return `similar to uploaded vector (alpha ${query.alpha.toFixed(2)})`;
  }
}
