/**
 * Search session state: the current query and its results, the alpha blend
 * slider, and a bounded history stack whose back action replays the stored
 * query against the API (results are reproducible because the service is a
 * pure view of its bundle).
 *
 * Exactly one search is in flight per session; starting a new one aborts the
 * pending request and stale responses are dropped.
 */

import { ApiError, SearchClient } from "./api.js";
import type { QueryDescriptor, SearchResponse } from "./types.js";

export type SessionStatus = "idle" | "loading" | "ready" | "error";

export interface SessionState {
  status: SessionStatus;
  query: QueryDescriptor | null;
  response: SearchResponse | null;
  /** banner text; dismissible, never replaces the page */
  error: string | null;
  alpha: number;
  historyDepth: number;
}

export const HISTORY_LIMIT = 50;

type Listener = (state: SessionState) => void;

export class SearchSession {
  private state: SessionState = {
    status: "idle",
    query: null,
    response: null,
    error: null,
    alpha: 1.0,
    historyDepth: 0,
  };
  private history: QueryDescriptor[] = [];
  private listeners: Listener[] = [];
  private generation = 0;
  private pending: AbortController | null = null;
  /** the query whose results are on screen; failed queries never set this */
  private lastCompleted: QueryDescriptor | null = null;

  constructor(private readonly client: SearchClient) {}

  getState(): SessionState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch, historyDepth: this.history.length };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  setAlpha(alpha: number): void {
    this.update({ alpha: Math.min(1, Math.max(0, alpha)) });
  }

  dismissError(): void {
    this.update({ error: null });
  }

  /** Run a query; the prior completed query is pushed onto the history. */
  async run(query: QueryDescriptor): Promise<void> {
    const previous = this.lastCompleted;
    await this.execute(query, () => {
      if (previous) {
        this.history.push(previous);
        if (this.history.length > HISTORY_LIMIT) {
          this.history.splice(0, this.history.length - HISTORY_LIMIT);
        }
      }
    });
  }

  /** Similarity search seeded by a rendered card's keyframe. */
  async pivot(shot: string, position: number, k = 100): Promise<void> {
    await this.run({
      family: "similar",
      shot,
      position,
      alpha: this.state.alpha,
      k,
      offset: 0,
    });
  }

  get canGoBack(): boolean {
    return this.history.length > 0;
  }

  /** Replay the most recent history entry; reproduces identical results. */
  async back(): Promise<void> {
    const query = this.history.pop();
    if (!query) {
      return;
    }
    const ok = await this.execute(query, () => {});
    if (!ok) {
      this.history.push(query); // failed replay stays available
      this.update({});
    }
  }

  private async execute(query: QueryDescriptor, onSuccess: () => void): Promise<boolean> {
    this.pending?.abort();
    const controller = new AbortController();
    this.pending = controller;
    const generation = ++this.generation;
    this.update({ status: "loading", query, error: null });
    try {
      const response = await this.client.search(query, controller.signal);
      if (generation !== this.generation) {
        return false; // a newer search superseded this one
      }
      onSuccess();
      this.lastCompleted = query;
      this.update({ status: "ready", query, response, error: null });
      return true;
    } catch (err) {
      if (generation !== this.generation) {
        return false; // aborted by a newer search
      }
      // failure keeps the current results; only the banner changes
      const message = err instanceof ApiError ? err.detail : String(err);
      this.update({
        status: this.state.response ? "ready" : "error",
        error: message,
      });
      return false;
    } finally {
      if (this.pending === controller) {
        this.pending = null;
      }
    }
  }
}
