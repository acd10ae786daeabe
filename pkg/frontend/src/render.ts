/**
 * Pure view functions: session state in, HTML string out. No reordering,
 * no rescoring - cards appear exactly in API rank order and scores are the
 * API's values shown to three decimals. Keeping these DOM-free makes them
 * directly testable.
 */

import type { SessionState } from "./session.js";
import { describeQuery } from "./types.js";
import type { SearchResponse, ShotResult } from "./types.js";

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function renderBanner(error: string | null): string {
  if (error === null) {
    return "";
  }
  return (
    `<div class="banner" role="alert">` +
    `<span class="banner-text">${escapeHtml(error)}</span>` +
    `<button type="button" class="banner-dismiss" data-action="dismiss">×</button>` +
    `</div>`
  );
}

export function renderCard(result: ShotResult): string {
  const thumbs = result.keyframes
    .map(
      (kf) =>
        `<button type="button" class="thumb" data-action="pivot" ` +
        `data-shot="${escapeHtml(result.shot_id)}" data-position="${kf.position}" ` +
        `title="find shots similar to keyframe ${kf.position}">` +
        `<img src="${escapeHtml(kf.thumb_url)}" alt="${escapeHtml(result.shot_id)} keyframe ${kf.position}" loading="lazy">` +
        `</button>`,
    )
    .join("");
  return (
    `<article class="card" data-rank="${result.rank}" data-shot="${escapeHtml(result.shot_id)}">` +
    `<header class="card-head">` +
    `<span class="card-rank">#${result.rank}</span>` +
    `<span class="card-shot">${escapeHtml(result.shot_id)}</span>` +
    `<span class="card-score">${result.score.toFixed(3)}</span>` +
    `</header>` +
    `<div class="card-thumbs">${thumbs}</div>` +
    `<footer class="card-frames">frames ${result.start_frame}–${result.end_frame}</footer>` +
    `</article>`
  );
}

export function renderResults(response: SearchResponse): string {
  if (response.results.length === 0) {
    return `<div class="state state-empty">No results for this query.</div>`;
  }
  return `<div class="grid">${response.results.map(renderCard).join("")}</div>`;
}

export function renderApp(state: SessionState): string {
  const banner = renderBanner(state.error);
  const caption = state.query
    ? `<div class="caption">${escapeHtml(describeQuery(state.query))}</div>`
    : "";
  const back = state.historyDepth > 0
    ? `<button type="button" class="back" data-action="back">← back (${state.historyDepth})</button>`
    : "";
  let body: string;
  switch (state.status) {
    case "idle":
      body = `<div class="state state-idle">Search the archive by concept, person, text, or similarity.</div>`;
      break;
    case "loading":
      body = `<div class="state state-loading">Searching…</div>`;
      break;
    case "error":
      body = `<div class="state state-error">The query failed; adjust it and try again.</div>`;
      break;
    case "ready":
      body = state.response
        ? renderResults(state.response)
        : `<div class="state state-empty">No results.</div>`;
      break;
  }
  return `${banner}<div class="toolbar">${back}${caption}</div>${body}`;
}
