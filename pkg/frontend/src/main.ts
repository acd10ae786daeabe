/**
 * Browser wiring: the only module that touches the DOM. Everything it does
 * is delegate to the session store and re-render its state.
 */

import { SearchClient } from "./api.js";
import { renderApp } from "./render.js";
import { SearchSession } from "./session.js";
import type { QueryDescriptor } from "./types.js";

const client = new SearchClient("");
const session = new SearchSession(client);

const form = document.querySelector<HTMLFormElement>("#search-form")!;
const familySelect = document.querySelector<HTMLSelectElement>("#family")!;
const queryInput = document.querySelector<HTMLInputElement>("#query")!;
const alphaSlider = document.querySelector<HTMLInputElement>("#alpha")!;
const alphaValue = document.querySelector<HTMLSpanElement>("#alpha-value")!;
const results = document.querySelector<HTMLDivElement>("#results")!;

const placeholders: Record<string, string> = {
  concept: "concept label, e.g. applause",
  person: "person name, e.g. erich honecker",
  text: "on-screen text, e.g. planerfüllung",
  similar: "shot reference, e.g. video7#12 or video7#12/3",
};

function currentDescriptor(): QueryDescriptor | null {
  const family = familySelect.value;
  const value = queryInput.value.trim();
  if (!value) {
    return null;
  }
  if (family === "concept" || family === "person") {
    return { family, label: value, k: 100, offset: 0 };
  }
  if (family === "text") {
    return { family: "text", q: value, k: 100, offset: 0 };
  }
  // similar-by-shot, optionally "video#index/position"
  const match = value.match(/^(.*)\/(\d)$/);
  const shot = match ? match[1] : value;
  const position = match ? Number(match[2]) : undefined;
  return {
    family: "similar",
    shot,
    position,
    alpha: session.getState().alpha,
    k: 100,
    offset: 0,
  };
}

form.addEventListener("submit", (event) => {
  event.preventDefault();
  const query = currentDescriptor();
  if (query) {
    void session.run(query);
  }
});

familySelect.addEventListener("change", () => {
  queryInput.placeholder = placeholders[familySelect.value] ?? "";
});

alphaSlider.addEventListener("input", () => {
  session.setAlpha(Number(alphaSlider.value) / 100);
  alphaValue.textContent = session.getState().alpha.toFixed(2);
});

results.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) {
    return;
  }
  const action = target.dataset.action;
  if (action === "pivot") {
    void session.pivot(target.dataset.shot!, Number(target.dataset.position));
  } else if (action === "back") {
    void session.back();
  } else if (action === "dismiss") {
    session.dismissError();
  }
});

session.subscribe((state) => {
  results.innerHTML = renderApp(state);
});

queryInput.placeholder = placeholders[familySelect.value] ?? "";
alphaValue.textContent = session.getState().alpha.toFixed(2);
results.innerHTML = renderApp(session.getState());
