/**
 * DOM rendering of highlight spans: the viable prefix in green, the
 * rejected tail in red, and an optional yellow hint with a trailing
 * ellipsis when applying it does not finish the answer yet.
 */

import type { HighlightPayload, HintPayload } from "./api.js";

function span(className: string, text: string): HTMLSpanElement {
  const el = document.createElement("span");
  el.className = className;
  el.textContent = text;
  return el;
}

export function renderHighlight(
  container: HTMLElement,
  text: string,
  highlight: HighlightPayload,
  hint: HintPayload | null = null,
): void {
  container.textContent = "";
  const [greenStart, greenEnd] = highlight.green;
  const [redStart, redEnd] = highlight.red;
  if (greenEnd > greenStart) {
    container.appendChild(span("hl-green", text.slice(greenStart, greenEnd)));
  }
  if (redEnd > redStart) {
    container.appendChild(span("hl-red", text.slice(redStart, redEnd)));
  }
  if (hint && hint.payload) {
    container.appendChild(span("hl-hint", hint.payload));
    if (!hint.is_final) {
      container.appendChild(span("hl-ellipsis", "…"));
    }
  }
}

/** Concatenated text of the green and red segments (must equal the input). */
export function highlightedInput(container: HTMLElement): string {
  return Array.from(container.querySelectorAll(".hl-green, .hl-red"))
    .map((el) => el.textContent ?? "")
    .join("");
}
