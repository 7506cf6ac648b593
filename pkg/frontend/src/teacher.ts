/**
 * Teacher debugging view: a pattern textarea and a multiline candidate
 * list, re-tested live (debounced) against the service. Each candidate
 * gets a green check or red cross plus its colored segments; syntax
 * errors show a caret under the reported pattern offset.
 */

import type { ApiClient, RegexTestResult } from "./api.js";
import { ApiError } from "./api.js";
import { renderHighlight } from "./highlight.js";

export const DEBOUNCE_MS = 250;

export class TeacherView {
  root: HTMLElement;
  private client: ApiClient;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private generation = 0;

  private pattern!: HTMLTextAreaElement;
  private answers!: HTMLTextAreaElement;
  private rows!: HTMLElement;
  private errorBox!: HTMLElement;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    this.build();
  }

  private build(): void {
    this.root.innerHTML = `
      <div class="teacher">
        <label>Answer template
          <textarea data-role="pattern" rows="3" spellcheck="false"></textarea>
        </label>
        <pre data-role="pattern-error" class="pattern-error" hidden></pre>
        <label>Candidate answers (one per line)
          <textarea data-role="answers" rows="6" spellcheck="false"></textarea>
        </label>
        <div data-role="rows" class="result-rows"></div>
      </div>`;
    this.pattern = this.query("pattern");
    this.answers = this.query("answers");
    this.rows = this.query("rows");
    this.errorBox = this.query("pattern-error");
    const onEdit = () => this.schedule();
    this.pattern.addEventListener("input", onEdit);
    this.answers.addEventListener("input", onEdit);
  }

  private query<T extends HTMLElement>(role: string): T {
    return this.root.querySelector(`[data-role="${role}"]`) as T;
  }

  private schedule(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => void this.refresh(), DEBOUNCE_MS);
  }

  async refresh(): Promise<void> {
    const generation = ++this.generation;
    const pattern = this.pattern.value;
    const lines = this.answers.value.length ? this.answers.value.split("\n") : [];
    if (!pattern) {
      this.rows.textContent = "";
      this.errorBox.hidden = true;
      return;
    }
    try {
      const results = await this.client.testRegex(pattern, lines);
      if (generation !== this.generation) return; // a newer edit superseded us
      this.errorBox.hidden = true;
      this.renderRows(results);
    } catch (err) {
      if (generation !== this.generation) return;
      this.rows.textContent = "";
      if (err instanceof ApiError && err.status === 400) {
        this.renderSyntaxError(err.body.error ?? "invalid pattern", err.body.offset ?? null);
      } else {
        this.renderSyntaxError(String(err), null);
      }
    }
  }

  private renderRows(results: RegexTestResult[]): void {
    this.rows.textContent = "";
    for (const result of results) {
      const row = document.createElement("div");
      row.className = "result-row";
      const mark = document.createElement("span");
      const full = result.verdict === "full";
      mark.className = full ? "mark mark-full" : "mark mark-partial";
      mark.textContent = full ? "✓" : "✗";
      row.appendChild(mark);
      const segments = document.createElement("span");
      segments.className = "segments";
      renderHighlight(segments, result.answer, result.highlight);
      row.appendChild(segments);
      if (!full && result.completion.text !== undefined) {
        const completion = document.createElement("span");
        completion.className = "completion";
        completion.textContent = ` +${JSON.stringify(result.completion.text)}`;
        row.appendChild(completion);
      }
      this.rows.appendChild(row);
    }
  }

  /** Caret line pointing at the 0-based offset the service reported. */
  private renderSyntaxError(message: string, offset: number | null): void {
    this.errorBox.hidden = false;
    if (offset === null) {
      this.errorBox.textContent = message;
      return;
    }
    const caretLine = " ".repeat(offset) + "^";
    this.errorBox.textContent = `${this.pattern.value}\n${caretLine}\n${message} (offset ${offset})`;
  }
}
