/**
 * Student practice view: pick a question, type an answer, see the
 * green/red verdict from the server, request character or lexeme hints
 * (when the policy allows them) and resubmit until solved.
 *
 * All state shown is authoritative from the service; this view only
 * renders responses. Hints are inserted manually: requesting one costs
 * the penalty server-side, "apply" just types it into the input box.
 */

import type { ApiClient, AttemptSnapshot, HintPayload, QuestionSummary } from "./api.js";
import { ApiError } from "./api.js";
import { renderHighlight } from "./highlight.js";

export class PracticeView {
  root: HTMLElement;
  private client: ApiClient;
  private attempt: AttemptSnapshot | null = null;
  private lastHint: HintPayload | null = null;
  private lastKeptPrefix = "";

  private picker!: HTMLSelectElement;
  private prompt!: HTMLElement;
  private input!: HTMLInputElement;
  private submitButton!: HTMLButtonElement;
  private hintCharButton!: HTMLButtonElement;
  private hintLexemeButton!: HTMLButtonElement;
  private applyHintButton!: HTMLButtonElement;
  private giveUpButton!: HTMLButtonElement;
  private highlightBox!: HTMLElement;
  private gradeLine!: HTMLElement;
  private penaltyLine!: HTMLElement;
  private errorLine!: HTMLElement;

  constructor(root: HTMLElement, client: ApiClient) {
    this.root = root;
    this.client = client;
    this.build();
  }

  private build(): void {
    this.root.innerHTML = `
      <div class="practice">
        <label>Question
          <select data-role="question-picker"></select>
        </label>
        <p data-role="prompt" class="prompt"></p>
        <div class="answer-row">
          <input data-role="answer" type="text" spellcheck="false"
                 placeholder="type your line of code" />
          <button data-role="submit">grade</button>
        </div>
        <div data-role="highlight" class="highlight"></div>
        <div class="hint-row">
          <button data-role="hint-char">hint: next character</button>
          <button data-role="hint-lexeme">hint: next lexeme</button>
          <button data-role="apply-hint" hidden>apply hint</button>
          <button data-role="give-up">give up</button>
        </div>
        <p data-role="grade" class="grade"></p>
        <p data-role="penalty" class="penalty"></p>
        <p data-role="error" class="error" role="alert"></p>
      </div>`;
    this.picker = this.query("question-picker");
    this.prompt = this.query("prompt");
    this.input = this.query("answer");
    this.submitButton = this.query("submit");
    this.hintCharButton = this.query("hint-char");
    this.hintLexemeButton = this.query("hint-lexeme");
    this.applyHintButton = this.query("apply-hint");
    this.giveUpButton = this.query("give-up");
    this.highlightBox = this.query("highlight");
    this.gradeLine = this.query("grade");
    this.penaltyLine = this.query("penalty");
    this.errorLine = this.query("error");

    this.picker.addEventListener("change", () => void this.startAttempt());
    this.submitButton.addEventListener("click", () => void this.submit());
    this.hintCharButton.addEventListener("click", () => void this.hint("char"));
    this.hintLexemeButton.addEventListener("click", () => void this.hint("lexeme"));
    this.applyHintButton.addEventListener("click", () => this.applyHint());
    this.giveUpButton.addEventListener("click", () => void this.giveUp());
  }

  private query<T extends HTMLElement>(role: string): T {
    return this.root.querySelector(`[data-role="${role}"]`) as T;
  }

  async load(): Promise<void> {
    const questions = await this.client.listQuestions();
    this.picker.textContent = "";
    for (const question of questions) {
      const option = document.createElement("option");
      option.value = question.id;
      option.textContent = `${question.id} (${question.mode})`;
      this.picker.appendChild(option);
    }
    if (questions.length) {
      this.picker.value = questions[0].id;
      await this.startAttempt(questions[0]);
    }
  }

  async startAttempt(question?: QuestionSummary): Promise<void> {
    this.clearFeedback();
    const questionId = question?.id ?? this.picker.value;
    try {
      this.attempt = await this.client.createAttempt(questionId);
    } catch (err) {
      this.showError(err);
      return;
    }
    const questions = await this.client.listQuestions();
    const selected = questions.find((q) => q.id === questionId);
    this.prompt.textContent = selected?.prompt ?? "";
    this.input.value = "";
    this.applyState(this.attempt);
  }

  /** Hint buttons follow the policy: hidden entirely when disabled. */
  private applyState(attempt: AttemptSnapshot): void {
    this.attempt = attempt;
    const open = attempt.state === "open";
    const hintable = attempt.hints_available && open;
    this.hintCharButton.hidden = !attempt.hints_available;
    this.hintLexemeButton.hidden = !attempt.hints_available;
    this.hintCharButton.disabled = !hintable;
    this.hintLexemeButton.disabled = !hintable;
    this.submitButton.disabled = !open;
    this.giveUpButton.disabled = !open;
    this.input.disabled = !open;
    const penalty = attempt.penalty;
    this.penaltyLine.textContent =
      `hints used: ${penalty.char_hints} char, ${penalty.lexeme_hints} lexeme` +
      ` — penalty ${penalty.penalty_total.toFixed(2)}`;
  }

  async submit(): Promise<void> {
    if (!this.attempt) return;
    this.clearError();
    this.lastHint = null;
    this.applyHintButton.hidden = true;
    try {
      const response = await this.client.submitAnswer(
        this.attempt.attempt_id,
        this.input.value,
      );
      const match = response.grade.match;
      this.lastKeptPrefix = this.input.value.slice(0, match.matched_prefix_len);
      renderHighlight(this.highlightBox, this.input.value, response.highlight);
      this.gradeLine.textContent =
        match.verdict === "full"
          ? `correct — grade ${response.grade.final_fraction.toFixed(2)}`
          : `verdict: ${match.verdict} (${match.matched_prefix_len}/${match.input_len} kept)`;
      this.applyState(response.attempt);
      if (response.attempt.state === "completed") {
        this.gradeLine.textContent += " — attempt completed";
      }
    } catch (err) {
      this.showError(err);
    }
  }

  async hint(kind: "char" | "lexeme"): Promise<void> {
    if (!this.attempt) return;
    this.clearError();
    try {
      const response = await this.client.requestHint(this.attempt.attempt_id, kind);
      this.lastHint = response.hint;
      const latest = response.attempt.submissions.at(-1);
      const text = latest?.text ?? "";
      const keep = latest?.grade.match.matched_prefix_len ?? 0;
      this.lastKeptPrefix = text.slice(0, keep);
      renderHighlight(
        this.highlightBox,
        text,
        { green: [0, keep], red: [keep, text.length] },
        response.hint,
      );
      this.applyHintButton.hidden = false;
      this.applyState(response.attempt);
    } catch (err) {
      this.showError(err);
    }
  }

  /** Manual insertion: the hint was already paid for when requested. */
  applyHint(): void {
    if (!this.lastHint) return;
    this.input.value = this.lastKeptPrefix + this.lastHint.payload;
    this.input.focus();
  }

  async giveUp(): Promise<void> {
    if (!this.attempt) return;
    try {
      const attempt = await this.client.giveUp(this.attempt.attempt_id);
      this.applyState(attempt);
      this.gradeLine.textContent = "attempt abandoned";
    } catch (err) {
      this.showError(err);
    }
  }

  private clearFeedback(): void {
    this.highlightBox.textContent = "";
    this.gradeLine.textContent = "";
    this.penaltyLine.textContent = "";
    this.clearError();
  }

  private clearError(): void {
    this.errorLine.textContent = "";
  }

  private showError(err: unknown): void {
    if (err instanceof ApiError) {
      this.errorLine.textContent = err.body.error ?? `error ${err.status}`;
    } else {
      this.errorLine.textContent = String(err);
    }
  }
}
