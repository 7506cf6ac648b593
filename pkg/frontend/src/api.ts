/**
 * Typed client for the practice service. The UI never matches patterns
 * itself: every verdict, span and hint shown comes from these calls.
 */

export interface MatchInfo {
  verdict: "full" | "partial" | "no_viable_prefix";
  matched_prefix_len: number;
  input_len: number;
  prefix_complete: boolean;
  captures: Record<string, [number, number]>;
}

export interface HighlightPayload {
  green: [number, number];
  red: [number, number];
}

export interface GradePayload {
  raw_fraction: number;
  penalty_total: number;
  final_fraction: number;
  matched_answer_id: number | null;
  selected_answer_id: number;
  match: MatchInfo;
}

export interface PenaltyProjection {
  char_hints: number;
  lexeme_hints: number;
  penalty_total: number;
}

export interface SubmissionPayload {
  text: string;
  timestamp: number;
  grade: GradePayload;
}

export interface AttemptSnapshot {
  attempt_id: string;
  question_id: string;
  mode: "formative" | "summative";
  state: "open" | "completed" | "given_up";
  hints_available: boolean;
  hint_penalties: { char: number; lexeme: number };
  penalty: PenaltyProjection;
  submissions: SubmissionPayload[];
}

export interface HintPayload {
  kind: "char" | "lexeme";
  payload: string;
  is_final: boolean;
}

export interface AnswerResponse {
  grade: GradePayload;
  highlight: HighlightPayload;
  attempt: AttemptSnapshot;
}

export interface HintResponse {
  hint: HintPayload;
  penalty: PenaltyProjection;
  attempt: AttemptSnapshot;
}

export interface QuestionSummary {
  id: string;
  prompt: string;
  mode: "formative" | "summative";
}

export interface RegexTestResult {
  answer: string;
  verdict: "full" | "partial" | "no_viable_prefix";
  matched_prefix_len: number;
  prefix_complete: boolean;
  highlight: HighlightPayload;
  completion: { prefix_len?: number; text?: string; error?: string };
}

export interface RegexTestError {
  error: string;
  offset: number | null;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: { error?: string; offset?: number | null },
  ) {
    super(body.error ?? `request failed with ${status}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body);
  }
  return body as T;
}

function post<T>(url: string, payload: unknown): Promise<T> {
  return request<T>(url, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export class ApiClient {
  constructor(private base: string = "") {}

  listQuestions(): Promise<QuestionSummary[]> {
    return request<{ questions: QuestionSummary[] }>(`${this.base}/api/questions`).then(
      (body) => body.questions,
    );
  }

  createAttempt(questionId: string): Promise<AttemptSnapshot> {
    return post(`${this.base}/api/attempts`, { question_id: questionId });
  }

  submitAnswer(attemptId: string, text: string): Promise<AnswerResponse> {
    return post(`${this.base}/api/attempts/${attemptId}/answer`, { text });
  }

  requestHint(attemptId: string, kind: "char" | "lexeme"): Promise<HintResponse> {
    return post(`${this.base}/api/attempts/${attemptId}/hint`, { kind });
  }

  giveUp(attemptId: string): Promise<AttemptSnapshot> {
    return post(`${this.base}/api/attempts/${attemptId}/give-up`, {});
  }

  testRegex(pattern: string, answers: string[]): Promise<RegexTestResult[]> {
    return post<{ results: RegexTestResult[] }>(`${this.base}/api/regex/test`, {
      pattern,
      answers,
    }).then((body) => body.results);
  }
}
