"""Question bank, grading, hint-penalty accounting and attempt state.

A question holds one or more weighted answer templates.  Grading takes
the best fully matching template; when nothing matches fully, the
highest-weighted template with the longest viable prefix is selected so
highlighting and hints steer the student towards the best-credit answer.
Hint penalties are absolute grade fractions subtracted per hint use.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field

from .analysis import PatternMetrics, analyze
from .engine import CompiledPattern, MatchOptions, MatchResult, compile_pattern, match_full
from .errors import (
    AttemptClosed,
    BankFormatError,
    HintsDisabled,
    PatternError,
    TemplateError,
)
from .hints import Hint, HintKind, hint_for
from .macros import expand_macros
from .syntax import WHITESPACE_CHARS, parse

# Summative quizzes gate further work; this is the pass mark they use.
PASS_THRESHOLD = 0.60


class QuizMode(enum.Enum):
    FORMATIVE = "formative"
    SUMMATIVE = "summative"


class AttemptState(enum.Enum):
    OPEN = "open"
    COMPLETED = "completed"
    GIVEN_UP = "given_up"


@dataclass(frozen=True)
class HintPolicy:
    enabled: bool = True
    char_penalty: float = 0.0
    lexeme_penalty: float = 0.0


@dataclass
class HintCounts:
    char: int = 0
    lexeme: int = 0

    def bump(self, kind: HintKind):
        if kind is HintKind.NEXT_CHAR:
            self.char += 1
        else:
            self.lexeme += 1

    def copy(self) -> "HintCounts":
        return HintCounts(self.char, self.lexeme)


@dataclass
class AnswerTemplate:
    answer_id: int
    pattern: str
    fraction: float
    feedback: str
    compiled: CompiledPattern
    metrics: PatternMetrics


@dataclass
class Question:
    id: str
    prompt: str
    answers: list[AnswerTemplate]
    hint_policy: HintPolicy
    mode: QuizMode


@dataclass(frozen=True)
class GradeResult:
    raw_fraction: float
    penalty_total: float
    final_fraction: float
    matched_answer_id: int | None  # set iff some template fully matched
    selected_answer_id: int  # template used for highlighting and hints
    match: MatchResult


@dataclass
class Submission:
    text: str
    timestamp: float
    result: GradeResult


@dataclass
class Attempt:
    attempt_id: str
    question: Question
    mode: QuizMode
    submissions: list[Submission] = field(default_factory=list)
    hints_used: HintCounts = field(default_factory=HintCounts)
    state: AttemptState = AttemptState.OPEN

    @property
    def latest_text(self) -> str:
        return self.submissions[-1].text if self.submissions else ""


@dataclass
class QuestionBank:
    version: int
    questions: dict[str, Question]
    pass_threshold: float = PASS_THRESHOLD

    def __iter__(self):
        return iter(self.questions.values())

    def __len__(self):
        return len(self.questions)

    def get(self, question_id: str) -> Question | None:
        return self.questions.get(question_id)


# ---------------------------------------------------------------------------
# Bank loading.


def build_template(
    answer_id: int, pattern: str, fraction: float, feedback: str = "",
    options: MatchOptions | None = None,
) -> AnswerTemplate:
    ast = expand_macros(parse(pattern))
    compiled = compile_pattern(ast, options)
    return AnswerTemplate(answer_id, pattern, fraction, feedback, compiled, analyze(ast, options))


def build_question(
    question_id: str,
    prompt: str,
    answers,
    hint_policy: HintPolicy = HintPolicy(),
    mode: QuizMode = QuizMode.FORMATIVE,
    options: MatchOptions | None = None,
) -> Question:
    """Build a question from (pattern, fraction[, feedback]) tuples."""
    templates = []
    for idx, spec in enumerate(answers):
        pattern, fraction = spec[0], spec[1]
        feedback = spec[2] if len(spec) > 2 else ""
        try:
            templates.append(build_template(idx, pattern, fraction, feedback, options))
        except TemplateError as err:
            raise PatternError(question_id, idx, err) from err
    if not any(t.fraction == 1.0 for t in templates):
        raise BankFormatError(
            f"questions[{question_id}]", "needs at least one answer with fraction 1.0"
        )
    return Question(question_id, prompt, templates, hint_policy, mode)


def _expect(value, types, path: str, what: str):
    if not isinstance(value, types):
        raise BankFormatError(path, f"expected {what}")
    return value


def load_bank(document: bytes | str) -> QuestionBank:
    """Parse and fully compile a question-bank document (JSON, UTF-8).

    Every pattern is parsed, macro-expanded, compiled and analyzed eagerly
    so authoring errors surface at load time, not mid-quiz.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except ValueError as err:
        raise BankFormatError("$", f"not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise BankFormatError("$", "top level must be an object")
    version = doc.get("version")
    if version != 1:
        raise BankFormatError("version", "must be the integer 1")
    raw_questions = _expect(doc.get("questions"), list, "questions", "an array")
    questions: dict[str, Question] = {}
    for qi, raw in enumerate(raw_questions):
        qpath = f"questions[{qi}]"
        _expect(raw, dict, qpath, "an object")
        qid = _expect(raw.get("id"), str, f"{qpath}.id", "a string")
        if qid in questions:
            raise BankFormatError(f"{qpath}.id", f"duplicate question id {qid!r}")
        prompt = _expect(raw.get("prompt", ""), str, f"{qpath}.prompt", "a string")
        mode_raw = _expect(raw.get("mode", "formative"), str, f"{qpath}.mode", "a string")
        try:
            mode = QuizMode(mode_raw)
        except ValueError:
            raise BankFormatError(
                f"{qpath}.mode", "must be \"formative\" or \"summative\""
            ) from None
        hints_raw = raw.get("hints", {})
        _expect(hints_raw, dict, f"{qpath}.hints", "an object")
        policy = HintPolicy(
            enabled=bool(hints_raw.get("enabled", True)),
            char_penalty=float(hints_raw.get("char_penalty", 0.0)),
            lexeme_penalty=float(hints_raw.get("lexeme_penalty", 0.0)),
        )
        if policy.char_penalty < 0 or policy.lexeme_penalty < 0:
            raise BankFormatError(f"{qpath}.hints", "penalties must be >= 0")
        answers_raw = _expect(raw.get("answers"), list, f"{qpath}.answers", "an array")
        if not answers_raw:
            raise BankFormatError(f"{qpath}.answers", "must not be empty")
        specs = []
        for ai, answer in enumerate(answers_raw):
            apath = f"{qpath}.answers[{ai}]"
            _expect(answer, dict, apath, "an object")
            pattern = _expect(answer.get("pattern"), str, f"{apath}.pattern", "a string")
            fraction = answer.get("fraction")
            if not isinstance(fraction, (int, float)) or isinstance(fraction, bool):
                raise BankFormatError(f"{apath}.fraction", "expected a number")
            if not 0.0 <= fraction <= 1.0:
                raise BankFormatError(f"{apath}.fraction", "must lie in [0, 1]")
            feedback = _expect(answer.get("feedback", ""), str, f"{apath}.feedback", "a string")
            specs.append((pattern, float(fraction), feedback))
        questions[qid] = build_question(qid, prompt, specs, policy, mode)
    return QuestionBank(version=1, questions=questions)


# ---------------------------------------------------------------------------
# Grading.


def _select_template(question: Question, text: str) -> tuple[AnswerTemplate, MatchResult, AnswerTemplate | None]:
    """Match all templates; pick the grading/hinting template.

    Returns (selected, its MatchResult, fully_matched_or_None) where the
    selected template is the full match with the highest fraction, or —
    with no full match — the longest-viable-prefix template among those of
    maximal fraction (ties broken by template order).
    """
    results = []
    for template in question.answers:
        try:
            results.append((template, match_full(template.compiled, text)))
        except TemplateError as err:
            raise PatternError(question.id, template.answer_id, err) from err
    full = [(t, r) for t, r in results if r.is_full]
    if full:
        best = max(full, key=lambda tr: tr[0].fraction)
        return best[0], best[1], best[0]
    top = max(t.fraction for t, _ in results)
    candidates = [(t, r) for t, r in results if t.fraction == top]
    selected = max(candidates, key=lambda tr: tr[1].matched_prefix_len)
    return selected[0], selected[1], None


def grade_response(
    question: Question, text: str, hints_used: HintCounts | None = None
) -> GradeResult:
    """Grade one response; hint penalties are subtracted, clamped at zero."""
    hints_used = hints_used or HintCounts()
    selected, result, matched = _select_template(question, text)
    raw = matched.fraction if matched is not None else 0.0
    policy = question.hint_policy
    penalty = hints_used.char * policy.char_penalty + hints_used.lexeme * policy.lexeme_penalty
    return GradeResult(
        raw_fraction=raw,
        penalty_total=penalty,
        final_fraction=max(0.0, raw - penalty),
        matched_answer_id=matched.answer_id if matched is not None else None,
        selected_answer_id=selected.answer_id,
        match=result,
    )


def submit_answer(attempt: Attempt, text: str, timestamp: float | None = None) -> GradeResult:
    """Record a submission on an open attempt and return its grade.

    Summative attempts close after their single graded submission;
    formative attempts close once a full-credit template matches.
    """
    if attempt.state is not AttemptState.OPEN:
        raise AttemptClosed(f"attempt {attempt.attempt_id} is {attempt.state.value}")
    result = grade_response(attempt.question, text, attempt.hints_used)
    attempt.submissions.append(
        Submission(text, time.time() if timestamp is None else timestamp, result)
    )
    if attempt.mode is QuizMode.SUMMATIVE or result.raw_fraction >= 1.0:
        attempt.state = AttemptState.COMPLETED
    return result


def request_hint(attempt: Attempt, kind: HintKind) -> tuple[Hint, Attempt]:
    """Compute a hint against the currently selected template and charge it."""
    if attempt.state is not AttemptState.OPEN:
        raise AttemptClosed(f"attempt {attempt.attempt_id} is {attempt.state.value}")
    if attempt.mode is QuizMode.SUMMATIVE:
        raise HintsDisabled("hints are disabled in summative mode")
    if not attempt.question.hint_policy.enabled:
        raise HintsDisabled("hints are disabled for this question")
    text = attempt.latest_text
    selected, _result, _matched = _select_template(attempt.question, text)
    hint = hint_for(selected.compiled, text, kind)
    attempt.hints_used.bump(kind)
    return hint, attempt


def give_up(attempt: Attempt) -> Attempt:
    if attempt.state is not AttemptState.OPEN:
        raise AttemptClosed(f"attempt {attempt.attempt_id} is {attempt.state.value}")
    attempt.state = AttemptState.GIVEN_UP
    return attempt


def penalty_projection(attempt: Attempt) -> dict:
    """What the current hint usage costs at grading time."""
    policy = attempt.question.hint_policy
    total = (
        attempt.hints_used.char * policy.char_penalty
        + attempt.hints_used.lexeme * policy.lexeme_penalty
    )
    return {
        "char_hints": attempt.hints_used.char,
        "lexeme_hints": attempt.hints_used.lexeme,
        "penalty_total": total,
    }


# ---------------------------------------------------------------------------
# Answer-log analytics.


def _strip_ws(s: str) -> str:
    return "".join(c for c in s if c not in WHITESPACE_CHARS)


def _collapse_ws(s: str) -> str:
    out = []
    in_ws = False
    for c in s:
        if c in WHITESPACE_CHARS:
            in_ws = True
            continue
        if in_ws and out:
            out.append(" ")
        in_ws = False
        out.append(c)
    return "".join(out)


def dedupe_whitespace(answers, collapse: bool = False) -> list[list[str]]:
    """Group answers that are equal once whitespace is deleted.

    With ``collapse`` the normal form keeps single spaces between tokens
    instead of deleting them (for sensitivity analysis).  Groups and their
    members keep first-seen order.
    """
    normalize = _collapse_ws if collapse else _strip_ws
    groups: dict[str, list[str]] = {}
    for answer in answers:
        groups.setdefault(normalize(answer), []).append(answer)
    return list(groups.values())


@dataclass(frozen=True)
class ConfusionMetrics:
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    precision: float | None
    recall: float | None
    f_measure: float | None


def confusion_metrics(log) -> ConfusionMetrics:
    """Precision/recall/F1 of engine verdicts against human labels.

    ``log`` holds (text, labeled_correct, engine_accepted) triples.  Zero
    denominators yield None rather than raising.
    """
    tp = fp = fn = tn = 0
    for _text, labeled_correct, engine_accepted in log:
        if engine_accepted and labeled_correct:
            tp += 1
        elif engine_accepted:
            fp += 1
        elif labeled_correct:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else None
    recall = tp / (tp + fn) if tp + fn else None
    if precision is None or recall is None or precision + recall == 0:
        f_measure = None
    else:
        f_measure = 2 * precision * recall / (precision + recall)
    return ConfusionMetrics(tp, fp, fn, tn, precision, recall, f_measure)
