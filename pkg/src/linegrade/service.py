"""HTTP facade for authoring, practice and grading.

State is kept in memory and mirrored to an append-only newline-delimited
JSON event log; replaying the log reconstructs the exact attempt states,
which doubles as crash recovery and as a usage log for later analysis.
Attempt ids are capabilities: knowing one is the only authentication.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import __version__
from .engine import MatchResult, compile_template, match_partial
from .errors import (
    AttemptClosed,
    CompletionBudgetExceeded,
    EmptyLanguage,
    HintsDisabled,
    TemplateError,
    PatternSyntaxError,
    UnknownAttempt,
    UnknownQuestion,
)
from .hints import HintKind, shortest_completion
from .questions import (
    Attempt,
    AttemptState,
    GradeResult,
    QuestionBank,
    QuizMode,
    give_up,
    penalty_projection,
    request_hint,
    submit_answer,
)

DEFAULT_PORT = 8750
PORT_ENV_VAR = "PREG_PORT"

STATIC_DIR = Path(__file__).parent / "static"


def match_to_dict(result: MatchResult) -> dict:
    return {
        "verdict": result.verdict.value,
        "matched_prefix_len": result.matched_prefix_len,
        "input_len": result.input_len,
        "prefix_complete": result.prefix_complete,
        "captures": {str(k): list(v) for k, v in result.captures.items()},
    }


def grade_to_dict(grade: GradeResult) -> dict:
    return {
        "raw_fraction": grade.raw_fraction,
        "penalty_total": grade.penalty_total,
        "final_fraction": grade.final_fraction,
        "matched_answer_id": grade.matched_answer_id,
        "selected_answer_id": grade.selected_answer_id,
        "match": match_to_dict(grade.match),
    }


def highlight_to_dict(result: MatchResult) -> dict:
    k, n = result.matched_prefix_len, result.input_len
    return {"green": [0, k], "red": [k, n]}


class SessionStore:
    """Attempts keyed by id, persisted as an append-only event log."""

    def __init__(self, bank: QuestionBank, path: str | Path | None = None):
        self.bank = bank
        self.path = Path(path) if path is not None else None
        self.attempts: dict[str, Attempt] = {}
        self._io_lock = threading.Lock()
        self._locks: dict[str, threading.Lock] = {}
        if self.path is not None and self.path.exists():
            self.replay(self.path)

    def replay(self, path: Path):
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self._apply(json.loads(line))

    def _log(self, event: dict):
        if self.path is None:
            return
        with self._io_lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _attempt(self, attempt_id: str) -> Attempt:
        attempt = self.attempts.get(attempt_id)
        if attempt is None:
            raise UnknownAttempt(f"no attempt {attempt_id!r}")
        return attempt

    def _lock_for(self, attempt_id: str) -> threading.Lock:
        with self._io_lock:
            return self._locks.setdefault(attempt_id, threading.Lock())

    def _apply(self, event: dict):
        """Deterministic state transition; replay calls this for every line."""
        kind = event["type"]
        if kind == "create":
            question = self.bank.get(event["question_id"])
            if question is None:
                raise UnknownQuestion(f"no question {event['question_id']!r}")
            attempt = Attempt(
                attempt_id=event["attempt_id"],
                question=question,
                mode=QuizMode(event["mode"]),
            )
            self.attempts[attempt.attempt_id] = attempt
            return attempt
        attempt = self._attempt(event["attempt_id"])
        if kind == "submit":
            return submit_answer(attempt, event["text"], timestamp=event["ts"])
        if kind == "hint":
            hint, _ = request_hint(attempt, HintKind(event["kind"]))
            return hint
        if kind == "give_up":
            return give_up(attempt)
        raise ValueError(f"unknown event type {kind!r}")

    # -- public operations; each validates, applies, then appends the event

    def create_attempt(self, question_id: str, mode: str | None = None) -> Attempt:
        question = self.bank.get(question_id)
        if question is None:
            raise UnknownQuestion(f"no question {question_id!r}")
        event = {
            "type": "create",
            "attempt_id": uuid.uuid4().hex,
            "question_id": question_id,
            "mode": mode or question.mode.value,
            "ts": time.time(),
        }
        attempt = self._apply(event)
        self._log(event)
        return attempt

    def submit(self, attempt_id: str, text: str) -> tuple[Attempt, GradeResult]:
        with self._lock_for(attempt_id):
            attempt = self._attempt(attempt_id)
            event = {"type": "submit", "attempt_id": attempt_id, "text": text, "ts": time.time()}
            result = self._apply(event)
            self._log(event)
            return attempt, result

    def hint(self, attempt_id: str, kind: str):
        with self._lock_for(attempt_id):
            attempt = self._attempt(attempt_id)
            event = {"type": "hint", "attempt_id": attempt_id, "kind": kind, "ts": time.time()}
            hint = self._apply(event)
            self._log(event)
            return attempt, hint

    def give_up(self, attempt_id: str) -> Attempt:
        with self._lock_for(attempt_id):
            attempt = self._attempt(attempt_id)
            event = {"type": "give_up", "attempt_id": attempt_id, "ts": time.time()}
            self._apply(event)
            self._log(event)
            return attempt

    def snapshot(self, attempt: Attempt) -> dict:
        policy = attempt.question.hint_policy
        return {
            "attempt_id": attempt.attempt_id,
            "question_id": attempt.question.id,
            "mode": attempt.mode.value,
            "state": attempt.state.value,
            "hints_available": policy.enabled and attempt.mode is QuizMode.FORMATIVE,
            "hint_penalties": {"char": policy.char_penalty, "lexeme": policy.lexeme_penalty},
            "penalty": penalty_projection(attempt),
            "submissions": [
                {"text": s.text, "timestamp": s.timestamp, "grade": grade_to_dict(s.result)}
                for s in attempt.submissions
            ],
        }


class RegexTestRequest(BaseModel):
    pattern: str
    answers: list[str] = []


class CreateAttemptRequest(BaseModel):
    question_id: str
    mode: str | None = None


class SubmitRequest(BaseModel):
    text: str


class HintRequest(BaseModel):
    kind: str  # "char" or "lexeme"


def create_app(
    bank: QuestionBank,
    store_path: str | Path | None = None,
    static_dir: str | Path | None = STATIC_DIR,
) -> FastAPI:
    app = FastAPI(title="linegrade", version=__version__)
    store = SessionStore(bank, store_path)
    app.state.bank = bank
    app.state.store = store

    @app.exception_handler(UnknownQuestion)
    @app.exception_handler(UnknownAttempt)
    async def _not_found(request: Request, exc: TemplateError):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(AttemptClosed)
    async def _conflict(request: Request, exc: AttemptClosed):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.exception_handler(HintsDisabled)
    async def _forbidden(request: Request, exc: HintsDisabled):
        return JSONResponse(status_code=403, content={"error": str(exc)})

    @app.post("/api/regex/test")
    def test_regex(req: RegexTestRequest):
        try:
            compiled = compile_template(req.pattern)
        except PatternSyntaxError as err:
            return JSONResponse(
                status_code=400, content={"error": err.message, "offset": err.position}
            )
        except TemplateError as err:
            return JSONResponse(status_code=400, content={"error": str(err), "offset": None})
        results = []
        for answer in req.answers:
            result = match_partial(compiled, answer)
            try:
                completion = shortest_completion(compiled, answer)
                completion_body = {"prefix_len": completion.prefix_len, "text": completion.text}
            except (CompletionBudgetExceeded, EmptyLanguage) as err:
                completion_body = {"error": str(err)}
            results.append(
                {
                    "answer": answer,
                    "verdict": result.verdict.value,
                    "matched_prefix_len": result.matched_prefix_len,
                    "prefix_complete": result.prefix_complete,
                    "highlight": highlight_to_dict(result),
                    "completion": completion_body,
                }
            )
        return {"results": results}

    @app.get("/api/questions")
    def list_questions():
        # student view: prompt and mode only, never the patterns
        return {
            "questions": [
                {"id": q.id, "prompt": q.prompt, "mode": q.mode.value} for q in bank
            ]
        }

    @app.get("/api/questions/{question_id}")
    def get_question(question_id: str):
        question = bank.get(question_id)
        if question is None:
            raise UnknownQuestion(f"no question {question_id!r}")
        return {"id": question.id, "prompt": question.prompt, "mode": question.mode.value}

    @app.post("/api/attempts")
    def create_attempt(req: CreateAttemptRequest):
        attempt = store.create_attempt(req.question_id, req.mode)
        return store.snapshot(attempt)

    @app.get("/api/attempts/{attempt_id}")
    def get_attempt(attempt_id: str):
        return store.snapshot(store._attempt(attempt_id))

    @app.post("/api/attempts/{attempt_id}/answer")
    def submit(attempt_id: str, req: SubmitRequest):
        attempt, result = store.submit(attempt_id, req.text)
        return {
            "grade": grade_to_dict(result),
            "highlight": highlight_to_dict(result.match),
            "attempt": store.snapshot(attempt),
        }

    @app.post("/api/attempts/{attempt_id}/hint")
    def hint(attempt_id: str, req: HintRequest):
        try:
            kind = {"char": HintKind.NEXT_CHAR, "lexeme": HintKind.NEXT_LEXEME}[req.kind]
        except KeyError:
            return JSONResponse(
                status_code=422, content={"error": f"unknown hint kind {req.kind!r}"}
            )
        attempt, hint_obj = store.hint(attempt_id, kind.value)
        return {
            "hint": {
                "kind": hint_obj.kind.value,
                "payload": hint_obj.payload,
                "is_final": hint_obj.is_final,
            },
            "penalty": penalty_projection(attempt),
            "attempt": store.snapshot(attempt),
        }

    @app.post("/api/attempts/{attempt_id}/give-up")
    def abandon(attempt_id: str):
        attempt = store.give_up(attempt_id)
        return store.snapshot(attempt)

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app
