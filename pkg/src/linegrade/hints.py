"""Minimal string completions and their hint/highlight projections.

A partially correct answer keeps its longest viable prefix; the red tail
is discarded and a completion is computed that turns the kept prefix into
a full member with the minimum number of appended characters.  Hints are
projections of that completion: its first character, or its first lexeme
(with any mandatory leading whitespace fused in, so a hint is never just
"type a space").
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .engine import CompiledPattern, Verdict, match_partial, search_min_completion
from .errors import CompletionBudgetExceeded, EmptyLanguage
from .syntax import WHITESPACE_CHARS

# Breadth-first completion search aborts past this many distinct state
# sets; protects memory on adversarial patterns.
MAX_COMPLETION_STATES = 500_000


class HintKind(enum.Enum):
    NEXT_CHAR = "char"
    NEXT_LEXEME = "lexeme"


@dataclass(frozen=True)
class Completion:
    """A minimal completion: keep ``prefix_len`` input characters, append ``text``."""

    prefix_len: int
    text: str

    @property
    def total_len(self) -> int:
        return self.prefix_len + len(self.text)


@dataclass(frozen=True)
class Hint:
    kind: HintKind
    payload: str
    is_final: bool  # applying the payload yields a full member


@dataclass(frozen=True)
class HighlightSpans:
    """Green/red spans partition the input; the hint span sits after it."""

    green: tuple[int, int]
    red: tuple[int, int]
    hint_span: tuple[int, int] | None = None
    hint_text: str | None = None
    hint_final: bool | None = None


def _bfs_completion(cp: CompiledPattern, kept: str, budget: int) -> str:
    """Lexicographically smallest minimal completion (regular patterns).

    Breadth-first over lazily determinized state sets; each layer is
    generated in lexicographic path order, so the first accepting set found
    carries the smallest completion of minimal length.
    """
    states = cp.start_states()
    for ch in kept:
        states = cp.step(states, ch)
    if cp.is_accepting(states):
        return ""
    frontier: list[tuple[frozenset, str]] = [(states, "")]
    visited = {states}
    for _depth in range(1, budget + 1):
        nxt: list[tuple[frozenset, str]] = []
        for current, path in frontier:
            for ch in cp.candidate_chars(current):
                stepped = cp.step(current, ch)
                if not stepped or stepped in visited:
                    continue
                if cp.is_accepting(stepped):
                    return path + ch
                visited.add(stepped)
                nxt.append((stepped, path + ch))
        if not nxt or len(visited) > MAX_COMPLETION_STATES:
            break
        frontier = nxt
    raise CompletionBudgetExceeded(budget)


def shortest_completion(
    cp: CompiledPattern, text: str, budget: int | None = None
) -> Completion:
    """Minimal completion of the kept viable prefix of ``text``.

    The appended character count is minimal; ties are broken towards the
    lexicographically smallest string on the regular path and by the
    deterministic search order on the backtracking path.
    """
    result = match_partial(cp, text)
    if result.verdict is Verdict.NO_VIABLE_PREFIX:
        raise EmptyLanguage("pattern matches no string")
    if result.is_full:
        return Completion(result.matched_prefix_len, "")
    kept = text[: result.matched_prefix_len]
    if budget is None:
        budget = cp.options.completion_budget
    if cp.is_regular:
        appended = _bfs_completion(cp, kept, budget)
    else:
        found = search_min_completion(cp, kept, budget)
        if found is None:
            raise CompletionBudgetExceeded(budget)
        appended = found
    return Completion(result.matched_prefix_len, appended)


# ---------------------------------------------------------------------------
# Lexemes.


_OPERATORS = frozenset(
    ["<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "->", "::"]
)


def _is_word_start(c: str) -> bool:
    return "a" <= c <= "z" or "A" <= c <= "Z" or c == "_"


def _is_word(c: str) -> bool:
    return _is_word_start(c) or "0" <= c <= "9"


def _is_digit(c: str) -> bool:
    return "0" <= c <= "9"


def tokenize(s: str) -> list[str]:
    """Split into lexemes: identifiers, numbers, whitespace runs, operators.

    Greedy longest match; concatenating the result reproduces the input.
    """
    out: list[str] = []
    i, n = 0, len(s)
    while i < n:
        c = s[i]
        j = i + 1
        if c in WHITESPACE_CHARS:
            while j < n and s[j] in WHITESPACE_CHARS:
                j += 1
        elif _is_word_start(c):
            while j < n and _is_word(s[j]):
                j += 1
        elif _is_digit(c):
            while j < n and _is_digit(s[j]):
                j += 1
            if j + 1 < n and s[j] == "." and _is_digit(s[j + 1]):
                j += 2
                while j < n and _is_digit(s[j]):
                    j += 1
        elif s[i : i + 2] in _OPERATORS:
            j = i + 2
        out.append(s[i:j])
        i = j
    return out


def is_whitespace_lexeme(token: str) -> bool:
    return bool(token) and token[0] in WHITESPACE_CHARS


# ---------------------------------------------------------------------------
# Hints.


def next_char_hint(cp: CompiledPattern, text: str) -> Hint:
    """The first character of a minimal completion.

    An already-full input yields an empty payload with ``is_final`` set.
    """
    completion = shortest_completion(cp, text)
    return Hint(HintKind.NEXT_CHAR, completion.text[:1], len(completion.text) <= 1)


def next_lexeme_hint(cp: CompiledPattern, text: str) -> Hint:
    """The first lexeme of a minimal completion, fused with any whitespace
    the completion requires before it."""
    completion = shortest_completion(cp, text)
    payload = ""
    for token in tokenize(completion.text):
        payload += token
        if not is_whitespace_lexeme(token):
            break
    else:
        payload = completion.text  # empty or whitespace-only completion
    return Hint(HintKind.NEXT_LEXEME, payload, payload == completion.text)


def hint_for(cp: CompiledPattern, text: str, kind: HintKind) -> Hint:
    if kind is HintKind.NEXT_CHAR:
        return next_char_hint(cp, text)
    return next_lexeme_hint(cp, text)


def highlight(cp: CompiledPattern, text: str, hint: Hint | None = None) -> HighlightSpans:
    """Green/red spans for rendering, plus the hint's appended span."""
    result = match_partial(cp, text)
    k = result.matched_prefix_len
    n = result.input_len
    if hint is not None and hint.payload:
        return HighlightSpans(
            (0, k), (k, n), (n, n + len(hint.payload)), hint.payload, hint.is_final
        )
    return HighlightSpans((0, k), (k, n))
