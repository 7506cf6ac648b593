"""Static metrics for answer templates.

Teachers care about three sizes per template: how short the shortest
accepted answer is (in characters and in code tokens) and how many
structurally different answers the template describes.  The shortest
member is found by breadth-first search over the compiled matcher, so it
terminates for any pattern with a finite shortest member, recursion
included.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import MatchOptions, compile_pattern, search_min_completion
from .errors import AnalysisBudgetExceeded, CompletionBudgetExceeded, EmptyLanguage
from .hints import _bfs_completion, is_whitespace_lexeme, tokenize
from .macros import expand_macros
from .syntax import (
    Alternation,
    Anchor,
    AnyChar,
    Backreference,
    CharClass,
    Concat,
    Group,
    Literal,
    Macro,
    Node,
    Quantifier,
    RecursiveCall,
    RegexAst,
    iter_nodes,
)

DEFAULT_LENGTH_BUDGET = 4096


@dataclass(frozen=True)
class PatternMetrics:
    shortest_answer_chars: int
    shortest_answer_tokens: int  # non-whitespace lexemes of the witness
    path_count: int
    uses_recursion: bool
    uses_backreferences: bool
    capture_group_count: int
    shortest_answer: str = ""


def path_count(node: Node) -> int:
    """Structurally different ways through the pattern.

    Alternation branches add, concatenation multiplies, an optional part
    counts as take-or-skip, and mandatory or unbounded repetition does not
    multiply, which keeps the metric finite.
    """
    if isinstance(node, (Literal, CharClass, AnyChar, Anchor, Backreference, RecursiveCall)):
        return 1
    if isinstance(node, Concat):
        total = 1
        for child in node.children:
            total *= path_count(child)
        return total
    if isinstance(node, Alternation):
        return sum(path_count(b) for b in node.branches)
    if isinstance(node, Quantifier):
        inner = path_count(node.child)
        return inner + 1 if node.min == 0 else inner
    if isinstance(node, Group):
        return path_count(node.child)
    if isinstance(node, Macro):  # pragma: no cover - analyze expands first
        raise ValueError("path_count needs an expanded AST")
    raise ValueError(f"unknown node {node!r}")  # pragma: no cover


def analyze(
    ast: RegexAst,
    options: MatchOptions | None = None,
    length_budget: int = DEFAULT_LENGTH_BUDGET,
) -> PatternMetrics:
    """Compute :class:`PatternMetrics` for a template.

    Raises :class:`~linegrade.errors.AnalysisBudgetExceeded` when no member
    exists within ``length_budget`` characters and
    :class:`~linegrade.errors.EmptyLanguage` when the pattern matches
    nothing at all.
    """
    ast = expand_macros(ast)
    cp = compile_pattern(ast, options)
    if cp.is_regular:
        if not cp.start_states():
            raise EmptyLanguage(f"pattern {ast.source!r} matches no string")
        try:
            witness = _bfs_completion(cp, "", length_budget)
        except CompletionBudgetExceeded:
            raise AnalysisBudgetExceeded(length_budget) from None
    else:
        found = search_min_completion(cp, "", length_budget)
        if found is None:
            raise AnalysisBudgetExceeded(length_budget)
        witness = found
    tokens = [t for t in tokenize(witness) if not is_whitespace_lexeme(t)]
    return PatternMetrics(
        shortest_answer_chars=len(witness),
        shortest_answer_tokens=len(tokens),
        path_count=path_count(ast.root),
        uses_recursion=any(isinstance(n, RecursiveCall) for n in iter_nodes(ast.root)),
        uses_backreferences=any(isinstance(n, Backreference) for n in iter_nodes(ast.root)),
        capture_group_count=ast.group_count,
        shortest_answer=witness,
    )
