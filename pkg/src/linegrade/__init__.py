"""Template grading and string-completion hints for code-line quizzes.

Answers are matched against anchored PCRE-subset templates; partially
correct answers get highlight spans (the viable green prefix, the red
tail) and minimal-completion hints (next correct character or lexeme).
"""

from .analysis import PatternMetrics, analyze, path_count
from .engine import (
    CompiledPattern,
    MatchOptions,
    MatchResult,
    Verdict,
    compile_pattern,
    compile_template,
    match_full,
    match_partial,
)
from .errors import (
    AnalysisBudgetExceeded,
    AttemptClosed,
    BankFormatError,
    BudgetExceeded,
    CompileError,
    CompletionBudgetExceeded,
    EmptyLanguage,
    HintsDisabled,
    MacroError,
    PatternError,
    PatternSyntaxError,
    RecursionLimit,
    TemplateError,
    UnknownAttempt,
    UnknownQuestion,
    UnsupportedError,
)
from .hints import (
    Completion,
    HighlightSpans,
    Hint,
    HintKind,
    highlight,
    next_char_hint,
    next_lexeme_hint,
    shortest_completion,
    tokenize,
)
from .macros import expand_macros
from .questions import (
    AnswerTemplate,
    Attempt,
    AttemptState,
    ConfusionMetrics,
    GradeResult,
    HintCounts,
    HintPolicy,
    PASS_THRESHOLD,
    Question,
    QuestionBank,
    QuizMode,
    build_question,
    build_template,
    confusion_metrics,
    dedupe_whitespace,
    give_up,
    grade_response,
    load_bank,
    request_hint,
    submit_answer,
)
from .syntax import RegexAst, parse

__version__ = "0.1.0"

__all__ = [
    "AnalysisBudgetExceeded",
    "AnswerTemplate",
    "Attempt",
    "AttemptClosed",
    "AttemptState",
    "BankFormatError",
    "BudgetExceeded",
    "CompileError",
    "CompiledPattern",
    "Completion",
    "CompletionBudgetExceeded",
    "ConfusionMetrics",
    "EmptyLanguage",
    "GradeResult",
    "HighlightSpans",
    "Hint",
    "HintCounts",
    "HintKind",
    "HintPolicy",
    "HintsDisabled",
    "MacroError",
    "MatchOptions",
    "MatchResult",
    "PASS_THRESHOLD",
    "PatternError",
    "PatternMetrics",
    "PatternSyntaxError",
    "Question",
    "QuestionBank",
    "QuizMode",
    "RecursionLimit",
    "RegexAst",
    "TemplateError",
    "UnknownAttempt",
    "UnknownQuestion",
    "UnsupportedError",
    "Verdict",
    "analyze",
    "build_question",
    "build_template",
    "compile_pattern",
    "compile_template",
    "confusion_metrics",
    "dedupe_whitespace",
    "expand_macros",
    "give_up",
    "grade_response",
    "highlight",
    "load_bank",
    "match_full",
    "match_partial",
    "next_char_hint",
    "next_lexeme_hint",
    "parse",
    "path_count",
    "request_hint",
    "shortest_completion",
    "submit_answer",
    "tokenize",
]
