"""Exception types shared across the package."""


class TemplateError(Exception):
    """Base class for every error raised by this package."""


class PatternSyntaxError(TemplateError):
    """A template pattern could not be parsed.

    ``position`` is a 0-based character offset into the pattern source.
    """

    def __init__(self, position: int, message: str):
        super().__init__(f"{message} (at offset {position})")
        self.position = position
        self.message = message


class MacroError(TemplateError):
    """A macro has an empty body or an empty delimiter string."""


class CompileError(TemplateError):
    """Internal inconsistency while compiling an AST; unreachable from valid input."""


class UnsupportedError(TemplateError):
    """The requested options ask for features this engine build excludes."""


class BudgetExceeded(TemplateError):
    """The backtracking step budget ran out; signals a pathological pattern."""

    def __init__(self, steps: int):
        super().__init__(f"step budget of {steps} exhausted")
        self.steps = steps


class RecursionLimit(TemplateError):
    """The recursion depth limit was hit and the verdict depends on it."""

    def __init__(self, limit: int):
        super().__init__(f"recursion depth limit of {limit} reached")
        self.limit = limit


class EmptyLanguage(TemplateError):
    """The pattern matches no string at all."""


class CompletionBudgetExceeded(TemplateError):
    """No completion exists within the configured appended-length budget."""

    def __init__(self, budget: int):
        super().__init__(f"no completion within {budget} appended characters")
        self.budget = budget


class AnalysisBudgetExceeded(TemplateError):
    """No language member was found within the analysis length budget."""

    def __init__(self, budget: int):
        super().__init__(f"no member of the pattern language within {budget} characters")
        self.budget = budget


class BankFormatError(TemplateError):
    """The question bank document is malformed; ``path`` locates the offender."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class PatternError(TemplateError):
    """A pattern inside a question failed to parse, compile or run."""

    def __init__(self, question_id: str, answer_index: int, cause: TemplateError):
        super().__init__(f"question {question_id!r}, answer {answer_index}: {cause}")
        self.question_id = question_id
        self.answer_index = answer_index
        self.cause = cause


class HintsDisabled(TemplateError):
    """Hint requested on a summative attempt or with a disabled policy."""


class AttemptClosed(TemplateError):
    """Operation on an attempt that is already completed or given up."""


class UnknownQuestion(TemplateError):
    """Referenced question id does not exist in the bank."""


class UnknownAttempt(TemplateError):
    """Referenced attempt id does not exist in the store."""
