"""Template pattern language: AST node types and the parser.

The supported syntax is a PCRE subset aimed at answer templates for
single lines of code: literals and escapes, ``.``, bracket classes with
ranges and negation, the shorthand classes ``\\d \\D \\w \\W \\s \\S``,
alternation, greedy and lazy quantifiers (``* + ? {n} {n,} {n,m}``),
non-capturing / capturing / named groups, backreferences (``\\1``,
``\\k<name>``), recursive calls (``(?R) (?1) (?&name)``) and the
comment-shaped wrapping macros described in :mod:`linegrade.macros`.

Look-around, possessive quantifiers and conditionals are rejected with
an error naming the construct.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import PatternSyntaxError

MAX_CODEPOINT = 0x10FFFF

# Counted repetitions expand to copies of the compiled body; bounds above
# this would produce unmanageable programs and are rejected at parse time.
MAX_REPEAT = 1000

WHITESPACE_CHARS = " \t\n\r\f\v"


# ---------------------------------------------------------------------------
# Character-set helpers.  A character set is a tuple of (lo, hi) inclusive
# codepoint ranges, sorted, disjoint and with adjacent ranges merged, so that
# structural equality of AST nodes means set equality.


def merge_ranges(pairs) -> tuple[tuple[int, int], ...]:
    """Canonicalize an iterable of (lo, hi) pairs."""
    pairs = sorted((lo, hi) for lo, hi in pairs if lo <= hi)
    out: list[list[int]] = []
    for lo, hi in pairs:
        if out and lo <= out[-1][1] + 1:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def negate_ranges(ranges) -> tuple[tuple[int, int], ...]:
    """Complement of a canonical range tuple over the full codepoint space."""
    out = []
    prev = 0
    for lo, hi in ranges:
        if lo > prev:
            out.append((prev, lo - 1))
        prev = hi + 1
    if prev <= MAX_CODEPOINT:
        out.append((prev, MAX_CODEPOINT))
    return tuple(out)


def ranges_contain(ranges, codepoint: int) -> bool:
    lo_idx, hi_idx = 0, len(ranges)
    while lo_idx < hi_idx:
        mid = (lo_idx + hi_idx) // 2
        lo, hi = ranges[mid]
        if codepoint < lo:
            hi_idx = mid
        elif codepoint > hi:
            lo_idx = mid + 1
        else:
            return True
    return False


def fold_ascii_case(ranges) -> tuple[tuple[int, int], ...]:
    """Add the opposite-case ASCII letters to a range set (for case folding)."""
    extra = []
    for lo, hi in ranges:
        for base, other in ((ord("a"), ord("A")), (ord("A"), ord("a"))):
            s, e = max(lo, base), min(hi, base + 25)
            if s <= e:
                extra.append((s - base + other, e - base + other))
    return merge_ranges(list(ranges) + extra)


def ranges_from_chars(chars: str) -> tuple[tuple[int, int], ...]:
    return merge_ranges((ord(c), ord(c)) for c in chars)


SPACE_RANGES = ranges_from_chars(WHITESPACE_CHARS)
DIGIT_RANGES = ((ord("0"), ord("9")),)
WORD_RANGES = merge_ranges(
    [(ord("0"), ord("9")), (ord("A"), ord("Z")), (ord("_"), ord("_")), (ord("a"), ord("z"))]
)
IDENT_START_RANGES = merge_ranges(
    [(ord("A"), ord("Z")), (ord("_"), ord("_")), (ord("a"), ord("z"))]
)
# '.' follows the PCRE default of matching everything except newline.
DOT_RANGES = negate_ranges(ranges_from_chars("\n"))

_CLASS_SHORTHANDS = {
    "d": DIGIT_RANGES,
    "D": negate_ranges(DIGIT_RANGES),
    "w": WORD_RANGES,
    "W": negate_ranges(WORD_RANGES),
    "s": SPACE_RANGES,
    "S": negate_ranges(SPACE_RANGES),
}

_CONTROL_ESCAPES = {
    "n": "\n",
    "r": "\r",
    "t": "\t",
    "f": "\f",
    "v": "\v",
    "a": "\a",
    "e": "\x1b",
    "0": "\0",
}

_REJECTED_ESCAPES = {
    "b": "word-boundary assertion '\\b'",
    "B": "word-boundary assertion '\\B'",
    "A": "anchor '\\A'",
    "z": "anchor '\\z'",
    "Z": "anchor '\\Z'",
    "G": "anchor '\\G'",
    "Q": "quoting '\\Q'",
    "E": "quoting '\\E'",
    "p": "unicode property class '\\p'",
    "P": "unicode property class '\\P'",
}


# ---------------------------------------------------------------------------
# AST nodes.  All nodes are immutable; source positions are carried for error
# reporting only and excluded from structural equality.


class Node:
    """Base class for pattern AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Literal(Node):
    char: str


@dataclass(frozen=True)
class CharClass(Node):
    ranges: tuple[tuple[int, int], ...]  # canonical; negation already applied
    negated: bool = field(default=False, compare=False)
    label: str = field(default="", compare=False)  # source spelling, for messages


@dataclass(frozen=True)
class AnyChar(Node):
    pass


@dataclass(frozen=True)
class Concat(Node):
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Alternation(Node):
    branches: tuple[Node, ...]


@dataclass(frozen=True)
class Quantifier(Node):
    child: Node
    min: int
    max: int | None  # None means unbounded
    greedy: bool = True


@dataclass(frozen=True)
class Group(Node):
    child: Node
    capturing: bool
    index: int | None = None  # capture index; None for non-capturing
    name: str | None = None


@dataclass(frozen=True)
class Backreference(Node):
    index: int | None = None
    name: str | None = None
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RecursiveCall(Node):
    """A call into a group's subpattern; index 0 means the whole pattern."""

    index: int | None = None
    name: str | None = None
    position: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Anchor(Node):
    kind: str  # "start" or "end"


@dataclass(frozen=True)
class Macro(Node):
    """An unexpanded wrapping macro; see :mod:`linegrade.macros`."""

    kind: str  # "opt", "req" or "identifier"
    open_delim: str = ""
    close_delim: str = ""
    body: Node | None = None


@dataclass
class RegexAst:
    """A parsed template: the node tree plus group bookkeeping."""

    root: Node
    source: str
    group_count: int
    group_names: dict[str, int]  # user-visible named groups -> capture index


def iter_nodes(node: Node):
    """Yield ``node`` and every descendant, depth first."""
    yield node
    if isinstance(node, (Concat, Alternation)):
        for child in node.children if isinstance(node, Concat) else node.branches:
            yield from iter_nodes(child)
    elif isinstance(node, (Quantifier, Group)):
        yield from iter_nodes(node.child)
    elif isinstance(node, Macro) and node.body is not None:
        yield from iter_nodes(node.body)


def sequence(nodes) -> Node:
    """Concat constructor that collapses the single-child case."""
    nodes = tuple(nodes)
    if len(nodes) == 1:
        return nodes[0]
    return Concat(nodes)


# ---------------------------------------------------------------------------
# Parser.


_MACRO_OPENER = "(?###"
_MACRO_CLOSER = "(?###>)"

_TOP, _GROUP, _MACRO_BODY = "top", "group", "macro"


class _Parser:
    def __init__(self, pattern: str):
        self.pattern = pattern
        self.pos = 0
        self.group_count = 0
        self.group_names: dict[str, int] = {}

    # -- low-level cursor helpers

    def fail(self, message: str, position: int | None = None):
        raise PatternSyntaxError(self.pos if position is None else position, message)

    def at_end(self) -> bool:
        return self.pos >= len(self.pattern)

    def peek(self) -> str:
        return self.pattern[self.pos] if self.pos < len(self.pattern) else ""

    def take(self) -> str:
        ch = self.pattern[self.pos]
        self.pos += 1
        return ch

    def expect(self, ch: str, message: str | None = None):
        if self.peek() != ch:
            self.fail(message or f"expected {ch!r}")
        self.pos += 1

    def lookahead(self, text: str) -> bool:
        return self.pattern.startswith(text, self.pos)

    def read_name(self) -> str:
        start = self.pos
        if self.peek().isalpha() or self.peek() == "_":
            self.pos += 1
            while self.peek().isalnum() or self.peek() == "_":
                self.pos += 1
        return self.pattern[start : self.pos]

    # -- grammar

    def parse_alternation(self, context: str) -> Node:
        branches = [self.parse_sequence(context)]
        while self.peek() == "|":
            self.pos += 1
            branches.append(self.parse_sequence(context))
        if len(branches) == 1:
            return branches[0]
        return Alternation(tuple(branches))

    def parse_sequence(self, context: str) -> Node:
        items: list[Node] = []
        while not self.at_end():
            ch = self.peek()
            if ch == "|" or ch == ")":
                break
            if context == _MACRO_BODY and self.lookahead(_MACRO_CLOSER):
                break
            items.append(self.parse_quantified())
        return sequence(items)

    def parse_quantified(self) -> Node:
        atom = self.parse_atom()
        quantified = False
        while True:
            ch = self.peek()
            if ch and ch in "*+?":
                if quantified:
                    self.fail("quantifier applied to a quantifier")
                self.pos += 1
                lo, hi = {"*": (0, None), "+": (1, None), "?": (0, 1)}[ch]
            elif ch == "{":
                bounds = self.try_parse_counted()
                if bounds is None:
                    break
                if quantified:
                    self.fail("quantifier applied to a quantifier")
                lo, hi = bounds
            else:
                break
            greedy = True
            if self.peek() == "?":
                self.pos += 1
                greedy = False
            elif self.peek() == "+":
                self.fail("possessive quantifiers are not supported")
            atom = Quantifier(atom, lo, hi, greedy)
            quantified = True
        return atom

    def try_parse_counted(self) -> tuple[int, int | None] | None:
        """Parse ``{n}``/``{n,}``/``{n,m}``; return None when the brace is a literal."""
        start = self.pos
        pos = self.pos + 1
        digits = ""
        while pos < len(self.pattern) and self.pattern[pos].isdigit():
            digits += self.pattern[pos]
            pos += 1
        if not digits:
            return None
        lo = int(digits)
        hi: int | None = lo
        if pos < len(self.pattern) and self.pattern[pos] == ",":
            pos += 1
            digits = ""
            while pos < len(self.pattern) and self.pattern[pos].isdigit():
                digits += self.pattern[pos]
                pos += 1
            hi = int(digits) if digits else None
        if pos >= len(self.pattern) or self.pattern[pos] != "}":
            return None
        self.pos = pos + 1
        if hi is not None and lo > hi:
            self.fail(f"reversed quantifier range {{{lo},{hi}}}", start)
        if lo > MAX_REPEAT or (hi is not None and hi > MAX_REPEAT):
            self.fail(f"counted repetition above {MAX_REPEAT}", start)
        return lo, hi

    def parse_atom(self) -> Node:
        ch = self.peek()
        if ch == "(":
            return self.parse_group()
        if ch == "[":
            return self.parse_class()
        if ch == "\\":
            return self.parse_escape()
        if ch == ".":
            self.pos += 1
            return AnyChar()
        if ch == "^":
            if self.pos != 0:
                self.fail("'^' is only supported at the very start of the pattern")
            self.pos += 1
            return Anchor("start")
        if ch == "$":
            if self.pos != len(self.pattern) - 1:
                self.fail("'$' is only supported at the very end of the pattern")
            self.pos += 1
            return Anchor("end")
        if ch in "*+?":
            self.fail(f"quantifier {ch!r} with nothing to repeat")
        if ch == "{" and self.try_parse_counted() is not None:
            self.fail("counted quantifier with nothing to repeat")
        self.pos += 1
        return Literal(ch)

    def parse_group(self) -> Node:
        start = self.pos
        self.pos += 1  # consume '('
        if self.peek() != "?":
            index = self.group_count = self.group_count + 1
            child = self.parse_alternation(_GROUP)
            self.expect(")", "unterminated group")
            return Group(child, capturing=True, index=index)

        self.pos += 1  # consume '?'
        ch = self.peek()
        if ch == ":":
            self.pos += 1
            child = self.parse_alternation(_GROUP)
            self.expect(")", "unterminated group")
            return Group(child, capturing=False)
        if ch == "<":
            nxt = self.pattern[self.pos + 1 : self.pos + 2]
            if nxt in ("=", "!"):
                self.fail("look-behind assertions are not supported", start)
            self.pos += 1
            name = self.read_name()
            if not name:
                self.fail("missing group name in '(?<...>'", start)
            self.expect(">", "unterminated group name")
            if name in self.group_names:
                self.fail(f"duplicate group name {name!r}", start)
            index = self.group_count = self.group_count + 1
            self.group_names[name] = index
            child = self.parse_alternation(_GROUP)
            self.expect(")", "unterminated group")
            return Group(child, capturing=True, index=index, name=name)
        if ch == "=":
            self.fail("look-ahead assertions are not supported", start)
        if ch == "!":
            self.fail("negative look-ahead assertions are not supported", start)
        if ch == "R":
            self.pos += 1
            self.expect(")", "unterminated '(?R' call")
            return RecursiveCall(index=0, position=start)
        if ch.isdigit():
            digits = ""
            while self.peek().isdigit():
                digits += self.take()
            self.expect(")", "unterminated group call")
            return RecursiveCall(index=int(digits), position=start)
        if ch == "&":
            self.pos += 1
            name = self.read_name()
            if not name:
                self.fail("missing group name in '(?&' call", start)
            self.expect(")", "unterminated group call")
            return RecursiveCall(name=name, position=start)
        if ch == "#":
            if self.lookahead("###"):
                self.pos += 3
                return self.parse_macro(start)
            self.fail("'(?#' comments are not supported", start)
        if ch == "(":
            self.fail("conditional subpatterns '(?(' are not supported", start)
        if ch == "P":
            self.fail("'(?P' group syntax is not supported; use (?<name>...)", start)
        self.fail(f"unsupported group construct '(?{ch}'", start)

    def parse_macro(self, start: int) -> Node:
        name = self.read_name()
        if not name:
            if self.peek() == ">":
                self.fail("macro terminator '(?###>)' without a matching opener", start)
            self.fail("missing macro name after '(?###'", start)
        if name == "identifier":
            self.expect(")", "unterminated identifier macro")
            return Macro("identifier")
        if name in ("parens_opt", "parens_req"):
            open_delim, close_delim = "(", ")"
        elif name in ("brackets_opt", "brackets_req"):
            open_delim, close_delim = "[", "]"
        elif name in ("custom_parens_opt", "custom_parens_req"):
            open_delim = close_delim = None
        else:
            self.fail(f"unknown macro {name!r}", start)
        kind = "opt" if name.endswith("_opt") else "req"
        self.expect("<", f"expected '<' after macro name {name!r}")
        if open_delim is None:
            open_delim = self.read_delimiter(start)
            close_delim = self.read_delimiter(start)
        self.expect(")", "unterminated macro opener")
        body = self.parse_alternation(_MACRO_BODY)
        if not self.lookahead(_MACRO_CLOSER):
            self.fail("missing macro terminator '(?###>)'", start)
        self.pos += len(_MACRO_CLOSER)
        return Macro(kind, open_delim, close_delim, body)

    def read_delimiter(self, start: int) -> str:
        """Read a custom delimiter up to an unescaped '|'."""
        out = []
        while True:
            if self.at_end() or self.peek() == ")":
                self.fail("unterminated custom delimiter list", start)
            ch = self.take()
            if ch == "|":
                return "".join(out)
            if ch == "\\":
                if self.at_end():
                    self.fail("trailing backslash in delimiter", start)
                ch = self.take()
            out.append(ch)

    def parse_class(self) -> Node:
        start = self.pos
        self.pos += 1  # consume '['
        negated = False
        if self.peek() == "^":
            negated = True
            self.pos += 1
        ranges: list[tuple[int, int]] = []
        first = True
        while True:
            if self.at_end():
                self.fail("unterminated character class", start)
            if self.peek() == "]" and not first:
                self.pos += 1
                break
            first = False
            item = self.parse_class_atom(start)
            if isinstance(item, tuple):  # shorthand class: a range set
                ranges.extend(item)
                continue
            lo = item
            if (
                self.peek() == "-"
                and self.pos + 1 < len(self.pattern)
                and self.pattern[self.pos + 1] != "]"
            ):
                dash_pos = self.pos
                self.pos += 1
                hi = self.parse_class_atom(start)
                if isinstance(hi, tuple):
                    self.fail("shorthand class cannot be a range endpoint", dash_pos)
                if lo > hi:
                    self.fail("reversed range in character class", dash_pos)
                ranges.append((lo, hi))
            else:
                ranges.append((lo, lo))
        result = merge_ranges(ranges)
        if negated:
            result = negate_ranges(result)
        return CharClass(result, negated, label=self.pattern[start : self.pos])

    def parse_class_atom(self, class_start: int):
        """One class item: a codepoint, or a range tuple for shorthands."""
        ch = self.take()
        if ch != "\\":
            return ord(ch)
        if self.at_end():
            self.fail("trailing backslash in character class", class_start)
        esc = self.take()
        if esc in _CLASS_SHORTHANDS:
            return _CLASS_SHORTHANDS[esc]
        if esc in _CONTROL_ESCAPES:
            return ord(_CONTROL_ESCAPES[esc])
        if esc == "x":
            return ord(self.parse_hex_escape())
        if esc.isalnum():
            self.fail(f"unsupported escape '\\{esc}' in character class", self.pos - 2)
        return ord(esc)

    def parse_escape(self) -> Node:
        start = self.pos
        self.pos += 1  # consume '\'
        if self.at_end():
            self.fail("trailing backslash", start)
        ch = self.take()
        if ch.isdigit() and ch != "0":
            digits = ch
            while self.peek().isdigit():
                digits += self.take()
            return Backreference(index=int(digits), position=start)
        if ch == "k":
            self.expect("<", "expected '<' after '\\k'")
            name = self.read_name()
            if not name:
                self.fail("missing group name in '\\k<...>'", start)
            self.expect(">", "unterminated '\\k<...>' reference")
            return Backreference(name=name, position=start)
        if ch in _CLASS_SHORTHANDS:
            return CharClass(_CLASS_SHORTHANDS[ch], label=f"\\{ch}")
        if ch in _CONTROL_ESCAPES:
            return Literal(_CONTROL_ESCAPES[ch])
        if ch == "x":
            return Literal(self.parse_hex_escape())
        if ch in _REJECTED_ESCAPES:
            self.fail(f"{_REJECTED_ESCAPES[ch]} is not supported", start)
        if ch.isalnum():
            self.fail(f"unsupported escape sequence '\\{ch}'", start)
        return Literal(ch)

    def parse_hex_escape(self) -> str:
        if self.peek() == "{":
            self.pos += 1
            digits = ""
            while self.peek() in "0123456789abcdefABCDEF":
                digits += self.take()
            self.expect("}", "unterminated '\\x{...}' escape")
        else:
            digits = self.pattern[self.pos : self.pos + 2]
            if len(digits) != 2 or any(c not in "0123456789abcdefABCDEF" for c in digits):
                self.fail("'\\x' escape needs two hex digits")
            self.pos += 2
        value = int(digits, 16)
        if value > MAX_CODEPOINT:
            self.fail("codepoint out of range in '\\x{...}' escape")
        return chr(value)


def _validate_references(ast: RegexAst):
    named: dict[str, bool] = dict.fromkeys(ast.group_names, True)
    for node in iter_nodes(ast.root):
        if isinstance(node, Group) and node.name is not None:
            named[node.name] = True
    for node in iter_nodes(ast.root):
        if isinstance(node, Backreference):
            if node.index is not None and not 1 <= node.index <= ast.group_count:
                raise PatternSyntaxError(
                    node.position, f"backreference to undefined group {node.index}"
                )
            if node.name is not None and node.name not in named:
                raise PatternSyntaxError(
                    node.position, f"backreference to undefined group {node.name!r}"
                )
        elif isinstance(node, RecursiveCall):
            if node.index is not None and node.index != 0 and not 1 <= node.index <= ast.group_count:
                raise PatternSyntaxError(
                    node.position, f"call to undefined group {node.index}"
                )
            if node.name is not None and node.name not in named:
                raise PatternSyntaxError(
                    node.position, f"call to undefined group {node.name!r}"
                )


def parse(pattern: str) -> RegexAst:
    """Parse a template pattern into an AST.

    Macros are kept as :class:`Macro` nodes; expand them with
    :func:`linegrade.macros.expand_macros` before compiling.

    Raises :class:`~linegrade.errors.PatternSyntaxError` with a 0-based
    character offset on malformed input.
    """
    parser = _Parser(pattern)
    root = parser.parse_alternation(_TOP)
    if not parser.at_end():
        if parser.peek() == ")":
            parser.fail("unbalanced ')'")
        parser.fail(f"unexpected {parser.peek()!r}")
    ast = RegexAst(root, pattern, parser.group_count, dict(parser.group_names))
    _validate_references(ast)
    return ast
