"""Expansion of teacher-facing wrapping macros into recursive subpatterns.

Templates for code answers routinely need to accept extra balanced
delimiters: ``5``, ``(5)`` and ``(((5)))`` should all grade the same.
Writing the recursive subpattern by hand makes templates unreadable, so
authors use comment-shaped macros instead::

    (?###parens_opt<)BODY(?###>)     zero or more layers of ( ... )
    (?###parens_req<)BODY(?###>)     one or more layers of ( ... )
    (?###brackets_opt<)BODY(?###>)   same with [ ... ]
    (?###custom_parens_opt<OPEN|CLOSE|)BODY(?###>)   any delimiter strings
    (?###identifier)                 [A-Za-z_][A-Za-z0-9_]*

Expansion rewrites each macro into a named recursive group.  ``\\s*`` is
inserted between delimiters and body so whitespace inside the wrapping is
tolerated.  The generated groups are non-capturing and carry fresh names,
so user capture indices are untouched.
"""

from __future__ import annotations

from .errors import MacroError
from .syntax import (
    Alternation,
    CharClass,
    Concat,
    Group,
    IDENT_START_RANGES,
    Literal,
    Macro,
    Node,
    Quantifier,
    RecursiveCall,
    RegexAst,
    SPACE_RANGES,
    WORD_RANGES,
    iter_nodes,
    sequence,
)


def _identifier_body() -> Node:
    return Concat(
        (
            CharClass(IDENT_START_RANGES, label="[A-Za-z_]"),
            Quantifier(CharClass(WORD_RANGES, label="[A-Za-z0-9_]"), 0, None, True),
        )
    )


def _optional_ws() -> Node:
    return Quantifier(CharClass(SPACE_RANGES, label="\\s"), 0, None, True)


def _literals(text: str) -> list[Node]:
    return [Literal(ch) for ch in text]


class _Expander:
    def __init__(self, taken_names):
        self.taken = set(taken_names)
        self.counter = 0

    def fresh_name(self) -> str:
        while True:
            self.counter += 1
            name = f"_wrap{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def rewrite(self, node: Node) -> Node:
        if isinstance(node, Concat):
            return Concat(tuple(self.rewrite(c) for c in node.children))
        if isinstance(node, Alternation):
            return Alternation(tuple(self.rewrite(b) for b in node.branches))
        if isinstance(node, Quantifier):
            return Quantifier(self.rewrite(node.child), node.min, node.max, node.greedy)
        if isinstance(node, Group):
            return Group(self.rewrite(node.child), node.capturing, node.index, node.name)
        if isinstance(node, Macro):
            return self.expand(node)
        return node

    def expand(self, macro: Macro) -> Node:
        if macro.kind == "identifier":
            return _identifier_body()
        if not macro.open_delim or not macro.close_delim:
            raise MacroError("macro delimiters must be non-empty strings")
        if macro.body is None or macro.body == Concat(()):
            raise MacroError("macro body must not be empty")
        body = self.rewrite(macro.body)
        name = self.fresh_name()
        wrapped = sequence(
            _literals(macro.open_delim)
            + [_optional_ws(), RecursiveCall(name=name), _optional_ws()]
            + _literals(macro.close_delim)
        )
        if macro.kind == "opt":
            # name  =  body | OPEN \s* (?&name) \s* CLOSE
            child: Node = Alternation((body, wrapped))
        else:
            # name  =  OPEN \s* (body | (?&name)) \s* CLOSE
            child = sequence(
                _literals(macro.open_delim)
                + [
                    _optional_ws(),
                    Alternation((body, RecursiveCall(name=name))),
                    _optional_ws(),
                ]
                + _literals(macro.close_delim)
            )
        return Group(child, capturing=False, name=name)


def expand_macros(ast: RegexAst) -> RegexAst:
    """Replace every Macro node with its recursive-group expansion.

    Idempotent: an AST without Macro nodes is returned unchanged.
    """
    if not any(isinstance(n, Macro) for n in iter_nodes(ast.root)):
        return ast
    taken = set(ast.group_names)
    for node in iter_nodes(ast.root):
        if isinstance(node, Group) and node.name is not None:
            taken.add(node.name)
    expander = _Expander(taken)
    root = expander.rewrite(ast.root)
    return RegexAst(root, ast.source, ast.group_count, dict(ast.group_names))
