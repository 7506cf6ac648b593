"""Anchored matching engine with partial-match support.

An expanded AST compiles to a flat instruction program.  Patterns without
backreferences or recursion ("regular" programs) are executed as an NFA
whose state sets are trimmed to states that can still reach the accepting
instruction, which makes prefix-viability checks a single linear sweep.
Patterns that use backreferences or recursive calls fall back to a
backtracking interpreter with a step budget and a recursion depth limit;
prefix viability is then decided by a bounded search for a completing
suffix (shared with the hint machinery).

Matching is anchored at both ends: a Full verdict means the entire input
is a member of the pattern language.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import (
    BudgetExceeded,
    CompileError,
    RecursionLimit,
    UnsupportedError,
)
from .macros import expand_macros
from .syntax import (
    Alternation,
    Anchor,
    AnyChar,
    Backreference,
    CharClass,
    Concat,
    DOT_RANGES,
    Group,
    Literal,
    Macro,
    Node,
    Quantifier,
    RecursiveCall,
    RegexAst,
    fold_ascii_case,
    iter_nodes,
    merge_ranges,
    parse,
    ranges_contain,
)

OP_CHAR, OP_SPLIT, OP_JMP, OP_SAVE, OP_MATCH, OP_BACKREF, OP_CALL, OP_RET = range(8)


@dataclass(frozen=True)
class MatchOptions:
    """Engine knobs; the defaults suit answer-line templates."""

    case_sensitive: bool = True
    step_budget: int = 1_000_000
    recursion_limit: int = 64
    completion_budget: int = 512


class Verdict(enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    NO_VIABLE_PREFIX = "no_viable_prefix"


@dataclass(frozen=True)
class MatchResult:
    """Outcome of anchored matching.

    ``matched_prefix_len`` is the length of the longest prefix of the input
    that can still be extended to a member of the pattern language.  When
    the whole input is such a prefix without being a member itself,
    ``prefix_complete`` is set ("all green so far, keep typing").  Captures
    are reported for Full verdicts only, keyed both by group index and by
    group name.
    """

    verdict: Verdict
    matched_prefix_len: int
    input_len: int
    prefix_complete: bool = False
    captures: dict = field(default_factory=dict)

    @property
    def is_full(self) -> bool:
        return self.verdict is Verdict.FULL


class CompiledPattern:
    """Executable anchored matcher produced by :func:`compile_pattern`."""

    def __init__(self, program, group_count, group_names, options, source):
        self.program = program
        self.group_count = group_count
        self.group_names = group_names
        self.options = options
        self.source = source
        self.is_regular = not any(
            ins[0] in (OP_BACKREF, OP_CALL) for ins in program
        )
        self._productive = _productive_states(program) if self.is_regular else None
        self._min_ahead = _min_consumption(program)
        self._start_cache: frozenset | None = None
        self._step_cache: dict = {}

    def __repr__(self):
        kind = "regular" if self.is_regular else "backtracking"
        return f"<CompiledPattern {self.source!r} ({kind}, {len(self.program)} ops)>"

    # -- NFA view (regular programs only); state sets hold CHAR/MATCH pcs
    # that can still reach the accepting instruction, so a non-empty set
    # means the consumed prefix is viable.

    def start_states(self) -> frozenset:
        if self._start_cache is None:
            self._start_cache = self._closure((0,))
        return self._start_cache

    def step(self, states: frozenset, ch: str) -> frozenset:
        key = (states, ch)
        cached = self._step_cache.get(key)
        if cached is not None:
            return cached
        cp = ord(ch)
        nxt = [
            pc + 1
            for pc in states
            if self.program[pc][0] == OP_CHAR and ranges_contain(self.program[pc][1], cp)
        ]
        result = self._closure(nxt)
        self._step_cache[key] = result
        return result

    def is_accepting(self, states: frozenset) -> bool:
        return any(self.program[pc][0] == OP_MATCH for pc in states)

    def candidate_chars(self, states: frozenset) -> list[str]:
        """Lexicographically ordered representatives of the outgoing classes.

        One character per atomic interval of the union of outgoing ranges;
        trying these is exhaustive up to per-interval equivalence.
        """
        ranges = []
        for pc in states:
            ins = self.program[pc]
            if ins[0] == OP_CHAR:
                ranges.extend(ins[1])
        points = set()
        for lo, hi in ranges:
            points.add(lo)
            points.add(hi + 1)
        out = []
        for p in sorted(points):
            if any(lo <= p <= hi for lo, hi in ranges):
                out.append(chr(p))
        return out

    def _closure(self, seed) -> frozenset:
        prog = self.program
        productive = self._productive
        seen = set()
        kept = []
        stack = list(seed)
        while stack:
            pc = stack.pop()
            if pc in seen:
                continue
            seen.add(pc)
            op = prog[pc][0]
            if op == OP_CHAR:
                if pc in productive:
                    kept.append(pc)
            elif op == OP_MATCH:
                kept.append(pc)
            elif op == OP_SPLIT:
                stack.append(prog[pc][1])
                stack.append(prog[pc][2])
            elif op == OP_JMP:
                stack.append(prog[pc][1])
            elif op == OP_SAVE:
                stack.append(pc + 1)
            else:  # pragma: no cover - regular programs hold no other ops
                raise CompileError(f"unexpected opcode {op} in regular program")
        return frozenset(kept)


INFINITE = 10**9


def _min_consumption(program) -> list[int]:
    """Per-instruction lower bound on characters consumed before the current
    segment (main program or called subroutine) exits.

    Backreferences count as zero (a target can capture the empty string) and
    a call counts as its subroutine's own minimum, solved by fixpoint so
    recursive patterns get the length of their shortest derivation; branches
    with no finite derivation stay at INFINITE and can be pruned outright.
    """
    n = len(program)
    cost = [INFINITE] * n
    changed = True
    while changed:
        changed = False
        for pc in range(n - 1, -1, -1):
            ins = program[pc]
            op = ins[0]
            if op in (OP_MATCH, OP_RET):
                value = 0
            elif op == OP_CHAR:
                value = 1 + cost[pc + 1] if ins[1] else INFINITE
            elif op == OP_SPLIT:
                value = min(cost[ins[1]], cost[ins[2]])
            elif op == OP_JMP:
                value = cost[ins[1]]
            elif op in (OP_SAVE, OP_BACKREF):
                value = cost[pc + 1]
            else:  # OP_CALL
                value = cost[ins[1]] + cost[pc + 1]
            value = min(value, INFINITE)
            if value < cost[pc]:
                cost[pc] = value
                changed = True
    return cost


def _productive_states(program) -> frozenset:
    """Program counters from which the MATCH instruction is reachable."""
    preds: dict[int, list[int]] = {i: [] for i in range(len(program))}
    match_pcs = []
    for pc, ins in enumerate(program):
        op = ins[0]
        if op == OP_CHAR:
            if ins[1]:  # an empty class has no outgoing edge
                preds[pc + 1].append(pc)
        elif op == OP_SPLIT:
            preds[ins[1]].append(pc)
            preds[ins[2]].append(pc)
        elif op == OP_JMP:
            preds[ins[1]].append(pc)
        elif op == OP_SAVE:
            preds[pc + 1].append(pc)
        elif op == OP_MATCH:
            match_pcs.append(pc)
    seen = set(match_pcs)
    stack = list(match_pcs)
    while stack:
        pc = stack.pop()
        for p in preds[pc]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return frozenset(seen)


# ---------------------------------------------------------------------------
# Compiler.


def _group_key(group: Group):
    return (group.index, group.name)


class _Compiler:
    def __init__(self, ast: RegexAst, options: MatchOptions):
        self.ast = ast
        self.options = options
        self.prog: list = []
        self.groups_by_index: dict[int, Group] = {}
        self.groups_by_name: dict[str, Group] = {}
        self.call_targets: list = []  # group keys (or "whole") in discovery order
        self.entries: dict = {}

    def collect(self):
        for node in iter_nodes(self.ast.root):
            if isinstance(node, Macro):
                raise CompileError("macro nodes must be expanded before compiling")
            if isinstance(node, Group):
                if node.index is not None:
                    self.groups_by_index[node.index] = node
                if node.name is not None:
                    self.groups_by_name[node.name] = node
        for node in iter_nodes(self.ast.root):
            if isinstance(node, RecursiveCall):
                key = self._resolve_call(node)
                if key not in self.call_targets:
                    self.call_targets.append(key)

    def _resolve_call(self, node: RecursiveCall):
        if node.index == 0 and node.name is None:
            return "whole"
        if node.name is not None:
            group = self.groups_by_name.get(node.name)
        else:
            group = self.groups_by_index.get(node.index)
        if group is None:  # pragma: no cover - parser validates references
            raise CompileError(f"unresolved group call {node!r}")
        return _group_key(group)

    def _resolve_backref(self, node: Backreference) -> int:
        if node.index is not None:
            return node.index
        index = self.ast.group_names.get(node.name)
        if index is None:  # pragma: no cover - parser validates references
            raise CompileError(f"unresolved backreference {node!r}")
        return index

    def emit(self, ins) -> int:
        self.prog.append(ins)
        return len(self.prog) - 1

    def compile(self) -> list:
        self.collect()
        if "whole" in self.call_targets:
            call_pc = self.emit([OP_CALL, "whole"])
            self.emit((OP_MATCH,))
        else:
            self.emit_node(self.ast.root)
            self.emit((OP_MATCH,))
        for key in self.call_targets:
            self.entries[key] = len(self.prog)
            if key == "whole":
                self.emit_node(self.ast.root)
            else:
                group = (
                    self.groups_by_name[key[1]]
                    if key[1] is not None
                    else self.groups_by_index[key[0]]
                )
                self.emit_node(group.child)
            self.emit((OP_RET,))
        # patch call targets and freeze the instruction list
        out = []
        for ins in self.prog:
            if ins[0] == OP_CALL:
                out.append((OP_CALL, self.entries[ins[1]]))
            else:
                out.append(tuple(ins))
        return out

    def _ranges(self, ranges):
        if not self.options.case_sensitive:
            return fold_ascii_case(ranges)
        return ranges

    def emit_node(self, node: Node):
        if isinstance(node, Literal):
            cp = ord(node.char)
            self.emit((OP_CHAR, self._ranges(((cp, cp),))))
        elif isinstance(node, CharClass):
            self.emit((OP_CHAR, self._ranges(node.ranges)))
        elif isinstance(node, AnyChar):
            self.emit((OP_CHAR, DOT_RANGES))
        elif isinstance(node, Concat):
            for child in node.children:
                self.emit_node(child)
        elif isinstance(node, Alternation):
            jumps = []
            for branch in node.branches[:-1]:
                split_pc = self.emit([OP_SPLIT, len(self.prog) + 1, None])
                self.emit_node(branch)
                jumps.append(self.emit([OP_JMP, None]))
                self.prog[split_pc][2] = len(self.prog)
            self.emit_node(node.branches[-1])
            for pc in jumps:
                self.prog[pc][1] = len(self.prog)
        elif isinstance(node, Quantifier):
            self.emit_quantifier(node)
        elif isinstance(node, Group):
            key = _group_key(node)
            as_call = key in self.call_targets
            if node.capturing:
                self.emit((OP_SAVE, 2 * node.index))
            if as_call:
                self.emit([OP_CALL, key])
            else:
                self.emit_node(node.child)
            if node.capturing:
                self.emit((OP_SAVE, 2 * node.index + 1))
        elif isinstance(node, Backreference):
            self.emit((OP_BACKREF, self._resolve_backref(node)))
        elif isinstance(node, RecursiveCall):
            self.emit([OP_CALL, self._resolve_call(node)])
        elif isinstance(node, Anchor):
            pass  # anchoring is implicit at both ends
        else:  # pragma: no cover
            raise CompileError(f"unknown node {node!r}")

    def emit_quantifier(self, node: Quantifier):
        for _ in range(node.min):
            self.emit_node(node.child)
        if node.max is None:
            loop_pc = self.emit([OP_SPLIT, None, None])
            self.emit_node(node.child)
            self.emit([OP_JMP, loop_pc])
            end = len(self.prog)
            body = loop_pc + 1
            self.prog[loop_pc][1], self.prog[loop_pc][2] = (
                (body, end) if node.greedy else (end, body)
            )
        else:
            splits = []
            for _ in range(node.max - node.min):
                splits.append(self.emit([OP_SPLIT, None, None]))
                self.emit_node(node.child)
            end = len(self.prog)
            for pc in splits:
                body = pc + 1
                self.prog[pc][1], self.prog[pc][2] = (
                    (body, end) if node.greedy else (end, body)
                )


def compile_pattern(ast: RegexAst, options: MatchOptions | None = None) -> CompiledPattern:
    """Compile an expanded AST into an executable anchored matcher."""
    options = options or MatchOptions()
    if options.step_budget < 1 or options.recursion_limit < 1 or options.completion_budget < 0:
        raise UnsupportedError("budgets and limits must be positive")
    program = _Compiler(ast, options).compile()
    return CompiledPattern(program, ast.group_count, dict(ast.group_names), options, ast.source)


def compile_template(pattern: str, options: MatchOptions | None = None) -> CompiledPattern:
    """Parse, expand macros and compile a template string in one call."""
    return compile_pattern(expand_macros(parse(pattern)), options)


# ---------------------------------------------------------------------------
# Backtracking interpreter.  One machine serves two modes: matching a
# concrete input, and searching for appended characters that complete a
# kept prefix to a full member (append_limit bounds how many).


class _Outcome:
    __slots__ = ("matched", "caps", "appended", "depth_limited", "append_limit_hit")

    def __init__(self):
        self.matched = False
        self.caps = None
        self.appended = ""
        self.depth_limited = False
        self.append_limit_hit = False


def _run_backtrack(cp: CompiledPattern, text: str, append_limit: int | None = None) -> _Outcome:
    prog = cp.program
    options = cp.options
    ahead = cp._min_ahead
    n = len(text)
    # characters still consumable from position sp: the rest of the input
    # plus (in completion mode) whatever the append budget allows
    avail_base = n if append_limit is None else n + append_limit
    case_sensitive = options.case_sensitive
    out = _Outcome()
    caps0 = (None,) * (2 * cp.group_count + 2)
    buffer: list[str] = []
    # alternatives: (pc, sp, caps, callstack, pending, buffer_len, char_to_append)
    # where pending is the summed minimum consumption of the call stack
    alts: list[tuple] = [(0, 0, caps0, (), 0, 0, None)]
    # (pc, sp) memoization is sound only without captures-affecting control
    # flow, i.e. for regular programs matching a concrete input
    visited = set() if (cp.is_regular and append_limit is None) else None
    steps = 0
    budget = options.step_budget

    while alts:
        pc, sp, caps, callstack, pending, blen, append_ch = alts.pop()
        del buffer[blen:]
        if append_ch is not None:
            buffer.append(append_ch)
        needed = ahead[pc] + pending
        if needed > avail_base - sp:
            # cannot consume that much; admissible lower bound.  With a
            # finite need the append limit is what cut the branch off.
            if append_limit is not None and needed < INFINITE:
                out.append_limit_hit = True
            continue
        while True:
            steps += 1
            if steps > budget:
                raise BudgetExceeded(budget)
            if visited is not None:
                key = (pc, sp)
                if key in visited:
                    break
                visited.add(key)
            ins = prog[pc]
            op = ins[0]
            if op == OP_CHAR:
                total = n + len(buffer)
                if sp < n:
                    ch = text[sp]
                elif sp < total:
                    ch = buffer[sp - n]
                else:
                    if append_limit is None or len(buffer) >= append_limit:
                        if append_limit is not None:
                            out.append_limit_hit = True
                        break
                    if not ins[1]:
                        break
                    # appended characters are never compared against chosen
                    # ones (appends happen only at the frontier and backrefs
                    # landing past the input copy rather than compare), so
                    # the smallest class member is as good as any other
                    buffer.append(chr(ins[1][0][0]))
                    pc += 1
                    sp += 1
                    continue
                if ranges_contain(ins[1], ord(ch)):
                    pc += 1
                    sp += 1
                    continue
                break
            if op == OP_SPLIT:
                alts.append((ins[2], sp, caps, callstack, pending, len(buffer), None))
                pc = ins[1]
                continue
            if op == OP_JMP:
                pc = ins[1]
                continue
            if op == OP_SAVE:
                slot = ins[1]
                caps = caps[:slot] + (sp,) + caps[slot + 1 :]
                pc += 1
                continue
            if op == OP_MATCH:
                if sp == n + len(buffer):
                    out.matched = True
                    out.caps = caps
                    out.appended = "".join(buffer)
                    return out
                break
            if op == OP_BACKREF:
                idx = ins[1]
                start, end = caps[2 * idx], caps[2 * idx + 1]
                if start is None or end is None:
                    break
                ok = True
                j = start
                while j < end:
                    ref_ch = text[j] if j < n else buffer[j - n]
                    total = n + len(buffer)
                    if sp < n:
                        cur = text[sp]
                    elif sp < total:
                        cur = buffer[sp - n]
                    else:
                        if append_limit is None or len(buffer) >= append_limit:
                            if append_limit is not None:
                                out.append_limit_hit = True
                            ok = False
                            break
                        buffer.append(ref_ch)
                        cur = ref_ch
                    if cur != ref_ch and (
                        case_sensitive or cur.lower() != ref_ch.lower()
                    ):
                        ok = False
                        break
                    sp += 1
                    j += 1
                if ok:
                    pc += 1
                    continue
                break
            if op == OP_CALL:
                if len(callstack) >= options.recursion_limit:
                    out.depth_limited = True
                    break
                ret_pc = pc + 1
                needed = ahead[ins[1]] + ahead[ret_pc] + pending
                if needed > avail_base - sp:
                    if append_limit is not None and needed < INFINITE:
                        out.append_limit_hit = True
                    break  # call plus continuation cannot fit
                callstack = callstack + (ret_pc,)
                pending += ahead[ret_pc]
                pc = ins[1]
                continue
            if op == OP_RET:
                pc = callstack[-1]
                callstack = callstack[:-1]
                pending -= ahead[pc]
                continue
            raise CompileError(f"unknown opcode {op}")  # pragma: no cover
    return out


def search_min_completion(cp: CompiledPattern, kept: str, budget: int) -> str | None:
    """Minimal-length string completing ``kept`` to a member, or None.

    Iterative deepening on the appended length; each level is a full
    depth-first search, so the first level that succeeds is the minimum.
    Starts at the precomputed consumption lower bound and stops early when
    a level fails without ever touching its append limit (deeper levels
    cannot help then).
    """
    floor = max(0, cp._min_ahead[0] - len(kept))
    if floor > budget:
        return None
    for limit in range(floor, budget + 1):
        outcome = _run_backtrack(cp, kept, append_limit=limit)
        if outcome.matched:
            return outcome.appended
        if not outcome.append_limit_hit:
            return None
    return None


# ---------------------------------------------------------------------------
# Matching.


def _captures_dict(cp: CompiledPattern, caps) -> dict:
    result = {}
    if caps is None:
        return result
    names = {index: name for name, index in cp.group_names.items()}
    for i in range(1, cp.group_count + 1):
        start, end = caps[2 * i], caps[2 * i + 1]
        if start is not None and end is not None:
            result[i] = (start, end)
            if i in names:
                result[names[i]] = (start, end)
    return result


def _match_regular(cp: CompiledPattern, text: str) -> MatchResult:
    states = cp.start_states()
    n = len(text)
    if not states:
        return MatchResult(Verdict.NO_VIABLE_PREFIX, 0, n)
    for i, ch in enumerate(text):
        nxt = cp.step(states, ch)
        if not nxt:
            return MatchResult(Verdict.PARTIAL, i, n)
        states = nxt
    if cp.is_accepting(states):
        captures = {}
        if cp.group_count:
            outcome = _run_backtrack(cp, text)
            captures = _captures_dict(cp, outcome.caps)
        return MatchResult(Verdict.FULL, n, n, captures=captures)
    return MatchResult(Verdict.PARTIAL, n, n, prefix_complete=True)


def _viable_general(cp: CompiledPattern, prefix: str, budget: int) -> bool:
    return search_min_completion(cp, prefix, budget) is not None


def _match_general(cp: CompiledPattern, text: str) -> MatchResult:
    outcome = _run_backtrack(cp, text)
    n = len(text)
    if outcome.matched:
        return MatchResult(Verdict.FULL, n, n, captures=_captures_dict(cp, outcome.caps))
    if outcome.depth_limited:
        raise RecursionLimit(cp.options.recursion_limit)
    # the budget grows with the input so that viability stays monotone in
    # the prefix length (a longer suffix must fit under the bound)
    budget = cp.options.completion_budget + n
    if _viable_general(cp, text, budget):
        return MatchResult(Verdict.PARTIAL, n, n, prefix_complete=True)
    if not _viable_general(cp, "", budget):
        return MatchResult(Verdict.NO_VIABLE_PREFIX, 0, n)
    lo, hi = 0, n  # viable(text[:lo]) holds, viable(text[:hi]) fails
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _viable_general(cp, text[:mid], budget):
            lo = mid
        else:
            hi = mid
    return MatchResult(Verdict.PARTIAL, lo, n)


def match_partial(cp: CompiledPattern, text: str) -> MatchResult:
    """Match ``text`` against the pattern, reporting the longest viable prefix.

    Returns Full when the whole input is a member; otherwise Partial with
    the maximal ``matched_prefix_len`` (see :class:`MatchResult`), or
    NoViablePrefix for empty-language patterns.
    """
    if cp.is_regular:
        return _match_regular(cp, text)
    return _match_general(cp, text)


def match_full(cp: CompiledPattern, text: str) -> MatchResult:
    """Decide whole-input membership; non-members fall through to partial
    semantics, so the result is identical to :func:`match_partial`."""
    return match_partial(cp, text)
