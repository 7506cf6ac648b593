"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -v -s``).

The statistical checks run against independent oracles: a Brzozowski
derivative matcher for language membership and viability, and exhaustive
suffix enumeration for completion minimality.
"""

import json
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

import oracles
from generators import ALPHABET, gen_input_near, gen_pattern
from linegrade import (
    Verdict,
    compile_pattern,
    compile_template,
    confusion_metrics,
    dedupe_whitespace,
    match_full,
    match_partial,
    next_char_hint,
    parse,
    shortest_completion,
)
from linegrade.cli import main as cli_main
from linegrade.service import create_app

DATA_DIR = Path(__file__).parent / "data"

ORACLE_EQUIV_PATTERNS = 10_000
PARTIAL_PAIRS = 10_000
COMPLETION_CASES = 2_000
HINT_CHAIN_CASES = 1_000
PAREN_CASES = 500


def report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def random_parsed_patterns(rng, count, depth=4):
    out = []
    while len(out) < count:
        pattern = gen_pattern(rng, depth)
        try:
            out.append((pattern, parse(pattern)))
        except Exception:
            continue
    return out


def test_oracle_equivalence_on_all_strings_up_to_len8():
    """match_full agrees with the derivative oracle on every string of
    length <= 8 over {a, b, (, )} for 10,000 random patterns, in <= 5 min.

    The agreement walk compares acceptance at every node of the string
    trie, skipping only subtrees where both sides are dead (which then
    agree on every extension by construction); per-pattern spot calls tie
    the public match_full to the walked automaton.
    """
    rng = random.Random(20260810)
    started = time.time()
    mismatches = 0
    spot_rng = random.Random(1)
    for pattern, ast in random_parsed_patterns(rng, ORACLE_EQUIV_PATTERNS):
        ir = oracles.desugar(ast.root)
        cp = compile_pattern(ast)
        stack = [(cp.start_states(), ir, "", 0)]
        while stack:
            states, r, prefix, depth = stack.pop()
            engine_accepts = cp.is_accepting(states)
            oracle_accepts = oracles.nullable(r) if r != oracles.EMPTY else False
            if engine_accepts != oracle_accepts:
                mismatches += 1
                print("disagreement:", repr(pattern), repr(prefix))
                break
            if depth == 8:
                continue
            for ch in ALPHABET:
                stepped = cp.step(states, ch)
                derived = oracles.deriv(r, ch) if r != oracles.EMPTY else oracles.EMPTY
                if stepped or derived != oracles.EMPTY:
                    stack.append((stepped, derived, prefix + ch, depth + 1))
        for _ in range(3):
            s = "".join(spot_rng.choice(ALPHABET) for _ in range(spot_rng.randint(0, 8)))
            if match_full(cp, s).is_full != oracles.accepts(ir, s):
                mismatches += 1
                print("spot disagreement:", repr(pattern), repr(s))
    elapsed = time.time() - started
    report(
        "oracle-equivalence",
        mismatches == 0 and elapsed <= 300,
        f"{ORACLE_EQUIV_PATTERNS} patterns, {mismatches} mismatches, {elapsed:.0f}s",
    )


def test_partial_match_maximality():
    """matched_prefix_len satisfies viable(k) and not viable(k+1) under the
    oracle for 10,000 random (pattern, input) pairs."""
    rng = random.Random(42)
    pairs = 0
    failures = 0
    while pairs < PARTIAL_PAIRS:
        pattern, ast = random_parsed_patterns(rng, 1)[0]
        ir = oracles.desugar(ast.root)
        cp = compile_pattern(ast)
        members = sorted(oracles.members(ir, ALPHABET, 6))[:30] if ir != oracles.EMPTY else []
        for _ in range(5):
            s = gen_input_near(rng, members, 8)
            result = match_partial(cp, s)
            pairs += 1
            k = result.matched_prefix_len
            if result.verdict is Verdict.NO_VIABLE_PREFIX:
                ok = ir == oracles.EMPTY or not oracles.viable(ir, "")
            else:
                ok = oracles.viable(ir, s[:k]) and (
                    k == len(s) or not oracles.viable(ir, s[: k + 1])
                )
                if result.verdict is Verdict.FULL:
                    ok = ok and oracles.accepts(ir, s) and k == len(s)
            if not ok:
                failures += 1
                print("maximality failure:", repr(pattern), repr(s), result)
    report("partial-match-maximality", failures == 0, f"{pairs} pairs, {failures} failures")


def test_completion_minimality():
    """shortest_completion length equals the brute-force minimum, checked by
    exhaustive suffix enumeration up to the reported length + 2."""
    rng = random.Random(321)
    cases = 0
    failures = 0
    while cases < COMPLETION_CASES:
        pattern, ast = random_parsed_patterns(rng, 1)[0]
        ir = oracles.desugar(ast.root)
        if ir == oracles.EMPTY:
            continue
        cp = compile_pattern(ast)
        members = sorted(oracles.members(ir, ALPHABET, 6))[:30]
        s = gen_input_near(rng, members, 8)
        completion = shortest_completion(cp, s)
        cases += 1
        kept = s[: completion.prefix_len]
        valid = oracles.accepts(ir, kept + completion.text)
        brute = oracles.min_completion_len(ir, kept, ALPHABET, len(completion.text) + 2)
        if not valid or brute != len(completion.text):
            failures += 1
            print("minimality failure:", repr(pattern), repr(s), completion, brute)
    report("completion-minimality", failures == 0, f"{cases} cases, {failures} failures")


def test_hint_chain_convergence():
    """Iterating the next-character hint from the kept prefix reaches a full
    match in exactly the initial completion length, one character per step."""
    rng = random.Random(7)
    cases = 0
    failures = 0
    recursive_families = [
        r"(?###parens_opt<)ab(?###>)",
        r"(?###parens_req<)a|bb(?###>)",
        r"(?###brackets_opt<)b(?###>)",
    ]
    while cases < HINT_CHAIN_CASES:
        use_recursive = cases % 5 == 4
        if use_recursive:
            pattern = rng.choice(recursive_families)
            cp = compile_template(pattern)
            s = gen_input_near(rng, ["ab", "(ab)", "a", "[b]", "(a)"], 6)
        else:
            pattern, ast = random_parsed_patterns(rng, 1)[0]
            ir = oracles.desugar(ast.root)
            if ir == oracles.EMPTY:
                continue
            cp = compile_pattern(ast)
            s = gen_input_near(rng, sorted(oracles.members(ir, ALPHABET, 5))[:20], 7)
        completion = shortest_completion(cp, s)
        cases += 1
        text = s[: completion.prefix_len]
        ok = True
        for step in range(len(completion.text)):
            hint = next_char_hint(cp, text)
            if len(hint.payload) != 1:
                ok = False
                break
            text += hint.payload
            remaining = shortest_completion(cp, text)
            if (
                remaining.prefix_len != len(text)
                or len(remaining.text) != len(completion.text) - step - 1
            ):
                ok = False
                break
        if ok:
            ok = match_full(cp, text).is_full
        if not ok:
            failures += 1
            print("chain failure:", repr(pattern), repr(s))
    report("hint-chain-convergence", failures == 0, f"{cases} chains, {failures} failures")


# -- parentheses robustness


_OPS = "+-*"


def _gen_expr(rng, depth):
    if depth == 0 or rng.random() < 0.4:
        if rng.random() < 0.5:
            name = rng.choice("abcxyz")
            if rng.random() < 0.3:
                name += rng.choice("abc019")
            return ("leaf", name)
        digits = str(rng.randint(0, 99))
        return ("leaf", digits)
    return ("op", rng.choice(_OPS), _gen_expr(rng, depth - 1), _gen_expr(rng, depth - 1))


def _expr_nodes(tree):
    yield tree
    if tree[0] == "op":
        yield from _expr_nodes(tree[2])
        yield from _expr_nodes(tree[3])


def _render(tree, wrap_target=None, wrap_layers=0, rng=None):
    if tree is wrap_target:
        inner = _render(tree, None, 0, rng)
        pad = " " if rng is not None and rng.random() < 0.3 else ""
        for _ in range(wrap_layers):
            inner = "(" + pad + inner + pad + ")"
        return inner
    if tree[0] == "leaf":
        return tree[1]
    return (
        _render(tree[2], wrap_target, wrap_layers, rng)
        + tree[1]
        + _render(tree[3], wrap_target, wrap_layers, rng)
    )


def _escape(ch):
    return "\\" + ch if ch in r"\.^$|?*+()[]{}" else ch


def _plain_template(tree):
    if tree[0] == "leaf":
        return "".join(_escape(c) for c in tree[1])
    return _plain_template(tree[2]) + r"\s*" + _escape(tree[1]) + r"\s*" + _plain_template(tree[3])


def _macro_template(tree):
    if tree[0] == "leaf":
        body = "".join(_escape(c) for c in tree[1])
    else:
        body = (
            _macro_template(tree[2]) + r"\s*" + _escape(tree[1]) + r"\s*" + _macro_template(tree[3])
        )
    return r"(?###parens_opt<)" + body + r"(?###>)"


def test_parentheses_robustness():
    """Wrapping any subexpression in 1-3 balanced parentheses stays accepted
    by the macro template in 100% of cases, while the macro-free template
    rejects every wrapped case (the false-negative class macros eliminate)."""
    rng = random.Random(2024)
    macro_rejects = 0
    plain_accepts_wrapped = 0
    plain_rejects_base = 0
    for _ in range(PAREN_CASES):
        tree = _gen_expr(rng, rng.randint(1, 3))
        plain_cp = compile_template(_plain_template(tree))
        macro_cp = compile_template(_macro_template(tree))
        base = _render(tree)
        if not match_full(plain_cp, base).is_full or not match_full(macro_cp, base).is_full:
            plain_rejects_base += 1
            continue
        target = rng.choice(list(_expr_nodes(tree)))
        wrapped = _render(tree, target, rng.randint(1, 3), rng)
        if not match_full(macro_cp, wrapped).is_full:
            macro_rejects += 1
            print("macro rejected:", wrapped)
        if match_full(plain_cp, wrapped).is_full:
            plain_accepts_wrapped += 1
            print("plain accepted wrapped:", wrapped)
    report(
        "parentheses-robustness",
        macro_rejects == 0 and plain_accepts_wrapped == 0 and plain_rejects_base == 0,
        f"{PAREN_CASES} wrapped answers; macro rejected {macro_rejects}, "
        f"plain accepted {plain_accepts_wrapped}",
    )


def test_f_measure_arithmetic():
    """Synthetic logs engineered to the published rates reproduce the
    F-measures: (P=1.0, R=0.88) -> 0.936 and (P=1.0, R=0.99) -> 0.995."""
    log88 = (
        [("ok", True, True)] * 88 + [("fn", True, False)] * 12 + [("tn", False, False)] * 40
    )
    log99 = (
        [("ok", True, True)] * 99 + [("fn", True, False)] * 1 + [("tn", False, False)] * 40
    )
    m88 = confusion_metrics(log88)
    m99 = confusion_metrics(log99)
    ok = (
        m88.precision == 1.0
        and abs(m88.recall - 0.88) < 1e-9
        and abs(m88.f_measure - 0.936) <= 0.001
        and m99.precision == 1.0
        and abs(m99.recall - 0.99) < 1e-9
        and abs(m99.f_measure - 0.995) <= 0.001
    )
    report(
        "f-measure-arithmetic",
        ok,
        f"F1(0.88)={m88.f_measure:.4f}, F1(0.99)={m99.f_measure:.4f}",
    )


def test_whitespace_dedupe_hand_counted():
    """A 50-answer synthetic log where 20 answers are whitespace variants of
    10 canonical ones groups into exactly 30 classes; grouping is idempotent."""
    rng = random.Random(99)
    canonical = [f"int x{i} = {i};" for i in range(10)]
    distinct = [f"y{i}+= {i}" for i in range(20)]

    def ws_variant(s):
        out = []
        for ch in s:
            if ch == " " and rng.random() < 0.5:
                out.append(rng.choice(["", "  ", "\t", " \t "]))
            else:
                out.append(ch)
        out.append(rng.choice(["", " ", "\t"]))
        return "".join(out)

    variants = [ws_variant(canonical[i % 10]) for i in range(20)]
    # keep only genuine variants (non-identical raw strings)
    assert all(v not in canonical for v in variants)
    answers = canonical + distinct + variants
    assert len(answers) == 50
    groups = dedupe_whitespace(answers)
    hand_counted = 30  # 10 canonical (absorbing the 20 variants) + 20 distinct
    regrouped = dedupe_whitespace([g[0] for g in groups])
    sizes = sorted(len(g) for g in groups)
    ok = (
        len(groups) == hand_counted
        and len(regrouped) == hand_counted
        and sizes == [1] * 20 + [3] * 10
    )
    report("whitespace-dedupe", ok, f"{len(groups)} groups of 50 answers")


# -- end-to-end CLI against golden files


GOLDEN_BANK = DATA_DIR / "bank.json"
GOLDEN_ANSWERS = DATA_DIR / "candidates.txt"
GOLDEN_RESPONSES = DATA_DIR / "responses.csv"


def run_cli(capsys, *argv):
    code = cli_main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cli_golden_files(capsys):
    """test/analyze/grade golden-file runs byte-match the frozen outputs."""
    code, out, _ = run_cli(
        capsys,
        "test",
        "-e",
        r"(?###parens_opt<)5(?###>)",
        "-f",
        str(GOLDEN_ANSWERS),
        "--hints",
        "--no-color",
    )
    golden_test = (DATA_DIR / "golden_test.txt").read_text()
    ok_test = code == 1 and out == golden_test

    code, out, _ = run_cli(capsys, "analyze", "--bank", str(GOLDEN_BANK))
    golden_analyze = (DATA_DIR / "golden_analyze.txt").read_text()
    ok_analyze = code == 0 and out == golden_analyze

    code, out, err = run_cli(
        capsys,
        "grade",
        "--bank",
        str(GOLDEN_BANK),
        "--responses",
        str(GOLDEN_RESPONSES),
        "--metrics",
    )
    golden_grade = (DATA_DIR / "golden_grade.csv").read_text()
    golden_metrics = (DATA_DIR / "golden_metrics.txt").read_text()
    ok_grade = code == 0 and out == golden_grade and err == golden_metrics
    if not (ok_test and ok_analyze and ok_grade):
        print("test ok:", ok_test, "analyze ok:", ok_analyze, "grade ok:", ok_grade)
    report("cli-golden-files", ok_test and ok_analyze and ok_grade)


def test_serve_golden_listing(tmp_path):
    """`serve` comes up, answers the questions listing exactly as frozen and
    replays its store after restart."""
    import urllib.request

    port = _free_port()
    store = tmp_path / "events.ndjson"
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "linegrade",
            "serve",
            "--bank",
            str(GOLDEN_BANK),
            "--port",
            str(port),
            "--store",
            str(store),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    try:
        listing = _wait_for(f"http://127.0.0.1:{port}/api/questions")
        golden = json.loads((DATA_DIR / "golden_questions.json").read_text())
        ok_listing = listing == golden
        request = urllib.request.Request(
            f"http://127.0.0.1:{port}/api/attempts",
            data=json.dumps({"question_id": "wrap-five"}).encode(),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            attempt = json.loads(response.read())
        request = urllib.request.Request(
            f"http://127.0.0.1:{port}/api/attempts/{attempt['attempt_id']}/answer",
            data=json.dumps({"text": "((5))"}).encode(),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            graded = json.loads(response.read())
        ok_grade = graded["grade"]["final_fraction"] == 1.0
    finally:
        proc.terminate()
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
    from linegrade import load_bank
    from linegrade.service import SessionStore

    replayed = SessionStore(load_bank(GOLDEN_BANK.read_bytes()), store)
    ok_replay = (
        len(replayed.attempts) == 1
        and next(iter(replayed.attempts.values())).submissions[0].result.final_fraction == 1.0
    )
    report("cli-serve-golden", ok_listing and ok_grade and ok_replay)


def test_grading_path_identity_cli_vs_api(tmp_path, capsys):
    """Grading 30 fixture responses through the CLI equals grading them
    through the HTTP API, row by row."""
    rows = [line.split(",", 2) for line in GOLDEN_RESPONSES.read_text().splitlines()]
    assert len(rows) >= 30
    code, out, _ = run_cli(
        capsys, "grade", "--bank", str(GOLDEN_BANK), "--responses", str(GOLDEN_RESPONSES)
    )
    assert code == 0
    cli_rows = out.splitlines()[1:]

    from linegrade import load_bank

    app = create_app(load_bank(GOLDEN_BANK.read_bytes()), store_path=None, static_dir=None)
    client = TestClient(app)
    mismatches = 0
    for (question_id, text, *_), cli_row in zip(rows, cli_rows):
        attempt = client.post("/api/attempts", json={"question_id": question_id}).json()
        graded = client.post(
            f"/api/attempts/{attempt['attempt_id']}/answer", json={"text": text}
        ).json()["grade"]
        cli_fields = next(
            iter(__import__("csv").reader([cli_row]))
        )
        cli_fraction = float(cli_fields[4])
        cli_verdict = cli_fields[2]
        cli_prefix = int(cli_fields[3])
        if (
            abs(graded["final_fraction"] - cli_fraction) > 1e-9
            or graded["match"]["verdict"] != cli_verdict
            or graded["match"]["matched_prefix_len"] != cli_prefix
        ):
            mismatches += 1
            print("identity failure:", question_id, repr(text), cli_row, graded)
    report(
        "grading-path-identity",
        mismatches == 0,
        f"{len(rows)} responses, {mismatches} mismatches",
    )


def _free_port() -> int:
    import socket

    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _wait_for(url, timeout=15.0):
    import urllib.request

    deadline = time.time() + timeout
    while time.time() < deadline:
        try:
            with urllib.request.urlopen(url, timeout=1) as response:
                return json.loads(response.read())
        except Exception:
            time.sleep(0.1)
    raise TimeoutError(url)
