import json

import pytest
from hypothesis import given, strategies as st

from linegrade import (
    AttemptClosed,
    AttemptState,
    BankFormatError,
    HintCounts,
    HintKind,
    HintPolicy,
    HintsDisabled,
    PatternError,
    QuizMode,
    Verdict,
    build_question,
    confusion_metrics,
    dedupe_whitespace,
    give_up,
    grade_response,
    load_bank,
    request_hint,
    submit_answer,
)
from linegrade.questions import Attempt, penalty_projection


def make_bank(questions):
    return json.dumps({"version": 1, "questions": questions})


# -- bank loading


def test_load_minimal_bank():
    bank = load_bank(
        make_bank(
            [
                {
                    "id": "q1",
                    "prompt": "p",
                    "answers": [{"pattern": "float|double", "fraction": 1.0, "feedback": ""}],
                }
            ]
        )
    )
    question = bank.get("q1")
    assert question is not None
    assert question.answers[0].metrics.path_count == 2
    assert question.mode is QuizMode.FORMATIVE  # default


def test_load_bank_from_bytes():
    raw = make_bank(
        [{"id": "q", "prompt": "", "answers": [{"pattern": "a", "fraction": 1.0}]}]
    ).encode("utf-8")
    assert len(load_bank(raw)) == 1


def test_duplicate_question_id_rejected():
    doc = make_bank(
        [
            {"id": "q", "prompt": "", "answers": [{"pattern": "a", "fraction": 1.0}]},
            {"id": "q", "prompt": "", "answers": [{"pattern": "b", "fraction": 1.0}]},
        ]
    )
    with pytest.raises(BankFormatError) as err:
        load_bank(doc)
    assert "duplicate" in str(err.value)


def test_unsupported_construct_reported_as_pattern_error():
    doc = make_bank(
        [{"id": "q", "prompt": "", "answers": [{"pattern": "(?=x)y", "fraction": 1.0}]}]
    )
    with pytest.raises(PatternError) as err:
        load_bank(doc)
    assert "look-ahead" in str(err.value)
    assert err.value.question_id == "q"
    assert err.value.answer_index == 0


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ("[]", "top level"),
        ('{"version": 2, "questions": []}', "version"),
        ('{"version": 1}', "questions"),
        (make_bank([{"id": "q", "prompt": "", "answers": []}]), "empty"),
        (
            make_bank([{"id": "q", "prompt": "", "answers": [{"pattern": "a", "fraction": 2}]}]),
            "fraction",
        ),
        (
            make_bank([{"id": "q", "prompt": "", "answers": [{"pattern": "a", "fraction": 0.5}]}]),
            "fraction 1.0",
        ),
        (
            make_bank(
                [{"id": "q", "prompt": "", "mode": "exam", "answers": [{"pattern": "a", "fraction": 1.0}]}]
            ),
            "mode",
        ),
        ("not json", "JSON"),
    ],
)
def test_bank_format_errors(doc, fragment):
    with pytest.raises(BankFormatError) as err:
        load_bank(doc)
    assert fragment in str(err.value)


# -- grading


def two_template_question(**kwargs):
    return build_question(
        "q",
        "prompt",
        [("float", 1.0), ("double", 1.0)],
        **kwargs,
    )


def test_full_match_grades_full_credit():
    question = two_template_question()
    result = grade_response(question, "double")
    assert result.raw_fraction == 1.0
    assert result.final_fraction == 1.0
    assert result.matched_answer_id == 1


def test_hint_penalty_arithmetic():
    question = build_question(
        "q",
        "p",
        [("float|double", 1.0)],
        hint_policy=HintPolicy(enabled=True, char_penalty=0.1, lexeme_penalty=0.2),
    )
    result = grade_response(question, "float", HintCounts(char=3))
    assert result.penalty_total == pytest.approx(0.3)
    assert result.final_fraction == pytest.approx(0.7)


def test_penalty_clamps_at_zero():
    question = build_question(
        "q", "p", [("a", 1.0)], hint_policy=HintPolicy(True, 0.4, 0.0)
    )
    result = grade_response(question, "a", HintCounts(char=5))
    assert result.final_fraction == 0.0


def test_relaxed_template_gives_partial_credit():
    question = build_question(
        "q", "p", [(r"int\s+[a-z]\s*;", 1.0), (r"int\s+[a-z]", 0.5)]
    )
    result = grade_response(question, "int x")
    assert result.raw_fraction == 0.5
    assert result.matched_answer_id == 1
    assert result.match.verdict is Verdict.FULL


def test_no_match_selects_longest_prefix_among_best_fraction():
    question = build_question("q", "p", [("float", 1.0), ("double", 1.0)])
    result = grade_response(question, "dou")
    assert result.raw_fraction == 0.0
    assert result.matched_answer_id is None
    assert result.selected_answer_id == 1  # "dou" is deeper into "double"
    assert result.match.matched_prefix_len == 3


def test_selection_tie_breaks_by_template_order():
    question = build_question("q", "p", [("ax", 1.0), ("ay", 1.0)])
    result = grade_response(question, "a")
    assert result.selected_answer_id == 0


@given(chars=st.integers(0, 6), lexemes=st.integers(0, 6))
def test_final_fraction_bounded_and_monotone(chars, lexemes):
    question = build_question(
        "q", "p", [("a", 1.0)], hint_policy=HintPolicy(True, 0.15, 0.25)
    )
    result = grade_response(question, "a", HintCounts(chars, lexemes))
    assert 0.0 <= result.final_fraction <= 1.0
    more = grade_response(question, "a", HintCounts(chars + 1, lexemes))
    assert more.final_fraction <= result.final_fraction


def test_grading_is_pure_given_hint_counts():
    question = two_template_question()
    first = grade_response(question, "floof", HintCounts(char=1))
    second = grade_response(question, "floof", HintCounts(char=1))
    assert first == second


# -- attempts


def formative_attempt(question=None) -> Attempt:
    question = question or build_question(
        "q",
        "p",
        [("float|double", 1.0)],
        hint_policy=HintPolicy(enabled=True, char_penalty=0.1, lexeme_penalty=0.2),
    )
    return Attempt(attempt_id="a1", question=question, mode=QuizMode.FORMATIVE)


def test_formative_regrade_until_correct():
    attempt = formative_attempt()
    first = submit_answer(attempt, "flat", timestamp=1.0)
    assert first.final_fraction == 0.0
    assert attempt.state is AttemptState.OPEN
    second = submit_answer(attempt, "float", timestamp=2.0)
    assert second.final_fraction == 1.0
    assert attempt.state is AttemptState.COMPLETED
    with pytest.raises(AttemptClosed):
        submit_answer(attempt, "double")


def test_first_hint_on_empty_submission():
    attempt = formative_attempt()
    hint, attempt = request_hint(attempt, HintKind.NEXT_CHAR)
    assert hint.payload == "f"  # minimal completion is "float"
    assert attempt.hints_used.char == 1


def test_consecutive_char_hints_walk_the_completion():
    attempt = formative_attempt()
    submit_answer(attempt, "fl", timestamp=1.0)
    hint, _ = request_hint(attempt, HintKind.NEXT_CHAR)
    assert hint.payload == "o"
    submit_answer(attempt, "flo", timestamp=2.0)
    hint, _ = request_hint(attempt, HintKind.NEXT_CHAR)
    assert hint.payload == "a"
    assert attempt.hints_used.char == 2


def test_hint_penalties_show_up_in_grade():
    attempt = formative_attempt()
    request_hint(attempt, HintKind.NEXT_CHAR)
    request_hint(attempt, HintKind.NEXT_LEXEME)
    result = submit_answer(attempt, "float", timestamp=3.0)
    assert result.penalty_total == pytest.approx(0.1 + 0.2)
    assert result.final_fraction == pytest.approx(0.7)
    assert penalty_projection(attempt)["penalty_total"] == pytest.approx(0.3)


def test_summative_attempt_rejects_hints_and_closes_after_submit():
    question = build_question("q", "p", [("a", 1.0)], mode=QuizMode.SUMMATIVE)
    attempt = Attempt(attempt_id="s1", question=question, mode=QuizMode.SUMMATIVE)
    with pytest.raises(HintsDisabled):
        request_hint(attempt, HintKind.NEXT_CHAR)
    assert attempt.hints_used.char == 0
    submit_answer(attempt, "wrong", timestamp=1.0)
    assert attempt.state is AttemptState.COMPLETED
    with pytest.raises(AttemptClosed):
        submit_answer(attempt, "a")
    assert attempt.hints_used == HintCounts()


def test_disabled_policy_rejects_hints_in_formative_mode():
    question = build_question(
        "q", "p", [("a", 1.0)], hint_policy=HintPolicy(enabled=False)
    )
    attempt = Attempt(attempt_id="x", question=question, mode=QuizMode.FORMATIVE)
    with pytest.raises(HintsDisabled):
        request_hint(attempt, HintKind.NEXT_CHAR)


def test_give_up_freezes_attempt():
    attempt = formative_attempt()
    give_up(attempt)
    assert attempt.state is AttemptState.GIVEN_UP
    with pytest.raises(AttemptClosed):
        request_hint(attempt, HintKind.NEXT_CHAR)
    with pytest.raises(AttemptClosed):
        give_up(attempt)


def test_hint_targets_best_fraction_template():
    question = build_question("q", "p", [(r"aaa", 0.5), (r"zzz", 1.0)])
    attempt = Attempt(attempt_id="y", question=question, mode=QuizMode.FORMATIVE)
    submit_answer(attempt, "aa", timestamp=1.0)
    hint, _ = request_hint(attempt, HintKind.NEXT_CHAR)
    assert hint.payload == "z"  # steers towards the full-credit template


# -- whitespace dedupe


def test_dedupe_groups_whitespace_variants():
    groups = dedupe_whitespace(["int x;", "int  x ;", "intx;"])
    assert len(groups) == 1
    assert groups[0] == ["int x;", "int  x ;", "intx;"]


def test_dedupe_two_groups():
    groups = dedupe_whitespace(["a b", "ab", "a c"])
    assert len(groups) == 2


def test_dedupe_collapse_variant_distinguishes_deleted_space():
    merged = dedupe_whitespace(["a b", "ab"])
    assert len(merged) == 1
    collapsed = dedupe_whitespace(["a b", "ab"], collapse=True)
    assert len(collapsed) == 2
    assert len(dedupe_whitespace(["a  b", "a b"], collapse=True)) == 1


@given(st.lists(st.text(alphabet=st.sampled_from(list("ab ;\t")), max_size=8), max_size=25))
def test_dedupe_is_a_partition(answers):
    groups = dedupe_whitespace(answers)
    flattened = [a for group in groups for a in group]
    assert sorted(flattened) == sorted(answers)
    assert len(groups) <= len(set(answers)) or not answers
    regrouped = dedupe_whitespace([g[0] for g in groups])
    assert len(regrouped) == len(groups)


# -- confusion metrics


def test_f_measure_of_paper_rates():
    log = [("t", True, True)] * 88 + [("t", True, False)] * 12 + [("t", False, False)] * 20
    m = confusion_metrics(log)
    assert m.precision == 1.0
    assert m.recall == pytest.approx(0.88)
    assert m.f_measure == pytest.approx(0.9362, abs=1e-3)
    log99 = [("t", True, True)] * 99 + [("t", True, False)] * 1 + [("t", False, False)] * 20
    m = confusion_metrics(log99)
    assert m.f_measure == pytest.approx(0.99497, abs=1e-4)


def test_all_correct_synthetic_log():
    log = [("x", True, True)] * 7 + [("y", False, False)] * 3
    m = confusion_metrics(log)
    assert (m.precision, m.recall, m.f_measure) == (1.0, 1.0, 1.0)


def test_zero_denominators_yield_none():
    m = confusion_metrics([("x", False, False)])
    assert m.precision is None
    assert m.recall is None
    assert m.f_measure is None
