"""Rule-pack loading, estimation scoring, enumeration, and judging."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

import anaphora.rules as rules_mod
from anaphora.model import parse_document
from anaphora.rules import (
    EvalContext,
    RulePackError,
    apply_estimation,
    enumerate_candidates,
    judge,
    load_rule_pack,
    table_points,
)
from anaphora.scoring import NEG_INF, Candidate, Score, ScoreBoard

DOC = parse_document(
    {
        "sentences": [
            {
                "bunsetsu": [
                    {
                        "morphemes": [{"surface": "KUDAMONO", "lemma": "KUDAMONO", "pos": "noun"}],
                        "head": 0,
                        "particles": ["WA"],
                        "dep": 1,
                    },
                    {
                        "morphemes": [{"surface": "II", "lemma": "II", "pos": "adjective"}],
                        "head": 0,
                        "particles": ["."],
                        "dep": None,
                    },
                ]
            }
        ]
    }
)


def estimation_pack(rule_specs):
    return load_rule_pack(
        {
            "task": "refprop",
            "rules": [
                {
                    "id": f"r{i}",
                    "kind": "estimate",
                    "condition": {"pattern": pattern},
                    "effects": effects,
                }
                for i, (pattern, effects) in enumerate(rule_specs)
            ],
        }
    )


def test_apply_estimation_sums_values_per_category():
    pack = estimation_pack(
        [
            (
                "(node pos=noun)",
                {"indefinite": [1, 1], "definite": [1, 0], "generic": [1, 0]},
            ),
            (
                "(node particle=WA)",
                {"indefinite": [1, 0], "definite": [1, 2], "generic": [1, 3]},
            ),
            (
                "(node particle=WA)",
                {"indefinite": [1, 0], "definite": [1, 7], "generic": [1, 4]},
            ),
            (  # does not fire
                "(node pos=verb)",
                {"indefinite": [1, 9], "definite": [1, 9], "generic": [1, 9]},
            ),
        ]
    )
    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC))
    assert fired == ["r0", "r1", "r2"]
    assert scores["indefinite"] == (1, Score.of(1))
    assert scores["definite"] == (1, Score.of(9))
    assert scores["generic"] == (1, Score.of(7))


def test_apply_estimation_possibility_zero_vetoes_category():
    # An explicit (0, 0) cell marks the category impossible even when other
    # firing rules would allow it with a large accumulated value.
    pack = estimation_pack(
        [
            (
                "(node pos=noun)",
                {"indefinite": [0, 0], "definite": [1, 2], "generic": [0, 0]},
            ),
            (
                "(node particle=WA)",
                {"indefinite": [1, 0], "definite": [1, 1], "generic": [1, 9]},
            ),
        ]
    )
    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC))
    assert fired == ["r0", "r1"]
    assert scores["indefinite"] == (0, Score.of(0))
    assert scores["definite"] == (1, Score.of(3))
    # Value still accumulates but the veto pins possibility at 0.
    assert scores["generic"] == (0, Score.of(9))


def test_apply_estimation_nothing_fires():
    pack = estimation_pack([("(node pos=verb)", {"definite": [1, 5]})])
    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC))
    assert fired == []
    assert all(scores[c] == (0, Score.of(0)) for c in scores)


def test_context_predicates_gate_firing():
    pack = load_rule_pack(
        {
            "task": "refprop",
            "rules": [
                {
                    "id": "ctx",
                    "kind": "estimate",
                    "condition": {"pattern": "-", "context": ["predicate-past"]},
                    "effects": {"definite": [1, 2]},
                }
            ],
        }
    )
    seen = []

    def predicate(ctx, name, ref, bindings):
        seen.append((name, ref))
        return False

    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC, predicate=predicate))
    assert fired == []
    assert seen == [("predicate-past", (0, 0))]


@given(st.lists(st.tuples(st.booleans(), st.integers(0, 10)), min_size=1, max_size=8))
def test_estimation_matches_naive_double_loop(rule_rows):
    # Rules alternate between firing ("-" pattern) and non-firing conditions.
    pack = estimation_pack(
        [
            ("-" if fires else "(node pos=verb)", {"definite": [1, v]})
            for fires, v in rule_rows
        ]
    )
    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC))
    expected_value = sum(v for fires, v in rule_rows if fires)
    expected_poss = 1 if any(fires for fires, _ in rule_rows) else 0
    assert scores["definite"] == (expected_poss, Score.of(expected_value))
    assert len(fired) == sum(1 for fires, _ in rule_rows if fires)


# ---------------------------------------------------------------------------
# Enumeration


def enum_pack(rule_specs, merge="add"):
    return load_rule_pack(
        {
            "task": "coref",
            "rules": [
                {
                    "id": rid,
                    "kind": "enumerate",
                    "condition": {"pattern": "-"},
                    "merge": merge,
                    "proposals": [
                        {"candidate": sel, "points": pts} for sel, pts in proposals
                    ],
                }
                for rid, proposals in rule_specs
            ],
        }
    )


def resolver_from_table(table):
    def resolve(ctx, rule, selector, ref, bindings):
        return table.get(selector, [])

    return resolve


def test_enumerate_merges_duplicates_additively():
    a, b = Candidate("special", "indefinite"), Candidate("entity", (0, 0))
    table = {
        "first": [(a, {}), (b, {"W": 14, "D": 2})],
        "second": [(a, {})],
    }
    pack = enum_pack([("e1", [("first", "10"), ("second", "5")])])
    board = enumerate_candidates(pack, (0, 0), EvalContext(doc=DOC, resolve=resolver_from_table(table)))
    assert board.score_of(a) == Score.of(15)  # 10 + 5 across proposals
    assert board.score_of(b) == Score.of(10)
    assert [e.candidate for e in board.entries()] == [a, b]


def test_enumerate_with_formula_env():
    b = Candidate("entity", (0, 0))
    table = {"salient": [(b, {"W": 15, "D": 4, "P": -3})]}
    pack = enum_pack([("e1", [("salient", "W-D+P+4")])])
    board = enumerate_candidates(pack, (0, 0), EvalContext(doc=DOC, resolve=resolver_from_table(table)))
    assert board.score_of(b) == Score.of(12)


def test_enumerate_max_merge_within_rule():
    b = Candidate("entity", (0, 0))
    table = {
        "topic": [(b, {"W": 21, "D": 1})],
        "subject": [(b, {"W": 0, "D": 0})],
    }
    pack = enum_pack([("e1", [("topic", "W-D"), ("subject", "23")])], merge="max")
    board = enumerate_candidates(pack, (0, 0), EvalContext(doc=DOC, resolve=resolver_from_table(table)))
    assert board.score_of(b) == Score.of(23)  # max(20, 23), not the sum


@given(
    st.lists(
        st.tuples(st.sampled_from(["x", "y", "z"]), st.integers(-5, 20)),
        min_size=1,
        max_size=10,
    )
)
def test_enumerate_equals_group_by_oracle(pairs):
    candidates = {name: Candidate("entity", (0, i)) for i, name in enumerate("xyz")}
    table = {f"sel{i}": [(candidates[name], {})] for i, (name, _) in enumerate(pairs)}
    pack = enum_pack([("e1", [(f"sel{i}", str(pts)) for i, (_, pts) in enumerate(pairs)])])
    board = enumerate_candidates(pack, (0, 0), EvalContext(doc=DOC, resolve=resolver_from_table(table)))
    for name, cand in candidates.items():
        expected = sum(pts for n, pts in pairs if n == name)
        if any(n == name for n, _ in pairs):
            assert board.score_of(cand) == Score.of(expected)
        else:
            assert board.get(cand) is None


# ---------------------------------------------------------------------------
# Judging


def test_judge_adds_points_to_eligible_candidates():
    entity = Candidate("entity", (0, 0))
    sentence = Candidate("sentence", 0)
    board = ScoreBoard()
    board.add(entity, Score.of(10), "seed")
    board.add(sentence, Score.of(15), "seed")
    pack = load_rule_pack(
        {
            "task": "demonstrative",
            "rules": [
                {
                    "id": "j1",
                    "kind": "judge",
                    "condition": {"pattern": "-"},
                    "points": "-30",
                    "applies_to": ["entity"],
                }
            ],
        }
    )

    def assess(ctx, rule, ref, candidate, bindings):
        return rule.points.evaluate({})

    judge(pack, (0, 0), board, EvalContext(doc=DOC, assess=assess))
    assert board.score_of(entity) == Score.of(-20)
    assert board.score_of(sentence) == Score.of(15)  # sentence candidates skipped


def test_judge_neg_inf_absorbs():
    entity = Candidate("entity", (0, 0))
    board = ScoreBoard()
    board.add(entity, NEG_INF, "seed")
    pack = load_rule_pack(
        {
            "task": "zero",
            "rules": [
                {"id": "j", "kind": "judge", "condition": {"pattern": "-"}, "points": "100"}
            ],
        }
    )
    judge(pack, (0, 0), board, EvalContext(doc=DOC, assess=lambda *a: Score.of(100)))
    assert board.score_of(entity) == NEG_INF


def test_table_points():
    pack = load_rule_pack(
        {
            "task": "demonstrative",
            "rules": [
                {
                    "id": "t",
                    "kind": "judge",
                    "condition": {"pattern": "-"},
                    "table": {"kind": "human-codes", "cells": [0, 0, -10, -10, -10, -10, -10, -10]},
                }
            ],
        }
    )
    rule = pack.judging_rules[0]
    assert table_points(rule.table, 0) == Score.of(0)
    assert table_points(rule.table, 7) == Score.of(-10)
    with pytest.raises(ValueError):
        table_points(rule.table, 8)


# ---------------------------------------------------------------------------
# Load-time validation


@pytest.mark.parametrize(
    "mutation, message",
    [
        ({"task": "nonsense"}, "unknown task"),
        ({"rules": [{"kind": "estimate", "effects": {"bogus": [1, 1]}}]}, "unknown category"),
        ({"rules": [{"kind": "estimate", "effects": {"definite": [2, 1]}}]}, "possibility"),
        ({"rules": [{"kind": "estimate", "effects": {"definite": [0, 3]}}]}, "value 0"),
        ({"rules": [{"kind": "estimate", "condition": {"pattern": "(node"}}]}, "unterminated"),
        ({"rules": [{"kind": "frobnicate"}]}, "unknown kind"),
        (
            {"rules": [{"kind": "enumerate", "proposals": [{"candidate": "t", "points": "W-Q"}]}]},
            "unknown symbols",
        ),
        ({"rules": [{"kind": "enumerate", "proposals": []}]}, "needs proposals"),
        (
            {"rules": [{"kind": "enumerate", "merge": "mean", "proposals": [{"candidate": "t"}]}]},
            "merge",
        ),
        ({"rules": [{"kind": "judge"}]}, "points or a table"),
        (
            {"rules": [{"kind": "judge", "table": {"kind": "k", "cells": [1, 2, 3]}}]},
            "8 cells",
        ),
        (
            {"rules": [{"kind": "judge", "table": {"cells": [0, 0, 0, 0, 0, 0, 0, 0]}}]},
            "needs a kind",
        ),
    ],
)
def test_load_validation(mutation, message):
    data = {"task": "refprop", "rules": []}
    data.update(mutation)
    with pytest.raises(RulePackError, match=message):
        load_rule_pack(data)


def test_points_accept_fraction_constants():
    pack = load_rule_pack(
        {
            "task": "zero",
            "rules": [
                {
                    "id": "q",
                    "kind": "enumerate",
                    "condition": {"pattern": "-"},
                    "proposals": [{"candidate": "topic", "points": "W-D*0.4+30"}],
                }
            ],
        }
    )
    formula = pack.enumerating_rules[0].proposals[0].points
    assert formula.evaluate({"W": 21, "D": 5}) == Score.of(49)


def test_enumerate_alias():
    assert rules_mod.enumerate is enumerate_candidates
    # The builtin is still available to the module internals.
    assert list(rules_mod._builtin_enumerate("ab")) == [(0, "a"), (1, "b")]


def test_lexicons_feed_pattern_classes():
    pack = load_rule_pack(
        {
            "task": "refprop",
            "lexicons": {"fruits": ["KUDAMONO"]},
            "rules": [
                {
                    "id": "lex",
                    "kind": "estimate",
                    "condition": {"pattern": "(node class=fruits)"},
                    "effects": {"generic": [1, 2]},
                }
            ],
        }
    )
    scores, fired = apply_estimation(pack, (0, 0), EvalContext(doc=DOC))
    assert fired == ["lex"]
    assert scores["generic"] == (1, Score.of(2))
