"""Mention classification and backward-distance counting."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from anaphora.model import Bunsetsu, Morpheme
from anaphora.salience import SalienceState, classify_mention, classify_zero


def mention(pos, particles, sentence=0, position=0, copula=False):
    morphemes = [Morpheme(surface="X", lemma="X", pos=pos)]
    if copula:
        morphemes.append(Morpheme(surface="DA", lemma="DA", pos="copula"))
    return Bunsetsu(
        morphemes=tuple(morphemes),
        head_index=0,
        particles=tuple(particles),
        modifiee=None,
        sentence_index=sentence,
        sentence_pos=position,
    )


@pytest.mark.parametrize(
    "pos, particles, expected",
    [
        ("pronoun", ["GA"], ("topic", 21)),
        ("pronoun", ["WA"], ("topic", 21)),
        ("pronoun", ["WO"], ("focus", 16)),
        ("pronoun", ["NI"], ("focus", 16)),
        ("pronoun", ["KARA"], ("focus", 16)),
        ("pronoun", ["NO"], None),
        ("noun", ["WA"], ("topic", 20)),
        ("noun", ["NI", "WA"], ("topic", 20)),
        ("noun", ["GA"], ("focus", 15)),
        ("noun", ["MO"], ("focus", 15)),
        ("noun", ["NARA"], ("focus", 15)),
        ("noun", ["WO"], ("focus", 14)),
        ("noun", ["NI"], ("focus", 14)),
        ("noun", ["WO", "."], ("focus", 14)),
        ("noun", ["."], ("focus", 14)),
        ("noun", [","], ("focus", 14)),
        ("noun", ["HE"], ("focus", 13)),
        ("noun", ["DE"], ("focus", 13)),
        ("noun", ["KARA"], ("focus", 13)),
        ("noun", ["NO"], None),
        ("noun", ["DE", "WA"], None),
        ("numeral", ["NI"], ("focus", 14)),
        ("verb", ["GA"], None),
    ],
)
def test_classify_mention(pos, particles, expected):
    assert classify_mention(mention(pos, particles)) == expected


def test_classify_copula_predicate_noun():
    assert classify_mention(mention("noun", ["."], copula=True)) == ("focus", 15)


def test_classify_zero():
    assert classify_zero("GA") == ("topic", 21)
    assert classify_zero("WO") == ("focus", 16)
    assert classify_zero("NI") == ("focus", 16)
    assert classify_zero("DE") is None


def test_distance_counts_same_kind_inclusive():
    state = SalienceState()
    akichi = state.push(entity=(0, 1), kind="focus", weight=14, position=(0, 1))
    hi_prev = state.push(entity=(0, 2), kind="focus", weight=15, position=(0, 2))
    ki = state.push(entity=(0, 4), kind="focus", weight=15, position=(0, 4))
    state.push(entity=(0, 0), kind="topic", weight=20, position=(0, 0))
    kao = state.push(entity=(1, 1), kind="focus", weight=14, position=(1, 1))
    otoko = state.push(entity=(1, 3), kind="focus", weight=15, position=(1, 3))
    anaphor = (1, 4)
    assert state.distance(anaphor, otoko) == 1
    assert state.distance(anaphor, kao) == 2
    assert state.distance(anaphor, ki) == 3
    assert state.distance(anaphor, hi_prev) == 4
    assert state.distance(anaphor, akichi) == 5


def test_distance_combined_kinds():
    state = SalienceState()
    topic = state.push(entity=(0, 0), kind="topic", weight=20, position=(0, 0))
    focus1 = state.push(entity=(0, 1), kind="focus", weight=13, position=(0, 1))
    focus2 = state.push(entity=(0, 2), kind="focus", weight=14, position=(0, 2))
    anaphor = (1, 0)
    assert state.distance(anaphor, topic) == 1  # only topic entries counted
    assert state.distance(anaphor, topic, kinds=("topic", "focus")) == 3
    assert state.distance(anaphor, focus2, kinds=("topic", "focus")) == 1
    assert state.distance(anaphor, focus1, kinds=("topic", "focus")) == 2


def test_distance_errors():
    state = SalienceState()
    entry = state.push(entity=(0, 0), kind="topic", weight=20, position=(0, 5))
    with pytest.raises(ValueError, match="precede"):
        state.distance((0, 2), entry)  # entry does not precede the anaphor
    with pytest.raises(ValueError, match="excluded"):
        state.distance((1, 0), entry, kinds=("focus",))


def test_entries_before_orders_and_filters():
    state = SalienceState()
    state.push(entity=(0, 0), kind="topic", weight=20, position=(0, 0))
    state.push(entity=(0, 1), kind="focus", weight=14, position=(0, 1))
    state.push(entity=(1, 5), kind="focus", weight=14, position=(1, 5))
    before = state.entries_before((1, 0))
    assert [e.position for e in before] == [(0, 0), (0, 1)]
    assert [e.kind for e in state.entries_before((2, 0), kinds=("focus",))] == ["focus", "focus"]


@st.composite
def states_and_anaphors(draw):
    state = SalienceState()
    n = draw(st.integers(1, 12))
    position = 0
    for _ in range(n):
        position += draw(st.integers(1, 2))
        state.push(
            entity=(0, position),
            kind=draw(st.sampled_from(["topic", "focus"])),
            weight=draw(st.sampled_from([13, 14, 15, 16, 20, 21])),
            position=(0, position),
        )
    anaphor = (0, position + draw(st.integers(1, 3)))
    kinds = draw(st.sampled_from([None, ("topic",), ("focus",), ("topic", "focus")]))
    return state, anaphor, kinds


@given(states_and_anaphors())
def test_distance_matches_backward_scan_oracle(case):
    state, anaphor, kinds = case
    for entry in state.entries:
        wanted = set(kinds) if kinds else {entry.kind}
        if entry.kind not in wanted:
            continue
        older = [e for e in state.entries if e.position < anaphor and e.kind in wanted]
        if entry not in older:
            continue
        # Oracle: slice the backward scan at the candidate and count.
        backward = list(reversed(older))
        expected = backward.index(entry) + 1
        assert state.distance(anaphor, entry, kinds) == expected


@given(states_and_anaphors())
def test_pushing_intervening_entry_increments_distance(case):
    state, anaphor, kinds = case
    entry = state.entries[0]
    wanted = set(kinds) if kinds else {entry.kind}
    if entry.kind not in wanted or entry.position >= anaphor:
        return
    before = state.distance(anaphor, entry, kinds)
    # Push a same-kind entry between the candidate and the anaphor; the scan
    # is chronological, so the newer entry always intervenes.
    state.push(entity=(9, 9), kind=entry.kind, weight=14, position=(anaphor[0], anaphor[1] - 1))
    assert state.distance(anaphor, entry, kinds) == before + 1
