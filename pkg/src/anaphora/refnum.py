"""Referential property and number estimation for every noun, left to right.

Each noun receives two judgements: a referential property (indefinite,
definite, or generic) and a number (singular, plural, or uncountable).
Scored heuristic rules fire on the dependency context; every firing rule
adds its value per category, a possibility-0 cell vetoes its category, and
the best allowed category wins.  Number estimation runs after referential
property so its rules can consult the outcome, and rules for later nouns can
consult the finished judgements of earlier ones.

Rule conditions may name context predicates beyond their structural pattern.
The closed predicate vocabulary (``name`` or ``name:argument``):

  predicate-past / predicate-not-past
      the governing bunsetsu is predicative (verb, adjective, or carries a
      copula morpheme) and is / is not in the past tense
  self-definite / self-indefinite / self-generic / self-not-generic
      the target noun's own referential property (already chosen)
  subject-singular / subject-plural / subject-uncountable
      a GA/WA-marked dependent of the target has the given number
  captured-definite:N / captured-indefinite:N / captured-generic:N
      the bunsetsu the pattern bound as N has the given referential property
  captured-singular:N / captured-plural:N / captured-uncountable:N
      the bunsetsu bound as N has the given number
  captured-adjacent:N
      the bunsetsu bound as N immediately precedes the target
  modifier-pronoun-adjacent
      a pronoun (or demonstrative-adjective) dependent immediately precedes
      the target
  any-modifier-subtree-pronoun
      the target's modifier subtree contains a pronoun
  any-modifier-subtree-definite-ga-wa / -definite-particle / -definite-ni-de
      the modifier subtree contains a definite noun marked GA/WA, marked by
      any case particle, or marked NI/DE
  any-verb-modifier-child-definite-ga-wa / -definite-ga-no
      a verb dependent of the target is itself modified by a definite noun
      marked GA/WA (or GA/NO)
  modified-by-generic-wa / not-modified-by-generic-wa
      a WA-marked dependent of the target is (is not) generic
  sentence-has-generic-wa
      another noun in the sentence, already judged generic, is marked WA
  sentence-topic-person-name
      the sentence holds a WA-marked person name
  prior-same-noun-in-sentence:CAT / prior-same-noun-in-window:CAT
      an earlier mention of the same noun in this sentence (or in the
      preceding window of sentences) was judged CAT
  prior-same-noun-coordinate-in-sentence-not-generic /
  prior-same-noun-coordinate-in-window-not-generic
      such an earlier mention is TO-conjoined and not generic
  prev-bunsetsu-particle:P
      the immediately preceding bunsetsu carries particle P
  prev-bunsetsu-class:NAME
      the immediately preceding bunsetsu's lemma is in lexicon NAME

Predicates about other nouns use the finished judgement when one exists and
otherwise estimate on the spot; a guard set breaks the cycle when two nouns
ask about each other (the inner question then simply fails).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from anaphora.model import (
    Annotation,
    Bunsetsu,
    Document,
    Ref,
    nouns_in_reading_order,
)
from anaphora.rules import EvalContext, RulePack, apply_estimation, load_rule_pack
from anaphora.scoring import Candidate, Score

DEFAULT_PACK_DIR = Path(__file__).parent / "rulepacks"

REFPROP = "refprop"
NUMBER = "number"

PREDICATIVE_POS = ("verb", "adjective")


def default_pack(task: str) -> RulePack:
    """The rule pack shipped with the package for `refprop` or `number`."""

    return load_rule_pack(DEFAULT_PACK_DIR / f"{task}.json")


# ---------------------------------------------------------------------------
# Outcome of one estimation


@dataclass(frozen=True)
class CategoryScores:
    """Per-category (possibility, value) cells plus the decision."""

    categories: Tuple[str, ...]
    possibility: Mapping[str, int]
    value: Mapping[str, Score]
    chosen: str
    fired: Tuple[str, ...]

    def cell(self, category: str) -> Tuple[int, Score]:
        return (self.possibility[category], self.value[category])

    def to_json(self) -> dict:
        return {
            "chosen": self.chosen,
            "scores": {
                c: [self.possibility[c], str(self.value[c])] for c in self.categories
            },
            "fired": list(self.fired),
        }


def decide(categories: Sequence[str], outcome: Mapping[str, Tuple[int, Score]]) -> str:
    """Best allowed category; earlier categories win ties and the default."""

    best: Optional[str] = None
    for cat in categories:
        possibility, value = outcome[cat]
        if possibility != 1:
            continue
        if best is None or value > outcome[best][1]:
            best = cat
    return best if best is not None else categories[0]


def _scores(
    categories: Sequence[str],
    outcome: Mapping[str, Tuple[int, Score]],
    fired: Sequence[str],
) -> CategoryScores:
    return CategoryScores(
        categories=tuple(categories),
        possibility={c: outcome[c][0] for c in categories},
        value={c: outcome[c][1] for c in categories},
        chosen=decide(categories, outcome),
        fired=tuple(fired),
    )


def explain_lines(scores: CategoryScores, pack: RulePack) -> List[str]:
    """One ledger line per firing rule with its cells, then the totals."""

    by_id = {r.id: r for r in pack.estimation_rules}
    lines = []
    for rid in scores.fired:
        rule = by_id[rid]
        cells = "  ".join(
            f"{c} ({rule.effects[c][0]}, {rule.effects[c][1]})"
            for c in pack.categories
        )
        suffix = f"   [{rule.note}]" if rule.note else ""
        lines.append(f"  {rid}: {cells}{suffix}")
    totals = "  ".join(
        f"{c} ({scores.possibility[c]}, {scores.value[c]})" for c in scores.categories
    )
    lines.append(f"  total: {totals}")
    lines.append(f"  chosen: {scores.chosen}")
    return lines


def _as_ref(noun: Union[Bunsetsu, Ref]) -> Ref:
    if isinstance(noun, Bunsetsu):
        return noun.ref
    return tuple(noun)  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# The estimator


class RefnumEstimator:
    """Runs both judgements noun by noun over one document."""

    def __init__(
        self,
        doc: Document,
        resources: object = None,
        refprop_pack: Optional[RulePack] = None,
        number_pack: Optional[RulePack] = None,
        window: int = 5,
    ):
        self.doc = doc
        self.refprop_pack = refprop_pack or default_pack(REFPROP)
        self.number_pack = number_pack or default_pack(NUMBER)
        if self.refprop_pack.task != REFPROP:
            raise ValueError(f"refprop pack has task {self.refprop_pack.task!r}")
        if self.number_pack.task != NUMBER:
            raise ValueError(f"number pack has task {self.number_pack.task!r}")
        self.window = window
        self._busy: Set[Tuple[str, Ref]] = set()
        # Full per-noun cells from the annotate() pass, for downstream modules
        # that need more than the chosen category (e.g. plausibility tables).
        self.refprop_details: Dict[Ref, CategoryScores] = {}
        self.number_details: Dict[Ref, CategoryScores] = {}
        merged: Dict[str, frozenset] = dict(self.refprop_pack.lexicons)
        merged.update(self.number_pack.lexicons)
        self.ctx = EvalContext(
            doc=doc,
            resources=resources,
            predicate=self._dispatch,
            extra_lexicons=merged,
        )

    # -- estimation ---------------------------------------------------------

    def refprop_scores(self, ref: Ref) -> CategoryScores:
        return self._estimate(REFPROP, self.refprop_pack, ref)

    def number_scores(self, ref: Ref) -> CategoryScores:
        return self._estimate(NUMBER, self.number_pack, ref)

    def _estimate(self, task: str, pack: RulePack, ref: Ref) -> CategoryScores:
        key = (task, ref)
        self._busy.add(key)
        try:
            outcome, fired = apply_estimation(pack, ref, self.ctx)
        finally:
            self._busy.discard(key)
        return _scores(pack.categories, outcome, fired)

    def annotate(self) -> List[Annotation]:
        out: List[Annotation] = []
        for b in nouns_in_reading_order(self.doc):
            rp = self.refprop_scores(b.ref)
            self.ctx.refprop[b.ref] = rp.chosen
            self.refprop_details[b.ref] = rp
            out.append(self._annotation(b.ref, REFPROP, rp, self.refprop_pack))
            num = self.number_scores(b.ref)
            self.ctx.number[b.ref] = num.chosen
            self.number_details[b.ref] = num
            out.append(self._annotation(b.ref, NUMBER, num, self.number_pack))
        return out

    def _annotation(
        self, ref: Ref, task: str, scores: CategoryScores, pack: RulePack
    ) -> Annotation:
        by_id = {r.id: r for r in pack.estimation_rules}
        trace = [(rid, by_id[rid].effects[scores.chosen][1]) for rid in scores.fired]
        return Annotation(
            target=ref,
            task=task,
            answer=Candidate("special", scores.chosen),
            score=scores.value[scores.chosen],
            trace=trace,
        )

    # -- judgements about other nouns ---------------------------------------

    def refprop_of(self, ref: Ref, final_only: bool = False) -> Optional[str]:
        return self._judgement(REFPROP, ref, final_only)

    def number_of(self, ref: Ref, final_only: bool = False) -> Optional[str]:
        return self._judgement(NUMBER, ref, final_only)

    def _judgement(self, task: str, ref: Ref, final_only: bool) -> Optional[str]:
        store = self.ctx.refprop if task == REFPROP else self.ctx.number
        got = store.get(ref)
        if got is not None:
            return str(got)
        if final_only or (task, ref) in self._busy:
            return None
        if not self.doc.bunsetsu_at(ref).is_nounish():
            return None
        if task == NUMBER and (REFPROP, ref) in self._busy:
            # number rules consult the noun's own referential property; asking
            # for the number of a noun whose property is still being decided
            # would loop back around
            return None
        pack = self.refprop_pack if task == REFPROP else self.number_pack
        return self._estimate(task, pack, ref).chosen

    # -- context predicates --------------------------------------------------

    def _dispatch(self, ctx: EvalContext, name: str, ref: Ref, bindings: dict) -> bool:
        op, _, arg = name.partition(":")
        handler = self._HANDLERS.get(op)
        if handler is None:
            raise ValueError(f"unknown context predicate {name!r}")
        return handler(self, ref, arg, bindings)

    def _b(self, ref: Ref) -> Bunsetsu:
        return self.doc.bunsetsu_at(ref)

    def _lexicon(self, name: str) -> frozenset:
        return self.ctx.extra_lexicons.get(name, frozenset())

    def _prev(self, ref: Ref) -> Optional[Bunsetsu]:
        s, pos = ref
        if pos == 0:
            return None
        return self.doc.bunsetsu_at((s, pos - 1))

    def _children(self, ref: Ref) -> Tuple[Bunsetsu, ...]:
        s, pos = ref
        return self.doc.sentences[s].modifiers_of(pos)

    def _modifier_subtree(self, ref: Ref) -> List[Bunsetsu]:
        sent = self.doc.sentences[ref[0]]
        out: List[Bunsetsu] = []
        stack = [ref[1]]
        while stack:
            pos = stack.pop()
            for child in sent.modifiers_of(pos):
                out.append(child)
                stack.append(child.sentence_pos)
        return out

    def _pronounish(self, b: Bunsetsu) -> bool:
        return b.head.pos == "pronoun" or b.lemma in self._lexicon("demo-adj")

    def _governing_tense(self, ref: Ref) -> Optional[bool]:
        """True/False for a past/non-past governing predicate, else None."""

        gov = self.doc.governor(self._b(ref))
        if gov is None:
            return None
        predicative = gov.head.pos in PREDICATIVE_POS or any(
            m.pos == "copula" for m in gov.morphemes
        )
        if not predicative:
            return None
        return any(m.conjugation == "past" for m in gov.morphemes)

    def _p_predicate_past(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._governing_tense(ref) is True

    def _p_predicate_not_past(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._governing_tense(ref) is False

    def _p_self_not_generic(self, ref: Ref, arg: str, bindings: dict) -> bool:
        got = self.refprop_of(ref)
        return got is not None and got != "generic"

    def _subject_number_is(self, ref: Ref, category: str) -> bool:
        for child in self._children(ref):
            if not child.is_nounish():
                continue
            if "GA" not in child.particles and "WA" not in child.particles:
                continue
            if self.number_of(child.ref) == category:
                return True
        return False

    def _p_captured_adjacent(self, ref: Ref, arg: str, bindings: dict) -> bool:
        target = bindings.get(arg)
        if target is None:
            return False
        return target[0] == ref[0] and target[1] == ref[1] - 1

    def _p_modifier_pronoun_adjacent(self, ref: Ref, arg: str, bindings: dict) -> bool:
        for child in self._children(ref):
            if child.sentence_pos == ref[1] - 1 and self._pronounish(child):
                return True
        return False

    def _p_subtree_pronoun(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return any(self._pronounish(b) for b in self._modifier_subtree(ref))

    def _subtree_definite(self, ref: Ref, particles: Optional[Tuple[str, ...]]) -> bool:
        for b in self._modifier_subtree(ref):
            if not b.is_nounish():
                continue
            if particles is None:
                if not b.particle_signature:
                    continue
            elif not any(p in b.particles for p in particles):
                continue
            if self.refprop_of(b.ref) == "definite":
                return True
        return False

    def _p_subtree_definite_ga_wa(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._subtree_definite(ref, ("GA", "WA"))

    def _p_subtree_definite_particle(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._subtree_definite(ref, None)

    def _p_subtree_definite_ni_de(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._subtree_definite(ref, ("NI", "DE"))

    def _verb_child_definite(self, ref: Ref, particles: Tuple[str, ...]) -> bool:
        for child in self._children(ref):
            if child.head.pos != "verb":
                continue
            for grand in self._children(child.ref):
                if not grand.is_nounish():
                    continue
                if not any(p in grand.particles for p in particles):
                    continue
                if self.refprop_of(grand.ref) == "definite":
                    return True
        return False

    def _p_verb_child_definite_ga_wa(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._verb_child_definite(ref, ("GA", "WA"))

    def _p_verb_child_definite_ga_no(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._verb_child_definite(ref, ("GA", "NO"))

    def _generic_wa_child(self, ref: Ref) -> bool:
        for child in self._children(ref):
            if not child.is_nounish() or "WA" not in child.particles:
                continue
            if self.refprop_of(child.ref) == "generic":
                return True
        return False

    def _p_modified_by_generic_wa(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._generic_wa_child(ref)

    def _p_not_modified_by_generic_wa(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return not self._generic_wa_child(ref)

    def _p_sentence_has_generic_wa(self, ref: Ref, arg: str, bindings: dict) -> bool:
        for b in self.doc.sentences[ref[0]].bunsetsu:
            if b.ref == ref or not b.is_nounish() or "WA" not in b.particles:
                continue
            if self.refprop_of(b.ref, final_only=True) == "generic":
                return True
        return False

    def _p_sentence_topic_person_name(self, ref: Ref, arg: str, bindings: dict) -> bool:
        names = self._lexicon("name-person")
        for b in self.doc.sentences[ref[0]].bunsetsu:
            if "WA" not in b.particles or not b.is_nounish():
                continue
            if b.head.subpos == "proper" or b.lemma in names:
                return True
        return False

    def _prior_mentions(self, ref: Ref, in_window: bool) -> List[Bunsetsu]:
        me = self._b(ref)
        out: List[Bunsetsu] = []
        for other in nouns_in_reading_order(self.doc):
            if other.ref >= ref:
                break
            if other.lemma != me.lemma:
                continue
            if in_window:
                if not ref[0] - self.window <= other.sentence_index < ref[0]:
                    continue
            elif other.sentence_index != ref[0]:
                continue
            out.append(other)
        return out

    def _prior_with_category(self, ref: Ref, category: str, in_window: bool) -> bool:
        return any(
            self.refprop_of(other.ref, final_only=True) == category
            for other in self._prior_mentions(ref, in_window)
        )

    def _p_prior_in_sentence(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._prior_with_category(ref, arg, in_window=False)

    def _p_prior_in_window(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._prior_with_category(ref, arg, in_window=True)

    def _prior_coordinate_not_generic(self, ref: Ref, in_window: bool) -> bool:
        for other in self._prior_mentions(ref, in_window):
            if "TO" not in other.particles:
                continue
            got = self.refprop_of(other.ref, final_only=True)
            if got is not None and got != "generic":
                return True
        return False

    def _p_prior_coordinate_in_sentence(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._prior_coordinate_not_generic(ref, in_window=False)

    def _p_prior_coordinate_in_window(self, ref: Ref, arg: str, bindings: dict) -> bool:
        return self._prior_coordinate_not_generic(ref, in_window=True)

    def _p_prev_particle(self, ref: Ref, arg: str, bindings: dict) -> bool:
        prev = self._prev(ref)
        return prev is not None and arg in prev.particles

    def _p_prev_class(self, ref: Ref, arg: str, bindings: dict) -> bool:
        prev = self._prev(ref)
        return prev is not None and prev.lemma in self._lexicon(arg)

    _HANDLERS: Dict[str, object] = {}


def _captured_refprop(category: str):
    def handler(est: RefnumEstimator, ref: Ref, arg: str, bindings: dict) -> bool:
        target = bindings.get(arg)
        return target is not None and est.refprop_of(target) == category

    return handler


def _captured_number(category: str):
    def handler(est: RefnumEstimator, ref: Ref, arg: str, bindings: dict) -> bool:
        target = bindings.get(arg)
        return target is not None and est.number_of(target) == category

    return handler


def _self_refprop(category: str):
    def handler(est: RefnumEstimator, ref: Ref, arg: str, bindings: dict) -> bool:
        return est.refprop_of(ref) == category

    return handler


def _subject_number(category: str):
    def handler(est: RefnumEstimator, ref: Ref, arg: str, bindings: dict) -> bool:
        return est._subject_number_is(ref, category)

    return handler


RefnumEstimator._HANDLERS = {
    "predicate-past": RefnumEstimator._p_predicate_past,
    "predicate-not-past": RefnumEstimator._p_predicate_not_past,
    "self-definite": _self_refprop("definite"),
    "self-indefinite": _self_refprop("indefinite"),
    "self-generic": _self_refprop("generic"),
    "self-not-generic": RefnumEstimator._p_self_not_generic,
    "subject-singular": _subject_number("singular"),
    "subject-plural": _subject_number("plural"),
    "subject-uncountable": _subject_number("uncountable"),
    "captured-definite": _captured_refprop("definite"),
    "captured-indefinite": _captured_refprop("indefinite"),
    "captured-generic": _captured_refprop("generic"),
    "captured-singular": _captured_number("singular"),
    "captured-plural": _captured_number("plural"),
    "captured-uncountable": _captured_number("uncountable"),
    "captured-adjacent": RefnumEstimator._p_captured_adjacent,
    "modifier-pronoun-adjacent": RefnumEstimator._p_modifier_pronoun_adjacent,
    "any-modifier-subtree-pronoun": RefnumEstimator._p_subtree_pronoun,
    "any-modifier-subtree-definite-ga-wa": RefnumEstimator._p_subtree_definite_ga_wa,
    "any-modifier-subtree-definite-particle": RefnumEstimator._p_subtree_definite_particle,
    "any-modifier-subtree-definite-ni-de": RefnumEstimator._p_subtree_definite_ni_de,
    "any-verb-modifier-child-definite-ga-wa": RefnumEstimator._p_verb_child_definite_ga_wa,
    "any-verb-modifier-child-definite-ga-no": RefnumEstimator._p_verb_child_definite_ga_no,
    "modified-by-generic-wa": RefnumEstimator._p_modified_by_generic_wa,
    "not-modified-by-generic-wa": RefnumEstimator._p_not_modified_by_generic_wa,
    "sentence-has-generic-wa": RefnumEstimator._p_sentence_has_generic_wa,
    "sentence-topic-person-name": RefnumEstimator._p_sentence_topic_person_name,
    "prior-same-noun-in-sentence": RefnumEstimator._p_prior_in_sentence,
    "prior-same-noun-in-window": RefnumEstimator._p_prior_in_window,
    "prior-same-noun-coordinate-in-sentence-not-generic": RefnumEstimator._p_prior_coordinate_in_sentence,
    "prior-same-noun-coordinate-in-window-not-generic": RefnumEstimator._p_prior_coordinate_in_window,
    "prev-bunsetsu-particle": RefnumEstimator._p_prev_particle,
    "prev-bunsetsu-class": RefnumEstimator._p_prev_class,
}


# ---------------------------------------------------------------------------
# Module-level entry points


def _seed(est: RefnumEstimator, prior: Optional[Iterable[Annotation]]) -> None:
    for ann in prior or ():
        label = ann.answer.ref if ann.answer.kind == "special" else None
        if label is None:
            continue
        if ann.task == REFPROP:
            est.ctx.refprop[ann.target] = label
        elif ann.task == NUMBER:
            est.ctx.number[ann.target] = label


def estimate_refprop(
    noun: Union[Bunsetsu, Ref],
    doc: Document,
    prior: Optional[Iterable[Annotation]] = None,
    pack: Optional[RulePack] = None,
    resources: object = None,
) -> CategoryScores:
    """Referential-property cells and decision for one noun."""

    est = RefnumEstimator(doc, resources=resources, refprop_pack=pack)
    _seed(est, prior)
    return est.refprop_scores(_as_ref(noun))


def estimate_number(
    noun: Union[Bunsetsu, Ref],
    doc: Document,
    refprop_result: Union[CategoryScores, str, None] = None,
    pack: Optional[RulePack] = None,
    prior: Optional[Iterable[Annotation]] = None,
    resources: object = None,
) -> CategoryScores:
    """Number cells and decision for one noun, given its referential property."""

    est = RefnumEstimator(doc, resources=resources, number_pack=pack)
    _seed(est, prior)
    ref = _as_ref(noun)
    if isinstance(refprop_result, CategoryScores):
        est.ctx.refprop[ref] = refprop_result.chosen
    elif isinstance(refprop_result, str):
        est.ctx.refprop[ref] = refprop_result
    return est.number_scores(ref)


def annotate_refnum(
    doc: Document,
    packs: Union[Mapping[str, RulePack], Sequence[RulePack], None] = None,
    resources: object = None,
    window: int = 5,
) -> List[Annotation]:
    """Both judgements for every noun in reading order."""

    refprop_pack, number_pack = _pack_pair(packs)
    est = RefnumEstimator(
        doc,
        resources=resources,
        refprop_pack=refprop_pack,
        number_pack=number_pack,
        window=window,
    )
    return est.annotate()


def _pack_pair(
    packs: Union[Mapping[str, RulePack], Sequence[RulePack], None],
) -> Tuple[Optional[RulePack], Optional[RulePack]]:
    if packs is None:
        return None, None
    if isinstance(packs, Mapping):
        return packs.get(REFPROP), packs.get(NUMBER)
    by_task: Dict[str, RulePack] = {}
    for pack in packs:
        by_task[pack.task] = pack
    return by_task.get(REFPROP), by_task.get(NUMBER)
