"""Direct coreference of overt noun phrases.

The resolver walks a document's noun mentions in reading order and matches
each against eight enumerating rules.  Lexical pointers (list-introducing
nouns, distributives, reflexives, referent-less manner nouns) propose fixed
answers; the noun's own estimated referential property proposes the generic
or brand-new readings; and earlier mentions of the same noun compete as
antecedents.  A definite noun takes the most recent compatible mention
outright at 30 points, while a non-definite one scores every compatible
mention that holds a topic/focus entry as W - D + P + 4: the entry's weight
W, its backward distance D over same-kind entries, and the plausibility P
that the noun really is definite.  The best-scoring board entry is the
answer.

Two compatibility gates keep bad antecedents off the board entirely: a
modified noun only accepts mentions carrying the same modifier lemmas, and a
body-part noun with an estimated possessor only accepts mentions with the
same possessor.

Context predicates used by the rule pack (closed list):

  self-definite / self-generic / self-indefinite
      the target noun's estimated referential property
  self-not-definite
      the estimate exists and is not definite, or no estimate exists
  adverbial-usage
      the bunsetsu modifies a predicate, or modifies a noun via NO
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from anaphora.model import Annotation, Bunsetsu, Document, Ref, ZERO
from anaphora.refnum import CategoryScores, RefnumEstimator
from anaphora.rules import (
    EvalContext,
    RulePack,
    enumerate_candidates,
    load_rule_pack,
)
from anaphora.salience import SalienceEntry, SalienceState
from anaphora.scoring import Candidate, NEG_INF, Score, ScoreBoard, select_best

DEFAULT_PACK_DIR = Path(__file__).parent / "rulepacks"

COREF = "coref"

PREDICATIVE_POS = ("verb", "adjective")

# Penalty for the gap between the definite score and the best other category.
DIFF_PENALTIES = (Score.of(0), Score.of(-3), Score.of(-6))


def default_pack() -> RulePack:
    return load_rule_pack(DEFAULT_PACK_DIR / "coref.json")


# ---------------------------------------------------------------------------
# The three compatibility gates


def definiteness_plausibility(scores: CategoryScores) -> Score:
    """How plausibly the phrase is definite, from its estimation cells.

    The gap between the best non-definite value and the definite value maps
    onto 0, -3, -6, and negative infinity from a gap of three upward; a
    fractional gap counts as the whole step below it.
    """

    definite = scores.value.get("definite", Score.of(0))
    others = [v for c, v in scores.value.items() if c != "definite"]
    best_other = max(others) if others else Score.of(0)
    if best_other <= definite:
        return DIFF_PENALTIES[0]
    gap = best_other - definite
    step = int(gap.value)  # floor for the non-negative gap
    if step >= 3:
        return NEG_INF
    return DIFF_PENALTIES[step]


def modifier_lemmas(np: Bunsetsu, doc: Document) -> frozenset:
    """Head lemmas of the bunsetsu directly modifying `np`."""

    sentence = doc.sentences[np.sentence_index]
    return frozenset(
        b.lemma for b in sentence.bunsetsu if b.modifiee == np.sentence_pos
    )


def modifier_compatible(anaphor: Bunsetsu, candidate: Bunsetsu, doc: Document) -> bool:
    """An unmodified noun accepts anything; a modified one wants a match."""

    mine = modifier_lemmas(anaphor, doc)
    if not mine:
        return True
    return mine == modifier_lemmas(candidate, doc)


def possessor_of(np: Bunsetsu, ctx: EvalContext) -> Optional[Bunsetsu]:
    """The nearest human/animal subject or topic, for body-part nouns only."""

    resources = ctx.resources
    if resources is None:
        return None
    if "PAR" not in resources.markers_of(np.lemma):
        return None
    doc = ctx.doc
    subjects = {
        link.filler
        for link in doc.case_links
        if link.slot == "GA" and link.filler != ZERO
    }
    for b in bunsetsu_before(doc, np.ref):
        if not b.is_nounish():
            continue
        sig = b.particle_signature
        if not (sig in ("WA", "NIWA", "GA") or b.ref in subjects):
            continue
        markers = resources.markers_of(b.lemma)
        if markers & {"HUM", "ANI"}:
            return b
    return None


def possessor_compatible(anaphor: Bunsetsu, candidate: Bunsetsu, ctx: EvalContext) -> bool:
    mine = possessor_of(anaphor, ctx)
    if mine is None:
        return True
    theirs = possessor_of(candidate, ctx)
    return theirs is not None and theirs.lemma == mine.lemma


def bunsetsu_before(doc: Document, ref: Ref) -> Iterator[Bunsetsu]:
    """All bunsetsu strictly before `ref`, nearest first."""

    for b in sorted(doc.iter_bunsetsu(), key=lambda x: x.ref, reverse=True):
        if b.ref < ref:
            yield b


# ---------------------------------------------------------------------------
# The resolver


class CorefResolver:
    """Scores antecedent candidates for every noun of one document."""

    def __init__(
        self,
        doc: Document,
        resources: object = None,
        pack: Optional[RulePack] = None,
        refnum: Optional[RefnumEstimator] = None,
        salience: Optional[SalienceState] = None,
    ):
        self.doc = doc
        self.pack = pack if pack is not None else default_pack()
        if self.pack.task != COREF:
            raise ValueError(f"coref pack has task {self.pack.task!r}")
        self.refnum = refnum if refnum is not None else RefnumEstimator(doc, resources=resources)
        self.salience = salience if salience is not None else SalienceState()
        self.ctx = EvalContext(
            doc=doc,
            resources=resources,
            salience=self.salience,
            refprop=self.refnum.ctx.refprop,
            number=self.refnum.ctx.number,
            predicate=self._predicate,
            resolve=self._resolve,
        )

    # -- public entry points --------------------------------------------

    def resolve(self) -> List[Annotation]:
        """One answer per noun whose board is non-empty, salience as it goes."""

        self.ensure_refnum()
        out: List[Annotation] = []
        for b in self.doc.iter_bunsetsu():
            if not b.is_nounish():
                continue
            if b.head.pos != "pronoun":
                link = self.resolve_noun(b.ref)
                if link is not None:
                    out.append(link)
            self.salience.push_mention(b)
        return out

    def resolve_noun(self, ref: Ref) -> Optional[Annotation]:
        board = self.board_for(ref)
        best = select_best(board)
        if best is None:
            return None
        candidate, score = best
        return Annotation(
            target=ref,
            task=COREF,
            answer=candidate,
            score=score,
            trace=list(board.get(candidate).trace),
        )

    def board_for(self, ref: Ref) -> ScoreBoard:
        return enumerate_candidates(self.pack, ref, self.ctx)

    def ensure_refnum(self) -> None:
        if not self.refnum.refprop_details:
            self.refnum.annotate()

    # -- estimation lookups ----------------------------------------------

    def _chosen_refprop(self, ref: Ref) -> Optional[str]:
        got = self.ctx.refprop.get(ref)
        return str(got) if got is not None else self.refnum.refprop_of(ref)

    def refprop_cells(self, ref: Ref) -> CategoryScores:
        """Full estimation cells for one phrase, for plausibility lookups."""

        got = self.refnum.refprop_details.get(ref)
        return got if got is not None else self.refnum.refprop_scores(ref)

    # -- context predicates ------------------------------------------------

    def _predicate(self, ctx: EvalContext, name: str, ref: Ref, bindings: dict) -> bool:
        if name == "self-definite":
            return self._chosen_refprop(ref) == "definite"
        if name == "self-generic":
            return self._chosen_refprop(ref) == "generic"
        if name == "self-indefinite":
            return self._chosen_refprop(ref) == "indefinite"
        if name == "self-not-definite":
            return self._chosen_refprop(ref) != "definite"
        if name == "adverbial-usage":
            return self._adverbial_usage(ref)
        raise ValueError(f"unknown context predicate {name!r}")

    def _adverbial_usage(self, ref: Ref) -> bool:
        b = self.doc.bunsetsu_at(ref)
        governor = self.doc.governor(b)
        if governor is None:
            return False
        if governor.head.pos in PREDICATIVE_POS:
            return True
        return governor.is_nounish() and "NO" in b.particles

    # -- candidate selectors -------------------------------------------------

    def _resolve(
        self, ctx: EvalContext, rule, selector: str, ref: Ref, bindings: dict
    ) -> Iterable[Tuple[Candidate, dict]]:
        if selector in ("indefinite", "generic", "no-referent", "next-sentences"):
            return [(Candidate("special", selector), {})]
        if selector == "clause-subject":
            return self._clause_subject(ref)
        if selector == "latest-same-noun":
            return self._latest_same_noun(ref)
        if selector == "salient-same-noun":
            return self._salient_same_noun(ref)
        raise ValueError(f"unknown candidate selector {selector!r}")

    def _clause_subject(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        b = self.doc.bunsetsu_at(ref)
        node = self.doc.governor(b)
        while node is not None and node.head.pos not in PREDICATIVE_POS:
            node = self.doc.governor(node)
        if node is None:
            return []
        filler = self.doc.slot_filler(node.ref, "GA")
        if not isinstance(filler, tuple) or filler == ref:
            return []
        return [(Candidate("entity", filler), {})]

    def _compatible_prior_mentions(self, ref: Ref) -> List[Bunsetsu]:
        """Earlier same-lemma mentions passing both gates, nearest first."""

        anaphor = self.doc.bunsetsu_at(ref)
        out = []
        for b in bunsetsu_before(self.doc, ref):
            if not b.is_nounish() or b.lemma != anaphor.lemma:
                continue
            if not modifier_compatible(anaphor, b, self.doc):
                continue
            if not possessor_compatible(anaphor, b, self.ctx):
                continue
            out.append(b)
        return out

    def _latest_same_noun(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        mentions = self._compatible_prior_mentions(ref)
        if not mentions:
            return []
        return [(Candidate("entity", mentions[0].ref), {})]

    def _salient_same_noun(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        plausibility = definiteness_plausibility(self.refprop_cells(ref))
        if plausibility.is_neg_inf:
            return []
        out = []
        for mention in self._compatible_prior_mentions(ref):
            entry = self._entry_of(mention.ref, ref)
            if entry is None:
                continue
            env = {
                "W": Score.of(entry.weight),
                "D": Score.of(self.salience.distance(ref, entry)),
                "P": plausibility,
            }
            out.append((Candidate("entity", mention.ref), env))
        return out

    def _entry_of(self, mention: Ref, before: Ref) -> Optional[SalienceEntry]:
        for entry in reversed(self.salience.entries_before(before)):
            if entry.entity == mention:
                return entry
        return None


# ---------------------------------------------------------------------------
# Module-level convenience


def resolve_coref(
    doc: Document,
    pack: Optional[RulePack] = None,
    resources: object = None,
    refnum: Optional[RefnumEstimator] = None,
    salience: Optional[SalienceState] = None,
) -> List[Annotation]:
    """Coreference answers for one document, in reading order."""

    return CorefResolver(
        doc, resources=resources, pack=pack, refnum=refnum, salience=salience
    ).resolve()
