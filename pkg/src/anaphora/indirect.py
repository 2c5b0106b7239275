"""Bridging anaphora: nouns that lean on an associated earlier phrase.

A noun like "the official rate" or "the roof" often has no earlier mention
of its own; it anchors instead at a related phrase ("West Germany", "a
house").  The resolver walks a document's nouns and, for each one, runs the
direct-coreference rules and four bridging rules over one shared candidate
board, so literal repeats, brand-new readings, and bridging anchors compete
on equal footing:

  R9   an ordinary (non-verbal) noun proposes every earlier topic and focus
       at W - D + P + S, and each subject on its clause chain at 23 + P + S;
       per candidate only the best of those routes counts;
  R10  a verbal noun consults its own argument frame and proposes, per case
       slot, the prior mention that best fits the slot, at 20;
  R11  a relational noun ("part", "neighbor") modifying a base noun proposes
       the latest prior mention of that base, at 30;
  R12  a relational noun filling a verb's case slot proposes the prior
       mention that best fits the verb frame's slot, at 30.

W and D are the salience entry's weight and backward distance; P is how
plausibly the noun is definite (a definite noun wants an anchor, an
indefinite one does not); S is how similar a candidate is to the recorded
"X NO Y" genitive examples of the anaphor noun Y.  The winning candidate
becomes a link: a different-lemma entity is a bridging answer, a same-lemma
entity is ordinary coreference, and a special reading (indefinite, generic,
...) ends the analysis with no bridging link at all.

Context predicates used by the rule pack (closed list):

  not-verbal-noun          head subpos is not the verbal-noun tag
  case-component-of-verb   some case link puts this phrase in a verb's slot
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from anaphora.coref import COREF, PREDICATIVE_POS, CorefResolver, bunsetsu_before
from anaphora.model import Annotation, CaseLink, Document, Ref
from anaphora.refnum import CategoryScores, RefnumEstimator
from anaphora.resources import markers_from_codes, x_no_y_candidates
from anaphora.rules import (
    EvalContext,
    RulePack,
    enumerate_candidates,
    load_rule_pack,
    table_points,
)
from anaphora.salience import FOCUS, TOPIC, SalienceState
from anaphora.scoring import Candidate, NEG_INF, Score, ScoreBoard, select_best

DEFAULT_PACK_DIR = Path(__file__).parent / "rulepacks"

INDIRECT = "indirect"

# How plausibly the anaphor is definite, by the gap between the definite
# value and the best other category: strictly best, equal, one lower, two
# lower; a gap of three or more is disqualifying.
GAP_POINTS = (Score.of(5), Score.of(0), Score.of(-5), Score.of(-10))

# Points per similarity level 0..6 and exact match, for candidates measured
# against the "X NO Y" examples of the anaphor noun Y.
SIMILARITY_POINTS = (
    "noun-similarity",
    tuple(Score.of(v) for v in (-10, -2, 1, 2, Fraction(5, 2), 3, Fraction(7, 2), 4)),
)

S_MODES = ("table", "fig41")

# "fig41" adjustments: when the X examples are dominated by an organization
# or human class, a candidate of that class gains the bonus and any other
# candidate takes the penalty.  Calibrated on the worked official-rate
# example, where the plain table cannot reach the reported totals.
CLASS_MATCH_BONUS = Score.of(Fraction(7, 2))
CLASS_MISMATCH_PENALTY = Score.of(-20)

# A prior mention may fill a case slot when its best similarity level to the
# slot's examples reaches this; a slot semantic-marker match counts as a
# mid-table level on its own.
MIN_SLOT_FIT = 2
MARKER_FIT = 3


def default_pack() -> RulePack:
    return load_rule_pack(DEFAULT_PACK_DIR / "indirect.json")


# ---------------------------------------------------------------------------
# The two scoring ingredients P and S


def indirect_plausibility(scores: CategoryScores) -> Score:
    """How plausibly the phrase wants an anchor, from its estimation cells.

    A phrase whose definite value beats every other category scores 5; from
    there the gap to the best other category maps onto 0, -5, -10, and
    negative infinity from a gap of three upward; a fractional gap counts as
    the whole step below it.
    """

    definite = scores.value.get("definite", Score.of(0))
    others = [v for c, v in scores.value.items() if c != "definite"]
    best_other = max(others) if others else Score.of(0)
    if best_other < definite:
        return GAP_POINTS[0]
    step = int((best_other - definite).value)  # floor for the non-negative gap
    if step >= 3:
        return NEG_INF
    return GAP_POINTS[1 + step]


def _dominant_marker(xs: Sequence[Tuple[str, Tuple[str, ...]]]) -> Optional[str]:
    """Most common semantic marker across the X examples' category codes."""

    counts: Counter = Counter()
    for _, codes in xs:
        for marker in markers_from_codes(codes):
            counts[marker] += 1
    if not counts:
        return None
    top = max(counts.values())
    tied = sorted(
        (m for m, c in counts.items() if c == top),
        key=lambda m: (m not in ("ORG", "HUM"), m),
    )
    return tied[0]


def similarity_points(
    candidate: str, anaphor_y: str, resources, mode: str = "table"
) -> Score:
    """S for a candidate lemma against the "X NO Y" examples of noun Y.

    The candidate scores by its best thesaurus similarity level to any
    recorded X; a noun with no usable examples sits at the level-0 floor.
    Mode "fig41" additionally rewards or punishes agreement with the X
    list's dominant organization/human class.
    """

    if mode not in S_MODES:
        raise ValueError(f"unknown similarity mode {mode!r}")
    xs = x_no_y_candidates(anaphor_y, resources.xnoy, resources.thesaurus)
    codes = [c for _, x_codes in xs for c in x_codes]
    level = resources.thesaurus.best_level_to_codes(candidate, codes) if codes else 0
    points = table_points(SIMILARITY_POINTS, level)
    if mode == "table" or not xs:
        return points
    dominant = _dominant_marker(xs)
    if dominant not in ("ORG", "HUM"):
        return points
    if dominant in resources.markers_of(candidate):
        return points + CLASS_MATCH_BONUS
    return points + CLASS_MISMATCH_PENALTY


# ---------------------------------------------------------------------------
# The resolver


class IndirectResolver:
    """Direct and bridging answers for every noun, on one shared board."""

    def __init__(
        self,
        doc: Document,
        resources: object = None,
        pack: Optional[RulePack] = None,
        coref_pack: Optional[RulePack] = None,
        refnum: Optional[RefnumEstimator] = None,
        salience: Optional[SalienceState] = None,
        s_mode: str = "table",
    ):
        if s_mode not in S_MODES:
            raise ValueError(f"unknown similarity mode {s_mode!r}")
        self.pack = pack if pack is not None else default_pack()
        if self.pack.task != INDIRECT:
            raise ValueError(f"bridging pack has task {self.pack.task!r}")
        self.coref = CorefResolver(
            doc, resources=resources, pack=coref_pack, refnum=refnum, salience=salience
        )
        self.doc = doc
        self.resources = resources
        self.s_mode = s_mode
        self.refnum = self.coref.refnum
        self.salience = self.coref.salience
        self.ctx = EvalContext(
            doc=doc,
            resources=resources,
            salience=self.salience,
            refprop=self.refnum.ctx.refprop,
            number=self.refnum.ctx.number,
            config={"s_mode": s_mode},
            predicate=self._predicate,
            resolve=self._resolve,
        )
        # (anaphor, candidate) -> case slot the candidate was proposed for.
        self._slot_note: Dict[Tuple[Ref, Candidate], str] = {}

    # -- public entry points --------------------------------------------

    def resolve(self) -> List[Annotation]:
        """One answer per noun whose board is non-empty, salience as it goes.

        Each answer is tagged by what won: bridging anchors come out as
        "indirect", literal repeats and special readings as "coref".
        """

        self.coref.ensure_refnum()
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
        task = COREF
        slot = None
        if candidate.kind == "entity" and not self._same_lemma(ref, candidate.ref):
            task = INDIRECT
            slot = self._slot_note.get((ref, candidate))
        return Annotation(
            target=ref,
            task=task,
            answer=candidate,
            score=score,
            trace=list(board.get(candidate).trace),
            slot=slot,
        )

    def board_for(self, ref: Ref) -> ScoreBoard:
        """Direct-coreference proposals plus bridging proposals, one board."""

        board = enumerate_candidates(self.coref.pack, ref, self.coref.ctx)
        return enumerate_candidates(self.pack, ref, self.ctx, board=board)

    # -- lookups -----------------------------------------------------------

    def _same_lemma(self, ref: Ref, other: Ref) -> bool:
        return self.doc.bunsetsu_at(ref).lemma == self.doc.bunsetsu_at(other).lemma

    def _plausibility(self, ref: Ref) -> Score:
        return indirect_plausibility(self.coref.refprop_cells(ref))

    def _similarity(self, candidate_lemma: str, anaphor_lemma: str) -> Score:
        if self.resources is None:
            return table_points(SIMILARITY_POINTS, 0)
        return similarity_points(
            candidate_lemma, anaphor_lemma, self.resources, mode=self.s_mode
        )

    def _case_component(self, ref: Ref) -> Optional[CaseLink]:
        for link in self.doc.case_links:
            if link.filler == ref:
                return link
        return None

    # -- context predicates ------------------------------------------------

    def _predicate(self, ctx: EvalContext, name: str, ref: Ref, bindings: dict) -> bool:
        if name == "not-verbal-noun":
            return self.doc.bunsetsu_at(ref).head.subpos != "verbal"
        if name == "case-component-of-verb":
            link = self._case_component(ref)
            if link is None:
                return False
            return self.doc.bunsetsu_at(link.pred).head.pos in PREDICATIVE_POS
        raise ValueError(f"unknown context predicate {name!r}")

    # -- candidate selectors -------------------------------------------------

    def _resolve(
        self, ctx: EvalContext, rule, selector: str, ref: Ref, bindings: dict
    ) -> Iterable[Tuple[Candidate, dict]]:
        if selector == "salient-topic":
            return self._salient(ref, TOPIC)
        if selector == "salient-focus":
            return self._salient(ref, FOCUS)
        if selector == "governing-subject":
            return self._governing_subjects(ref)
        if selector == "own-frame-slots":
            return self._own_frame_slots(ref)
        if selector == "prior-mention-of-base":
            return self._prior_mention_of_base(ref, bindings)
        if selector == "verb-frame-slot":
            return self._verb_frame_slot(ref)
        raise ValueError(f"unknown candidate selector {selector!r}")

    def _salient(self, ref: Ref, kind: str) -> List[Tuple[Candidate, dict]]:
        plausibility = self._plausibility(ref)
        if plausibility.is_neg_inf:
            return []
        anaphor = self.doc.bunsetsu_at(ref)
        out = []
        for entry in self.salience.entries_before(ref, kinds=(kind,)):
            if entry.entity == ref:
                continue
            env = {
                "W": Score.of(entry.weight),
                "D": Score.of(self.salience.distance(ref, entry)),
                "P": plausibility,
                "S": self._similarity(
                    self.doc.bunsetsu_at(entry.entity).lemma, anaphor.lemma
                ),
            }
            out.append((Candidate("entity", entry.entity), env))
        return out

    def _governing_subjects(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        """Overt subjects of the anaphor's clause chain and its subclauses."""

        plausibility = self._plausibility(ref)
        if plausibility.is_neg_inf:
            return []
        doc = self.doc
        anaphor = doc.bunsetsu_at(ref)
        subjects: List[Ref] = []
        node = doc.governor(anaphor)
        while node is not None:
            if node.head.pos in PREDICATIVE_POS:
                sentence = doc.sentences[node.sentence_index]
                clause_heads = [node] + [
                    b
                    for b in sentence.bunsetsu
                    if b.modifiee == node.sentence_pos
                    and b.head.pos in PREDICATIVE_POS
                ]
                for pred in clause_heads:
                    filler = doc.slot_filler(pred.ref, "GA")
                    if (
                        isinstance(filler, tuple)
                        and filler != ref
                        and filler not in subjects
                    ):
                        subjects.append(filler)
            node = doc.governor(node)
        out = []
        for filler in subjects:
            env = {
                "P": plausibility,
                "S": self._similarity(doc.bunsetsu_at(filler).lemma, anaphor.lemma),
            }
            out.append((Candidate("entity", filler), env))
        return out

    def _own_frame_slots(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        if self.resources is None:
            return []
        frame = self.resources.case_frames.frame_of(self.doc.bunsetsu_at(ref).lemma)
        if frame is None:
            return []
        out = []
        taken = set()
        for slot in frame.slots:
            got = self._slot_filler_antecedent(ref, slot)
            if got is None or got in taken:
                continue
            taken.add(got)
            candidate = Candidate("entity", got)
            self._slot_note[(ref, candidate)] = slot.case
            out.append((candidate, {}))
        return out

    def _verb_frame_slot(self, ref: Ref) -> List[Tuple[Candidate, dict]]:
        if self.resources is None:
            return []
        link = self._case_component(ref)
        if link is None:
            return []
        frame = self.resources.case_frames.frame_of(
            self.doc.bunsetsu_at(link.pred).lemma
        )
        if frame is None:
            return []
        slot = frame.slot(link.slot)
        if slot is None:
            return []
        got = self._slot_filler_antecedent(ref, slot)
        if got is None:
            return []
        candidate = Candidate("entity", got)
        self._slot_note[(ref, candidate)] = slot.case
        return [(candidate, {})]

    def _slot_filler_antecedent(self, ref: Ref, slot) -> Optional[Ref]:
        """The prior noun that best fits the slot's examples and markers."""

        thesaurus = self.resources.thesaurus
        example_codes = [c for ex in slot.examples for c in thesaurus.codes_of(ex)]
        best_ref: Optional[Ref] = None
        best_fit = 0
        for b in bunsetsu_before(self.doc, ref):
            if not b.is_nounish() or b.head.pos == "pronoun":
                continue
            fit = 0
            if example_codes:
                fit = thesaurus.best_level_to_codes(b.lemma, example_codes)
            if slot.markers and (self.resources.markers_of(b.lemma) & slot.markers):
                fit = max(fit, MARKER_FIT)
            if fit > best_fit:
                best_fit, best_ref = fit, b.ref
        return best_ref if best_fit >= MIN_SLOT_FIT else None

    def _prior_mention_of_base(
        self, ref: Ref, bindings: dict
    ) -> List[Tuple[Candidate, dict]]:
        base_ref = bindings.get("x")
        if base_ref is None:
            return []
        base = self.doc.bunsetsu_at(base_ref)
        for b in bunsetsu_before(self.doc, ref):
            if b.is_nounish() and b.ref != base_ref and b.lemma == base.lemma:
                return [(Candidate("entity", b.ref), {})]
        return []


# ---------------------------------------------------------------------------
# Module-level convenience


def resolve_indirect(
    doc: Document,
    pack: Optional[RulePack] = None,
    coref_pack: Optional[RulePack] = None,
    resources: object = None,
    refnum: Optional[RefnumEstimator] = None,
    salience: Optional[SalienceState] = None,
    s_mode: str = "table",
) -> List[Annotation]:
    """Bridging answers for one document, in reading order."""

    resolver = IndirectResolver(
        doc,
        resources=resources,
        pack=pack,
        coref_pack=coref_pack,
        refnum=refnum,
        salience=salience,
        s_mode=s_mode,
    )
    return [a for a in resolver.resolve() if a.task == INDIRECT]
