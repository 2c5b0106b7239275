"""Pre-analyzed document representation and annotation records.

The engine consumes documents that a morphological/dependency/case analyzer
(or a human) has already segmented: sentences of bunsetsu, each bunsetsu a run
of content morphemes plus trailing particles, dependency-linked into a tree,
with a separate list of case links mapping predicates to their case slots.
Nothing here tokenizes or parses raw text; the input contract is a JSON file
whose exact keys are documented in docs/formats.md.

A zero pronoun is a case link whose filler is the string "zero" (unresolved)
or a bunsetsu that does not directly depend on the predicate (recovered by the
upstream case analysis).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Tuple, Union

from anaphora.scoring import Candidate, Score

Ref = Tuple[int, int]  # (sentence index, bunsetsu index)

ZERO = "zero"

NOUNISH_POS = frozenset({"noun", "pronoun", "numeral"})

# Closed part-of-speech tag set accepted by the format (docs/formats.md).
POS_TAGS = frozenset(
    {
        "noun",
        "pronoun",
        "numeral",
        "verb",
        "adjective",
        "adverb",
        "adnominal",
        "copula",
        "conjunction",
        "interjection",
        "prefix",
        "suffix",
    }
)


class FormatError(ValueError):
    """The document file violates the format or a structural invariant."""


@dataclass(frozen=True)
class Morpheme:
    surface: str
    lemma: str
    pos: str
    subpos: str = ""
    conjugation: str = ""


@dataclass(frozen=True)
class Bunsetsu:
    morphemes: Tuple[Morpheme, ...]
    head_index: int
    particles: Tuple[str, ...]
    modifiee: Optional[int]  # index of the governing bunsetsu, None for root
    sentence_index: int
    sentence_pos: int

    @property
    def head(self) -> Morpheme:
        return self.morphemes[self.head_index]

    @property
    def lemma(self) -> str:
        return self.head.lemma

    @property
    def ref(self) -> Ref:
        return (self.sentence_index, self.sentence_pos)

    @property
    def particle_signature(self) -> str:
        """Trailing particles joined, excluding punctuation ("NI"+"WA" -> "NIWA")."""
        return "".join(p for p in self.particles if p not in (",", "."))

    @property
    def ends_with_punctuation(self) -> Optional[str]:
        for p in reversed(self.particles):
            if p in (",", "."):
                return p
        return None

    def is_nounish(self) -> bool:
        return self.head.pos in NOUNISH_POS

    def has_morpheme(self, pos: Optional[str] = None, lemma: Optional[str] = None) -> bool:
        for m in self.morphemes:
            if pos is not None and m.pos != pos:
                continue
            if lemma is not None and m.lemma != lemma:
                continue
            return True
        return False

    def text(self) -> str:
        return "".join(m.surface for m in self.morphemes) + "".join(self.particles)


@dataclass(frozen=True)
class Sentence:
    bunsetsu: Tuple[Bunsetsu, ...]
    is_quotation: bool = False
    quotation_parent: Optional[int] = None
    speech_verb: Optional[Ref] = None

    @property
    def root(self) -> Bunsetsu:
        for b in self.bunsetsu:
            if b.modifiee is None:
                return b
        raise FormatError("sentence has no root")

    def modifiers_of(self, pos: int) -> Tuple[Bunsetsu, ...]:
        return tuple(b for b in self.bunsetsu if b.modifiee == pos)

    def text(self) -> str:
        return " ".join(b.text() for b in self.bunsetsu)


@dataclass(frozen=True)
class CaseLink:
    pred: Ref
    slot: str
    filler: Union[Ref, str]  # a bunsetsu reference or ZERO

    @property
    def is_unresolved_zero(self) -> bool:
        return self.filler == ZERO


@dataclass(frozen=True)
class Document:
    sentences: Tuple[Sentence, ...]
    case_links: Tuple[CaseLink, ...] = ()
    doc_id: str = ""

    def bunsetsu_at(self, ref: Ref) -> Bunsetsu:
        s, b = ref
        return self.sentences[s].bunsetsu[b]

    def iter_bunsetsu(self) -> Iterator[Bunsetsu]:
        for sentence in self.sentences:
            yield from sentence.bunsetsu

    def links_of(self, pred: Ref) -> Tuple[CaseLink, ...]:
        return tuple(l for l in self.case_links if l.pred == pred)

    def slot_filler(self, pred: Ref, slot: str) -> Union[Ref, str, None]:
        for link in self.case_links:
            if link.pred == pred and link.slot == slot:
                return link.filler
        return None

    def governor(self, b: Bunsetsu) -> Optional[Bunsetsu]:
        if b.modifiee is None:
            return None
        return self.sentences[b.sentence_index].bunsetsu[b.modifiee]


def nouns_in_reading_order(doc: Document) -> list[Bunsetsu]:
    """Every noun-headed bunsetsu, in sentence order then position order."""

    return [b for b in doc.iter_bunsetsu() if b.is_nounish()]


# ---------------------------------------------------------------------------
# Parsing / serialization


def _require(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise FormatError(f"{where}: {message}")


def _parse_morpheme(obj: dict, where: str) -> Morpheme:
    _require(isinstance(obj, dict), where, "morpheme must be an object")
    surface = obj.get("surface")
    lemma = obj.get("lemma", surface)
    pos = obj.get("pos")
    _require(isinstance(surface, str) and surface != "", where, "surface must be non-empty")
    _require(isinstance(pos, str) and pos in POS_TAGS, where, f"unknown pos {pos!r}")
    return Morpheme(
        surface=surface,
        lemma=lemma,
        pos=pos,
        subpos=obj.get("subpos", "") or "",
        conjugation=obj.get("conjugation", "") or "",
    )


def _parse_ref(obj: object, where: str, doc_shape: Sequence[int]) -> Ref:
    _require(
        isinstance(obj, (list, tuple)) and len(obj) == 2,
        where,
        "reference must be a [sentence, bunsetsu] pair",
    )
    s, b = obj
    _require(isinstance(s, int) and 0 <= s < len(doc_shape), where, f"sentence {s} out of range")
    _require(isinstance(b, int) and 0 <= b < doc_shape[s], where, f"bunsetsu {b} out of range")
    return (s, b)


def parse_document(source: Union[str, bytes, dict], doc_id: str = "") -> Document:
    """Parse and validate a document from JSON text or a decoded object."""

    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {exc.lineno}: invalid JSON: {exc.msg}") from None
    else:
        data = source
    _require(isinstance(data, dict), "document", "top level must be an object")
    raw_sentences = data.get("sentences")
    _require(isinstance(raw_sentences, list), "document", "missing sentences[]")

    sentences = []
    for s_idx, raw_sentence in enumerate(raw_sentences):
        where = f"sentences[{s_idx}]"
        _require(isinstance(raw_sentence, dict), where, "sentence must be an object")
        raw_bunsetsu = raw_sentence.get("bunsetsu")
        _require(isinstance(raw_bunsetsu, list) and raw_bunsetsu, where, "missing bunsetsu[]")
        items = []
        for b_idx, raw in enumerate(raw_bunsetsu):
            bwhere = f"{where}.bunsetsu[{b_idx}]"
            _require(isinstance(raw, dict), bwhere, "bunsetsu must be an object")
            morphemes = tuple(
                _parse_morpheme(m, f"{bwhere}.morphemes[{i}]")
                for i, m in enumerate(raw.get("morphemes") or [])
            )
            _require(bool(morphemes), bwhere, "bunsetsu needs at least one morpheme")
            head = raw.get("head", 0)
            _require(
                isinstance(head, int) and 0 <= head < len(morphemes),
                bwhere,
                f"head {head} out of range",
            )
            particles = raw.get("particles", [])
            _require(
                isinstance(particles, list) and all(isinstance(p, str) for p in particles),
                bwhere,
                "particles must be strings",
            )
            dep = raw.get("dep")
            _require(
                dep is None or (isinstance(dep, int) and 0 <= dep < len(raw_bunsetsu)),
                bwhere,
                f"dep {dep} out of range",
            )
            _require(dep != b_idx, bwhere, "bunsetsu cannot depend on itself")
            items.append(
                Bunsetsu(
                    morphemes=morphemes,
                    head_index=head,
                    particles=tuple(particles),
                    modifiee=dep,
                    sentence_index=s_idx,
                    sentence_pos=b_idx,
                )
            )
        roots = [b for b in items if b.modifiee is None]
        _require(len(roots) == 1, where, f"expected exactly one root, found {len(roots)}")
        # Reject cycles: walking governors from any node must reach the root.
        for b in items:
            seen = set()
            node = b
            while node.modifiee is not None:
                _require(node.sentence_pos not in seen, where, "dependency cycle")
                seen.add(node.sentence_pos)
                node = items[node.modifiee]
        sentences.append(
            Sentence(
                bunsetsu=tuple(items),
                is_quotation=bool(raw_sentence.get("quotation", False)),
                quotation_parent=raw_sentence.get("quotation_parent"),
                speech_verb=None,  # resolved below once shape is known
            )
        )

    shape = [len(s.bunsetsu) for s in sentences]
    for s_idx, raw_sentence in enumerate(raw_sentences):
        qp = raw_sentence.get("quotation_parent")
        if qp is not None:
            _require(
                isinstance(qp, int) and 0 <= qp < len(sentences) and qp != s_idx,
                f"sentences[{s_idx}]",
                f"quotation_parent {qp} out of range",
            )
        sv = raw_sentence.get("speech_verb")
        if sv is not None:
            ref = _parse_ref(sv, f"sentences[{s_idx}].speech_verb", shape)
            sentences[s_idx] = Sentence(
                bunsetsu=sentences[s_idx].bunsetsu,
                is_quotation=sentences[s_idx].is_quotation,
                quotation_parent=qp,
                speech_verb=ref,
            )

    links = []
    seen_zero = set()
    for l_idx, raw in enumerate(data.get("case_links") or []):
        where = f"case_links[{l_idx}]"
        _require(isinstance(raw, dict), where, "case link must be an object")
        pred = _parse_ref(raw.get("pred"), f"{where}.pred", shape)
        slot = raw.get("slot")
        _require(isinstance(slot, str) and slot != "", where, "missing slot")
        filler = raw.get("filler")
        if filler == ZERO:
            _require((pred, slot) not in seen_zero, where, "duplicate zero marker for slot")
            seen_zero.add((pred, slot))
            links.append(CaseLink(pred=pred, slot=slot, filler=ZERO))
        else:
            links.append(
                CaseLink(pred=pred, slot=slot, filler=_parse_ref(filler, f"{where}.filler", shape))
            )

    return Document(sentences=tuple(sentences), case_links=tuple(links), doc_id=doc_id)


def serialize_document(doc: Document) -> dict:
    sentences = []
    for sentence in doc.sentences:
        raw: dict = {
            "quotation": sentence.is_quotation,
            "bunsetsu": [
                {
                    "morphemes": [
                        {
                            "surface": m.surface,
                            "lemma": m.lemma,
                            "pos": m.pos,
                            "subpos": m.subpos,
                            "conjugation": m.conjugation,
                        }
                        for m in b.morphemes
                    ],
                    "head": b.head_index,
                    "particles": list(b.particles),
                    "dep": b.modifiee,
                }
                for b in sentence.bunsetsu
            ],
        }
        if sentence.quotation_parent is not None:
            raw["quotation_parent"] = sentence.quotation_parent
        if sentence.speech_verb is not None:
            raw["speech_verb"] = list(sentence.speech_verb)
        sentences.append(raw)
    return {
        "sentences": sentences,
        "case_links": [
            {
                "pred": list(l.pred),
                "slot": l.slot,
                "filler": l.filler if l.is_unresolved_zero else list(l.filler),
            }
            for l in doc.case_links
        ],
    }


# ---------------------------------------------------------------------------
# Annotations


TASKS = (
    "refprop",
    "number",
    "coref",
    "indirect",
    "demonstrative",
    "personal",
    "zero",
    "ellipsis",
)


@dataclass
class Annotation:
    target: Ref
    task: str
    answer: Candidate
    score: Score
    trace: list = field(default_factory=list)
    slot: Optional[str] = None  # case slot, for zero-pronoun targets

    def to_json(self) -> dict:
        out = {
            "target": list(self.target),
            "task": self.task,
            "answer": candidate_to_json(self.answer),
            "score": str(self.score),
        }
        if self.slot is not None:
            out["slot"] = self.slot
        if self.trace:
            out["trace"] = [[rule, str(points)] for rule, points in self.trace]
        return out

    @staticmethod
    def from_json(obj: dict) -> "Annotation":
        return Annotation(
            target=tuple(obj["target"]),
            task=obj["task"],
            answer=candidate_from_json(obj["answer"]),
            score=Score.of(obj.get("score", "0")),
            trace=[(r, Score.of(p)) for r, p in obj.get("trace", [])],
            slot=obj.get("slot"),
        )


def candidate_to_json(c: Candidate) -> dict:
    if c.kind in ("entity", "phrase"):
        return {"kind": c.kind, "ref": list(c.ref)}
    if c.kind == "sentence":
        return {"kind": "sentence", "ref": c.ref}
    if c.kind == "text":
        return {"kind": "text", "text": c.ref}
    return {"kind": c.kind, "label": c.ref}


def candidate_from_json(obj: dict) -> Candidate:
    kind = obj["kind"]
    if kind in ("entity", "phrase"):
        return Candidate(kind, tuple(obj["ref"]))
    if kind == "sentence":
        return Candidate("sentence", obj["ref"])
    if kind == "text":
        return Candidate("text", obj["text"])
    return Candidate(kind, obj.get("label"))
