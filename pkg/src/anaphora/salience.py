"""Topic/focus salience lists and the distance D used by W−D scoring.

Every noun or pronoun mention (and every recovered zero pronoun) pushes one
entry onto a per-document state as the pipeline scans bunsetsu in reading
order.  Candidate-enumerating rules later walk these lists backwards from an
anaphor; the distance D of a candidate is the count of same-kind entries from
the anaphor back through and including the candidate's own entry, so the most
recent same-kind entry has D = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

from anaphora.model import Bunsetsu, Ref

TOPIC = "topic"
FOCUS = "focus"

# Mention classification, by (mention class, trailing particles).
PRONOUN_TOPIC_SIGS = ("GA", "WA", "NIWA")
PRONOUN_FOCUS_SIGS = ("WO", "NI", "KARA")
NOUN_TOPIC_SIGS = ("WA", "NIWA")
NOUN_SUBJECT_SIGS = ("GA", "MO", "NARA")
NOUN_OBJECT_SIGS = ("WO", "NI")
NOUN_OBLIQUE_SIGS = ("HE", "DE", "KARA")


def classify_mention(b: Bunsetsu) -> Optional[Tuple[str, int]]:
    """(kind, weight) for an overt mention, or None when no table row applies."""

    sig = b.particle_signature
    if b.head.pos == "pronoun":
        if sig in PRONOUN_TOPIC_SIGS:
            return (TOPIC, 21)
        if sig in PRONOUN_FOCUS_SIGS:
            return (FOCUS, 16)
        return None
    if b.head.pos not in ("noun", "numeral"):
        return None
    if sig in NOUN_TOPIC_SIGS:
        return (TOPIC, 20)
    if sig in NOUN_SUBJECT_SIGS or b.has_morpheme(pos="copula"):
        return (FOCUS, 15)
    if sig in NOUN_OBJECT_SIGS:
        return (FOCUS, 14)
    if sig == "" and b.ends_with_punctuation:
        return (FOCUS, 14)
    if sig in NOUN_OBLIQUE_SIGS:
        return (FOCUS, 13)
    return None


def classify_zero(case: str) -> Optional[Tuple[str, int]]:
    """(kind, weight) for a zero pronoun filling the given case slot."""

    if case in ("GA", "WA"):
        return (TOPIC, 21)
    if case in ("WO", "NI", "KARA"):
        return (FOCUS, 16)
    return None


@dataclass(frozen=True)
class SalienceEntry:
    entity: Ref  # the referent this entry can propose
    kind: str  # TOPIC or FOCUS
    weight: int
    position: Ref  # where the mention occurred (predicate position for zeros)
    order: int


@dataclass
class SalienceState:
    entries: List[SalienceEntry] = field(default_factory=list)

    def push(self, entity: Ref, kind: str, weight: int, position: Ref) -> SalienceEntry:
        entry = SalienceEntry(
            entity=entity, kind=kind, weight=weight, position=position, order=len(self.entries)
        )
        self.entries.append(entry)
        return entry

    def push_mention(self, b: Bunsetsu) -> Optional[SalienceEntry]:
        row = classify_mention(b)
        if row is None:
            return None
        kind, weight = row
        return self.push(entity=b.ref, kind=kind, weight=weight, position=b.ref)

    def push_zero(self, case: str, entity: Ref, predicate: Ref) -> Optional[SalienceEntry]:
        row = classify_zero(case)
        if row is None:
            return None
        kind, weight = row
        return self.push(entity=entity, kind=kind, weight=weight, position=predicate)

    def entries_before(
        self, position: Ref, kinds: Optional[Iterable[str]] = None
    ) -> List[SalienceEntry]:
        """Entries at positions strictly before `position`, oldest first."""

        wanted = None if kinds is None else set(kinds)
        return [
            e
            for e in self.entries
            if e.position < position and (wanted is None or e.kind in wanted)
        ]

    def distance(
        self, position: Ref, entry: SalienceEntry, kinds: Optional[Iterable[str]] = None
    ) -> int:
        """Backward count from `position` through `entry`, inclusive.

        Counts entries of the same kind as `entry` by default; pass kinds to
        count over a combined list (e.g. both topics and foci).
        """

        wanted = set(kinds) if kinds is not None else {entry.kind}
        if entry.kind not in wanted:
            raise ValueError("entry kind excluded from the counted kinds")
        d = 0
        for e in reversed(self.entries_before(position, wanted)):
            d += 1
            if e is entry or (e.order == entry.order):
                return d
        raise ValueError("candidate entry does not precede the anaphor")

    def snapshot(self) -> List[dict]:
        return [
            {
                "kind": e.kind,
                "weight": e.weight,
                "entity": list(e.entity),
                "position": list(e.position),
            }
            for e in self.entries
        ]


def distance(state: SalienceState, position: Ref, entry: SalienceEntry, kinds=None) -> int:
    return state.distance(position, entry, kinds)
