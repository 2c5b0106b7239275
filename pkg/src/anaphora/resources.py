"""File-backed dictionary resources.

Everything the resolvers look up at runtime lives here: a thesaurus of
hierarchical category codes (with a load-time code remap declared in the file
header), a lemma → semantic-marker map, verb case frames, "X NO Y"
co-occurrence examples, a concept taxonomy, and a suffix-indexed sentence
corpus for completion lookups.  All stores are immutable after load and safe
to share across worker threads.

File formats (all UTF-8; `#` starts a comment, `#!` a header directive):

    thesaurus.tsv   lemma<TAB>code[,code...]        #!remap ORIG NEW[,NEW2]
    markers.tsv     lemma<TAB>MARKER[,MARKER...]
    caseframes.json [{"verb": ..., "slots": [{"case", "markers", "examples", "optional"}]}]
    xnoy.tsv        Y<TAB>X[,X...]                  #!stop-y A,B   #!exclude-x-prefix P,Q
    taxonomy.tsv    node<TAB>parent                 (root row: parent "-" or empty)
    corpus.txt      one sentence per line, words space-separated
"""

from __future__ import annotations

import bisect
import json
import pickle
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from anaphora.pattern import MatchContext

EXACT = 7  # similarity level above 6; point tables have one cell per level 0..7

SEMANTIC_MARKERS = frozenset(
    {
        "HUM", "ANI", "ORG", "PLA", "PAR", "NAT", "PRO", "LOC", "PHE",
        "ACT", "MEN", "CHA", "REL", "LIN", "TIM", "QUA", "OTHER",
    }
)

# Category codes (in remapped space) that mean "a human being" / "a location";
# used by the pronoun point tables.
HUMAN_CODES = (
    "5200003010",
    "5201002060",
    "5202001020",
    "5202006115",
    "5241002150",
    "5244002100",
)
LOCATION_CODES = (
    "6563006010",
    "6559005020",
    "9113301090",
    "9113302010",
    "6471001030",
    "6314020130",
)

# Leading three characters of a remapped code → semantic marker.
MARKER_BY_PREFIX: Dict[str, str] = {}
for _prefix, _marker in [
    ("511", "ANI"),
    *[(f"52{d}", "HUM") for d in "01234"],
    *[(f"53{d}", "ORG") for d in "5678"],
    ("611", "PLA"),
    ("621", "PAR"),
    ("631", "NAT"),
    *[(f"64{d}", "PRO") for d in "0123456789"],
    ("651", "LOC"),
    ("652", "LOC"),
    ("653", "LOC"),
    ("711", "PHE"),
    ("712", "PHE"),
    *[(f"81{d}", "ACT") for d in "345678"],
    ("821", "MEN"),
    *[(f"83{d}", "CHA") for d in "234589"],
    ("841", "REL"),
    ("851", "LIN"),
    ("852", "LIN"),
    ("861", "OTHER"),
    ("a11", "TIM"),
    ("b11", "QUA"),
]:
    MARKER_BY_PREFIX[_prefix] = _marker

MARKER_LABELS = {
    "HUM": "Human",
    "ANI": "Animal",
    "ORG": "Organization",
    "PLA": "Plant",
    "PAR": "Body part",
    "NAT": "Natural object",
    "PRO": "Product",
    "LOC": "Location",
    "PHE": "Phenomenon",
    "ACT": "Action",
    "MEN": "Mental state",
    "CHA": "Character",
    "REL": "Relation",
    "LIN": "Language product",
    "TIM": "Time",
    "QUA": "Quantity",
    "OTHER": "Other",
}


class ResourceError(Exception):
    """A resource file is missing pieces or malformed."""


class MissingConceptError(ResourceError):
    """A lemma has no node in the concept taxonomy."""


def similarity_level(code_a: str, code_b: str) -> int:
    """0..6 by common prefix length, or EXACT (7) for identical codes."""

    if not code_a or not code_b:
        raise ValueError("similarity_level needs non-empty codes")
    if code_a == code_b:
        return EXACT
    n = 0
    for x, y in zip(code_a, code_b):
        if x != y:
            break
        n += 1
    return min(6, n)


def markers_from_codes(codes: Iterable[str]) -> frozenset:
    return frozenset(
        MARKER_BY_PREFIX[c[:3]] for c in codes if c[:3] in MARKER_BY_PREFIX
    )


def _data_lines(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResourceError(f"{path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or (line.startswith("#") and not line.startswith("#!")):
            continue
        yield lineno, line


# ---------------------------------------------------------------------------
# Thesaurus


@dataclass(frozen=True)
class Thesaurus:
    codes: Dict[str, Tuple[str, ...]] = field(default_factory=dict)

    def codes_of(self, lemma: str) -> Tuple[str, ...]:
        return self.codes.get(lemma, ())

    def best_level(self, lemma_a: str, lemma_b: str) -> int:
        """Highest similarity level over all code pairs; 0 when either is unknown."""

        best = 0
        for a in self.codes_of(lemma_a):
            for b in self.codes_of(lemma_b):
                best = max(best, similarity_level(a, b))
        return best

    def best_level_to_codes(self, lemma: str, targets: Sequence[str]) -> int:
        best = 0
        for a in self.codes_of(lemma):
            for b in targets:
                best = max(best, similarity_level(a, b))
        return best

    @staticmethod
    def load(path: Path) -> "Thesaurus":
        remaps: List[Tuple[str, Tuple[str, ...]]] = []
        entries: Dict[str, Tuple[str, ...]] = {}
        for lineno, line in _data_lines(path):
            if line.startswith("#!remap"):
                parts = line.split()
                if len(parts) != 3:
                    raise ResourceError(f"{path}:{lineno}: remap needs ORIG and NEW")
                remaps.append((parts[1], tuple(parts[2].split(","))))
                continue
            if line.startswith("#!"):
                raise ResourceError(f"{path}:{lineno}: unknown directive")
            fields = line.split("\t")
            if len(fields) != 2:
                raise ResourceError(f"{path}:{lineno}: expected lemma<TAB>codes")
            lemma, raw_codes = fields
            codes: List[str] = []
            for code in raw_codes.split(","):
                code = code.strip()
                if not code:
                    raise ResourceError(f"{path}:{lineno}: empty code")
                for mapped in _remap_code(code, remaps):
                    if mapped not in codes:
                        codes.append(mapped)
            entries[lemma] = tuple(codes)
        return Thesaurus(codes=entries)


def _remap_code(code: str, remaps: Sequence[Tuple[str, Tuple[str, ...]]]) -> Tuple[str, ...]:
    for orig, news in remaps:
        if code.startswith(orig):
            return tuple(new + code[len(orig):] for new in news)
    return (code,)


# Remapping is declared in the thesaurus file header so that a file is
# self-describing; these are the standard directives for fixture builders to
# prepend.  Codes beginning 125/126 map to two categories (organization and
# location), so those rows carry two replacement prefixes.
DEFAULT_REMAP_DIRECTIVES = [
    "#!remap 156 511",
    "#!remap 120 520",
    "#!remap 121 521",
    "#!remap 122 522",
    "#!remap 123 523",
    "#!remap 124 524",
    "#!remap 125 535,652",
    "#!remap 126 536,653",
    "#!remap 127 537",
    "#!remap 128 538",
    "#!remap 155 611",
    "#!remap 157 621",
    "#!remap 152 631",
    *[f"#!remap 14{d} 64{d}" for d in "0123456789"],
    "#!remap 117 651",
    "#!remap 150 711",
    "#!remap 151 712",
    *[f"#!remap 13{d} 81{d}" for d in "345678"],
    "#!remap 130 821",
    "#!remap 112 832",
    "#!remap 113 833",
    "#!remap 114 834",
    "#!remap 115 835",
    "#!remap 118 838",
    "#!remap 158 839",
    "#!remap 111 841",
    "#!remap 131 851",
    "#!remap 132 852",
    "#!remap 110 861",
    "#!remap 116 a11",
    "#!remap 119 b11",
]


# ---------------------------------------------------------------------------
# Semantic markers


@dataclass(frozen=True)
class MarkerMap:
    markers: Dict[str, frozenset] = field(default_factory=dict)

    @staticmethod
    def load(path: Path) -> "MarkerMap":
        out: Dict[str, frozenset] = {}
        for lineno, line in _data_lines(path):
            fields = line.split("\t")
            if len(fields) != 2:
                raise ResourceError(f"{path}:{lineno}: expected lemma<TAB>markers")
            lemma, raw = fields
            markers = frozenset(m.strip() for m in raw.split(","))
            bad = markers - SEMANTIC_MARKERS
            if bad:
                raise ResourceError(f"{path}:{lineno}: unknown markers {sorted(bad)}")
            out[lemma] = markers
        return MarkerMap(markers=out)


# ---------------------------------------------------------------------------
# Case frames


@dataclass(frozen=True)
class CaseSlot:
    case: str
    markers: frozenset
    examples: Tuple[str, ...]
    optional: bool = False


@dataclass(frozen=True)
class CaseFrame:
    verb: str
    slots: Tuple[CaseSlot, ...]

    def slot(self, case: str) -> Optional[CaseSlot]:
        for s in self.slots:
            if s.case == case:
                return s
        return None


@dataclass(frozen=True)
class CaseFrameStore:
    frames: Dict[str, CaseFrame] = field(default_factory=dict)

    def frame_of(self, verb: str) -> Optional[CaseFrame]:
        return self.frames.get(verb)

    @staticmethod
    def load(path: Path) -> "CaseFrameStore":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ResourceError(f"{path}: {exc}") from None
        if not isinstance(data, list):
            raise ResourceError(f"{path}: expected a list of frames")
        frames = {}
        for i, raw in enumerate(data):
            verb = raw.get("verb")
            slots = raw.get("slots")
            if not isinstance(verb, str) or not isinstance(slots, list) or not slots:
                raise ResourceError(f"{path}: frame {i} needs a verb and slots")
            parsed = []
            for s in slots:
                markers = frozenset(s.get("markers", []))
                bad = markers - SEMANTIC_MARKERS
                if bad:
                    raise ResourceError(f"{path}: frame {verb}: unknown markers {sorted(bad)}")
                parsed.append(
                    CaseSlot(
                        case=s["case"],
                        markers=markers,
                        examples=tuple(s.get("examples", [])),
                        optional=bool(s.get("optional", False)),
                    )
                )
            frames[verb] = CaseFrame(verb=verb, slots=tuple(parsed))
        return CaseFrameStore(frames=frames)


# ---------------------------------------------------------------------------
# "X NO Y" examples


DEFAULT_EXCLUDE_X_PREFIXES = ("3", "a11", "b11")  # adjective nouns, time, quantity


@dataclass(frozen=True)
class XNoYStore:
    table: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    stop_y: frozenset = frozenset()
    exclude_x_prefixes: Tuple[str, ...] = DEFAULT_EXCLUDE_X_PREFIXES

    def raw_candidates(self, noun_y: str, thesaurus: Thesaurus) -> List[Tuple[str, Tuple[str, ...]]]:
        """Unfiltered X list with codes, e.g. for demonstrative similarity points."""

        return [(x, thesaurus.codes_of(x)) for x in self.table.get(noun_y, ())]

    def candidates(self, noun_y: str, thesaurus: Thesaurus) -> List[Tuple[str, Tuple[str, ...]]]:
        """Filtered X list: stoplisted Y → empty; adjective/time/quantity X dropped."""

        if noun_y in self.stop_y:
            return []
        out = []
        for x, codes in self.raw_candidates(noun_y, thesaurus):
            if codes and all(
                any(c.startswith(p) for p in self.exclude_x_prefixes) for c in codes
            ):
                continue
            out.append((x, codes))
        return out

    @staticmethod
    def load(path: Path) -> "XNoYStore":
        table: Dict[str, Tuple[str, ...]] = {}
        stop_y: set = set()
        prefixes = DEFAULT_EXCLUDE_X_PREFIXES
        for lineno, line in _data_lines(path):
            if line.startswith("#!stop-y"):
                stop_y.update(x.strip() for x in line.split(None, 1)[1].split(","))
                continue
            if line.startswith("#!exclude-x-prefix"):
                prefixes = tuple(x.strip() for x in line.split(None, 1)[1].split(","))
                continue
            if line.startswith("#!"):
                raise ResourceError(f"{path}:{lineno}: unknown directive")
            fields = line.split("\t")
            if len(fields) != 2:
                raise ResourceError(f"{path}:{lineno}: expected Y<TAB>X,X,...")
            y, xs = fields
            table[y] = tuple(x.strip() for x in xs.split(",") if x.strip())
        return XNoYStore(table=table, stop_y=frozenset(stop_y), exclude_x_prefixes=prefixes)


def x_no_y_candidates(
    noun_y: str, store: XNoYStore, thesaurus: Thesaurus
) -> List[Tuple[str, Tuple[str, ...]]]:
    return store.candidates(noun_y, thesaurus)


def build_noun_frame_table(store: XNoYStore, thesaurus: Thesaurus) -> Dict[str, Dict[str, List[str]]]:
    """Group each Y's X examples by the marker of their leading category code.

    Adjective-noun Xs are dropped; Xs with no classifiable code group under
    "Other".  Every surviving X lands in exactly one group.
    """

    out: Dict[str, Dict[str, List[str]]] = {}
    for y in sorted(store.table):
        groups: Dict[str, List[str]] = {}
        for x, codes in store.raw_candidates(y, thesaurus):
            if codes and all(c.startswith("3") for c in codes):
                continue
            marker = None
            for code in codes:
                marker = MARKER_BY_PREFIX.get(code[:3])
                if marker:
                    break
            label = MARKER_LABELS[marker] if marker else MARKER_LABELS["OTHER"]
            groups.setdefault(label, []).append(x)
        out[y] = groups
    return out


# ---------------------------------------------------------------------------
# Concept taxonomy


@dataclass(frozen=True)
class Taxonomy:
    parent: Dict[str, str] = field(default_factory=dict)  # node → parent; root absent
    root: Optional[str] = None

    def path_to_root(self, node: str) -> List[str]:
        if node != self.root and node not in self.parent:
            raise MissingConceptError(node)
        path = [node]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path

    @staticmethod
    def load(path: Path) -> "Taxonomy":
        parent: Dict[str, str] = {}
        roots = []
        for lineno, line in _data_lines(path):
            fields = line.split("\t")
            if len(fields) != 2:
                raise ResourceError(f"{path}:{lineno}: expected node<TAB>parent")
            node, par = fields[0].strip(), fields[1].strip()
            if par in ("", "-"):
                roots.append(node)
            else:
                parent[node] = par
        if len(roots) != 1:
            raise ResourceError(f"{path}: expected exactly one root, found {len(roots)}")
        taxonomy = Taxonomy(parent=parent, root=roots[0])
        for node in parent:
            seen = set()
            cur = node
            while cur != taxonomy.root:
                if cur in seen or cur not in parent and cur != taxonomy.root:
                    raise ResourceError(f"{path}: node {node} does not reach the root")
                seen.add(cur)
                cur = parent[cur]
        return taxonomy


def concept_similarity(noun_x: str, noun_y: str, taxonomy: Taxonomy) -> Fraction:
    """2·nz/(nx+ny) over root-to-node link counts; 1 for identical nodes."""

    path_x = taxonomy.path_to_root(noun_x)  # node .. root
    path_y = taxonomy.path_to_root(noun_y)
    if noun_x == noun_y:
        return Fraction(1)
    ancestors_x = {node: len(path_x) - 1 - i for i, node in enumerate(path_x)}
    nz = 0
    for i, node in enumerate(path_y):
        if node in ancestors_x:
            nz = ancestors_x[node]  # links from root to the common ancestor
            break
    nx = len(path_x) - 1
    ny = len(path_y) - 1
    if nx + ny == 0:
        return Fraction(1)
    return Fraction(2 * nz, nx + ny)


# ---------------------------------------------------------------------------
# Completion corpus


@dataclass(frozen=True)
class CorpusIndex:
    sentences: Tuple[str, ...]
    # Suffix table over every sentence: sorted by suffix text.
    suffixes: Tuple[Tuple[int, int], ...]  # (sentence index, char offset)

    def _suffix_text(self, entry: Tuple[int, int]) -> str:
        s, off = entry
        return self.sentences[s][off:]

    def occurrences(self, query: str) -> List[Tuple[int, int]]:
        """All (sentence, offset) where query occurs, via binary search."""

        key = lambda e: self._suffix_text(e)[: len(query)]
        lo = bisect.bisect_left(self.suffixes, query, key=key)
        hi = bisect.bisect_right(self.suffixes, query, key=key)
        return sorted(self.suffixes[lo:hi])

    @staticmethod
    def build(lines: Iterable[str]) -> "CorpusIndex":
        sentences = tuple(line.strip() for line in lines if line.strip())
        suffixes = [
            (i, off) for i, s in enumerate(sentences) for off in range(len(s))
        ]
        suffixes.sort(key=lambda e: sentences[e[0]][e[1]:])
        return CorpusIndex(sentences=sentences, suffixes=tuple(suffixes))

    @staticmethod
    def load(path: Path) -> "CorpusIndex":
        if str(path).endswith(".bin"):
            try:
                payload = pickle.loads(Path(path).read_bytes())
                if payload.get("format") != "corpus-index-v1":
                    raise ResourceError(f"{path}: not a corpus index")
                return CorpusIndex(
                    sentences=tuple(payload["sentences"]),
                    suffixes=tuple(map(tuple, payload["suffixes"])),
                )
            except (OSError, pickle.UnpicklingError, KeyError, EOFError) as exc:
                raise ResourceError(f"{path}: {exc}") from None
        try:
            return CorpusIndex.build(path.read_text(encoding="utf-8").splitlines())
        except OSError as exc:
            raise ResourceError(f"{path}: {exc}") from None

    def save(self, path: Path) -> None:
        payload = {
            "format": "corpus-index-v1",
            "sentences": list(self.sentences),
            "suffixes": [list(e) for e in self.suffixes],
        }
        Path(path).write_bytes(pickle.dumps(payload))


def complete_from_corpus(
    tail: str, index: CorpusIndex, min_suffix: int = 4
) -> List[Tuple[str, int]]:
    """Continuations of the longest word-boundary suffix of `tail` found in the corpus.

    Each matched corpus sentence contributes one continuation: the first word
    following the matched text at its first occurrence (trailing punctuation
    stripped).  Results are (continuation, frequency), most frequent first.
    """

    words = tail.split()
    for start in range(len(words)):
        query = " ".join(words[start:])
        if len(query) < min_suffix:
            break
        per_sentence: Dict[int, int] = {}
        for s, off in index.occurrences(query):
            if s not in per_sentence:
                per_sentence[s] = off
        counts: Dict[str, int] = {}
        for s, off in sorted(per_sentence.items()):
            rest = index.sentences[s][off + len(query):]
            continuation = rest.split()[0].rstrip(".,") if rest.split() else ""
            if continuation:
                counts[continuation] = counts.get(continuation, 0) + 1
        if counts:
            return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return []


# ---------------------------------------------------------------------------
# Bundled resource set


@dataclass(frozen=True)
class ResourceSet:
    thesaurus: Thesaurus = field(default_factory=Thesaurus)
    markers: MarkerMap = field(default_factory=MarkerMap)
    case_frames: CaseFrameStore = field(default_factory=CaseFrameStore)
    xnoy: XNoYStore = field(default_factory=XNoYStore)
    taxonomy: Taxonomy = field(default_factory=lambda: Taxonomy(root=None))
    corpus: Optional[CorpusIndex] = None

    def markers_of(self, lemma: str) -> frozenset:
        explicit = self.markers.markers.get(lemma, frozenset())
        return explicit | markers_from_codes(self.thesaurus.codes_of(lemma))

    def match_context(self, lexicons: Optional[Dict[str, frozenset]] = None) -> MatchContext:
        return MatchContext(marker_of=self.markers_of, lexicons=lexicons or {})

    @staticmethod
    def load(directory: Path) -> "ResourceSet":
        directory = Path(directory)
        if not directory.is_dir():
            raise ResourceError(f"{directory}: not a directory")

        def maybe(name, loader, default):
            p = directory / name
            return loader(p) if p.exists() else default

        corpus = None
        if (directory / "index.bin").exists():
            corpus = CorpusIndex.load(directory / "index.bin")
        elif (directory / "corpus.txt").exists():
            corpus = CorpusIndex.load(directory / "corpus.txt")
        return ResourceSet(
            thesaurus=maybe("thesaurus.tsv", Thesaurus.load, Thesaurus()),
            markers=maybe("markers.tsv", MarkerMap.load, MarkerMap()),
            case_frames=maybe("caseframes.json", CaseFrameStore.load, CaseFrameStore()),
            xnoy=maybe("xnoy.tsv", XNoYStore.load, XNoYStore()),
            taxonomy=maybe("taxonomy.tsv", Taxonomy.load, Taxonomy(root=None)),
            corpus=corpus,
        )
