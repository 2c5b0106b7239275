"""Dictionary resources: thesaurus, markers, X-NO-Y store, taxonomy, corpus index."""

import os
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anaphora.resources import (
    DEFAULT_REMAP_DIRECTIVES,
    EXACT,
    CorpusIndex,
    MarkerMap,
    MissingConceptError,
    ResourceError,
    ResourceSet,
    Taxonomy,
    Thesaurus,
    XNoYStore,
    build_noun_frame_table,
    complete_from_corpus,
    concept_similarity,
    markers_from_codes,
    similarity_level,
    x_no_y_candidates,
)

codes = st.text(alphabet="0123456789ab", min_size=1, max_size=10)


# ---------------------------------------------------------------------------
# similarity_level


def test_similarity_level_known_pairs():
    assert similarity_level("5200003010", "5200003010") == EXACT
    assert EXACT > 6
    assert similarity_level("5200003010", "6200003010") == 0
    assert similarity_level("5200003010", "5300003010") == 1
    assert similarity_level("5200003010", "5210003010") == 2
    assert similarity_level("5200003010", "5201003010") == 3
    assert similarity_level("5200003010", "5200103010") == 4
    assert similarity_level("5200003010", "5200013010") == 5
    assert similarity_level("5200003010", "5200002010") == 6
    # Deep sharing is still capped at 6 short of an exact match.
    assert similarity_level("5200003010", "5200003011") == 6


@given(codes, codes)
def test_similarity_level_matches_prefix_scan_oracle(a, b):
    got = similarity_level(a, b)
    assert got == similarity_level(b, a)
    if a == b:
        assert got == EXACT
    else:
        assert got == min(6, len(os.path.commonprefix([a, b])))


def test_similarity_level_rejects_empty():
    with pytest.raises(ValueError):
        similarity_level("", "12")


# ---------------------------------------------------------------------------
# Thesaurus loading and remap


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def test_thesaurus_remap(tmp_path):
    path = write(
        tmp_path / "thesaurus.tsv",
        "\n".join(DEFAULT_REMAP_DIRECTIVES)
        + "\nOTOKO\t1201003010\nKUMIAI\t1250001020\nIMA\t1161001000\nNEKO\t9990000000\n",
    )
    th = Thesaurus.load(path)
    assert th.codes_of("OTOKO") == ("5201003010",)
    # 125x carries both the organization and the location code.
    assert th.codes_of("KUMIAI") == ("5350001020", "6520001020")
    assert th.codes_of("IMA") == ("a111001000",)
    # Unmapped prefixes pass through.
    assert th.codes_of("NEKO") == ("9990000000",)
    assert th.codes_of("UNKNOWN") == ()
    # Deterministic load.
    assert Thesaurus.load(path) == th


def test_thesaurus_remap_idempotent(tmp_path):
    first = Thesaurus.load(
        write(
            tmp_path / "a.tsv",
            "\n".join(DEFAULT_REMAP_DIRECTIVES) + "\nOTOKO\t1201003010\n",
        )
    )
    # Feeding already-remapped codes through the same remap changes nothing.
    second = Thesaurus.load(
        write(
            tmp_path / "b.tsv",
            "\n".join(DEFAULT_REMAP_DIRECTIVES)
            + f"\nOTOKO\t{first.codes_of('OTOKO')[0]}\n",
        )
    )
    assert second.codes_of("OTOKO") == first.codes_of("OTOKO")


def test_best_level():
    th = Thesaurus(codes={"A": ("5200003010",), "B": ("5201099999", "1110000000")})
    assert th.best_level("A", "B") == 3
    assert th.best_level("A", "MISSING") == 0
    assert th.best_level_to_codes("A", ("5200003010",)) == EXACT


def test_markers_from_codes():
    assert markers_from_codes(["5200003010"]) == {"HUM"}
    assert markers_from_codes(["a110000000", "6510000000"]) == {"TIM", "LOC"}
    assert markers_from_codes(["zzz"]) == frozenset()


def test_marker_map_rejects_unknown(tmp_path):
    with pytest.raises(ResourceError, match="unknown markers"):
        MarkerMap.load(write(tmp_path / "m.tsv", "INU\tANI,WOOF\n"))


# ---------------------------------------------------------------------------
# X NO Y store


def xnoy_fixture(tmp_path):
    th = Thesaurus(
        codes={
            "HUKURO": ("6210000000",),
            "RUPORAITA": ("5200003010",),
            "IIN": ("5241002150",),
            "AKACHAN": ("5202001020",),
            "KARE": ("5200000000",),
            "SAIKIN": ("a110000000",),
            "HONTOU": ("3100000000",),
        }
    )
    store = XNoYStore.load(
        write(
            tmp_path / "xnoy.tsv",
            "#!stop-y TSURU,NINGEN\n"
            "KUCHI\tHUKURO,RUPORAITA,IIN,AKACHAN,KARE\n"
            "DORUDAKA\tSAIKIN\n"
            "HANNIN\tHONTOU,KEIJI\n"
            "TSURU\tYAMA\n",
        )
    )
    return th, store


def test_x_no_y_filtering(tmp_path):
    th, store = xnoy_fixture(tmp_path)
    kuchi = [x for x, _ in x_no_y_candidates("KUCHI", store, th)]
    assert kuchi == ["HUKURO", "RUPORAITA", "IIN", "AKACHAN", "KARE"]
    # Stoplisted Y and unknown Y are empty.
    assert x_no_y_candidates("TSURU", store, th) == []
    assert x_no_y_candidates("NANIKA", store, th) == []
    # Temporal X is dropped from the filtered view but kept in the raw view.
    assert x_no_y_candidates("DORUDAKA", store, th) == []
    assert [x for x, _ in store.raw_candidates("DORUDAKA", th)] == ["SAIKIN"]
    # Adjective-noun X is dropped; an X with no codes is kept.
    assert [x for x, _ in x_no_y_candidates("HANNIN", store, th)] == ["KEIJI"]


def test_build_noun_frame_table():
    th = Thesaurus(
        codes={
            "KAISHA": ("5350001000",),
            "GAKKOU": ("5360002000",),
            "KURUMA": ("6450001000",),
            "IE": ("6440002000",),
            "MIDORI": ("3502001000",),
            "NAZO": ("zzz0000000",),
        }
    )
    store = XNoYStore(table={"YANE": ("KAISHA", "KURUMA", "MIDORI", "GAKKOU", "IE", "NAZO")})
    table = build_noun_frame_table(store, th)
    assert table["YANE"]["Organization"] == ["KAISHA", "GAKKOU"]
    assert table["YANE"]["Product"] == ["KURUMA", "IE"]
    assert table["YANE"]["Other"] == ["NAZO"]
    # Partition: every non-adjective X lands in exactly one group.
    flattened = [x for group in table["YANE"].values() for x in group]
    assert sorted(flattened) == sorted({"KAISHA", "GAKKOU", "KURUMA", "IE", "NAZO"})
    assert "MIDORI" not in flattened
    assert build_noun_frame_table(XNoYStore(), th) == {}


# ---------------------------------------------------------------------------
# Concept taxonomy


def chain_taxonomy():
    # root - a - b - x ; root - a - c - d - e - y ; shapes nx=3, ny=5, nz=2...
    parent = {
        "a": "root",
        "b": "a",
        "x": "b",
        "c": "b",
        "d": "c",
        "e": "d",
        "y": "e",
        "w": "root",
    }
    return Taxonomy(parent=parent, root="root")


def test_concept_similarity_fixture():
    t = chain_taxonomy()
    assert concept_similarity("x", "x", t) == 1
    assert concept_similarity("x", "w", t) == 0  # common ancestor is the root
    # nx=3 (root-a-b-x), ny=5 (root-a-b-c-d-e... wait: y is at depth 6)
    assert concept_similarity("x", "d", t) == Fraction(2 * 2, 3 + 4)
    with pytest.raises(MissingConceptError):
        concept_similarity("nope", "x", t)


@st.composite
def taxonomy_and_pair(draw):
    n = draw(st.integers(2, 10))
    names = [f"n{i}" for i in range(n)]
    parent = {}
    for i in range(1, n):
        parent[names[i]] = names[draw(st.integers(0, i - 1))]
    t = Taxonomy(parent=parent, root=names[0])
    return t, draw(st.sampled_from(names)), draw(st.sampled_from(names))


@given(taxonomy_and_pair())
def test_concept_similarity_against_path_walk_oracle(tpair):
    t, x, y = tpair
    s = concept_similarity(x, y, t)

    def depth(node):
        d = 0
        while node != t.root:
            node = t.parent[node]
            d += 1
        return d

    def ancestors(node):
        out = {node}
        while node != t.root:
            node = t.parent[node]
            out.add(node)
        return out

    common = ancestors(x) & ancestors(y)
    nz = max(depth(c) for c in common)
    nx, ny = depth(x), depth(y)
    expected = Fraction(1) if x == y else Fraction(2 * nz, nx + ny) if nx + ny else Fraction(1)
    assert s == expected
    assert s == concept_similarity(y, x, t)
    assert 0 <= s <= 1
    assert (s == 1) == (x == y)


def test_taxonomy_load_errors(tmp_path):
    with pytest.raises(ResourceError, match="root"):
        Taxonomy.load(write(tmp_path / "t.tsv", "a\t-\nb\t-\n"))
    with pytest.raises(ResourceError, match="reach the root"):
        Taxonomy.load(write(tmp_path / "t2.tsv", "r\t-\na\tb\nb\ta\n"))


# ---------------------------------------------------------------------------
# Corpus completion

FIG_CORPUS = [
    "SOREDEWA MINASAN JITSUWA ONEGAIGA ARIMASU.",
    "WATASHI-KARA ONEGAIGA ARIMASU.",
    "HITOTSU ONEGAIGA ARIMASU.",
    "MOUHITOTSU ONEGAIGA ARIMASU.",
    "SENSEI ONEGAIGA ARIMASU.",
    "TOTSUZEN-DESUGA ONEGAIGA ARU.",
    "KIMI-NI ONEGAIGA ARU.",
    "ORE-KARA-MO ONEGAIGA ARU.",
    "KON'NANI UMAKU IKUTOWA OMOENAI.",
    "ITUMO UMAKU IKUTOWA KAGIRANAI.",
    "KANZENNI UMAKU IKUTOWA IENAI.",
]


def test_complete_from_corpus_frequencies():
    index = CorpusIndex.build(FIG_CORPUS)
    got = complete_from_corpus("JITSU-WA CHOTTO ONEGAIGA", index)
    assert got == [("ARIMASU", 5), ("ARU", 3)]
    assert sum(f for _, f in got) == 8  # one vote per matched sentence
    assert complete_from_corpus("ZENZEN BETSU-NO HANASHI", index) == []


def test_complete_from_corpus_uses_longest_suffix():
    index = CorpusIndex.build(FIG_CORPUS)
    got = complete_from_corpus("SOU UMAKU IKUTOWA", index)
    assert sorted(got) == [("IENAI", 1), ("KAGIRANAI", 1), ("OMOENAI", 1)]
    # A corpus hit on the longer suffix preempts the shorter one.
    index2 = CorpusIndex.build(FIG_CORPUS + ["KOREMO SOU UMAKU IKUTOWA KAGIRANAI."])
    assert complete_from_corpus("SOU UMAKU IKUTOWA", index2) == [("KAGIRANAI", 1)]


def test_complete_from_corpus_min_suffix():
    index = CorpusIndex.build(["ABC DEF.", "XYZ DEF."])
    assert complete_from_corpus("QQQ DEF", index, min_suffix=4) == []
    # "DEF" is only 3 characters; lowering the floor lets it match.
    assert complete_from_corpus("QQQ DEF", index, min_suffix=3) == []  # no continuation text
    assert complete_from_corpus("QQQ ABC", index, min_suffix=3) == [("DEF", 1)]


@given(
    st.lists(st.text(alphabet="AB .", min_size=1, max_size=12), min_size=1, max_size=8),
    st.text(alphabet="AB .", min_size=1, max_size=4),
)
def test_occurrences_match_linear_scan(lines, query):
    index = CorpusIndex.build(lines)
    expected = sorted(
        (i, off)
        for i, s in enumerate(index.sentences)
        for off in range(len(s))
        if s.startswith(query, off)
    )
    assert index.occurrences(query) == expected


def test_index_save_load_round_trip(tmp_path):
    index = CorpusIndex.build(FIG_CORPUS)
    path = tmp_path / "index.bin"
    index.save(path)
    again = CorpusIndex.load(path)
    assert again == index
    with pytest.raises(ResourceError):
        CorpusIndex.load(write(tmp_path / "bogus.bin", "not a pickle"))


# ---------------------------------------------------------------------------
# ResourceSet


def test_resource_set_load(tmp_path):
    write(
        tmp_path / "thesaurus.tsv",
        "\n".join(DEFAULT_REMAP_DIRECTIVES) + "\nOTOKO\t1201003010\n",
    )
    write(tmp_path / "markers.tsv", "INU\tANI\n")
    write(
        tmp_path / "caseframes.json",
        '[{"verb": "NEMURU", "slots": [{"case": "GA", "markers": ["HUM", "ANI"], "examples": ["KARE", "INU"]}]}]',
    )
    write(tmp_path / "xnoy.tsv", "KUCHI\tKARE\n")
    write(tmp_path / "taxonomy.tsv", "root\t-\nTORI\troot\nTSURU\tTORI\n")
    write(tmp_path / "corpus.txt", "\n".join(FIG_CORPUS) + "\n")
    rs = ResourceSet.load(tmp_path)
    assert rs.markers_of("OTOKO") == {"HUM"}  # derived from the remapped code
    assert rs.markers_of("INU") == {"ANI"}
    assert rs.case_frames.frame_of("NEMURU").slot("GA").examples == ("KARE", "INU")
    assert rs.case_frames.frame_of("NEMURU").slot("WO") is None
    assert concept_similarity("TSURU", "TORI", rs.taxonomy) == Fraction(2 * 1, 2 + 1)
    assert complete_from_corpus("ONEGAIGA", rs.corpus)[0] == ("ARIMASU", 5)
    assert ResourceSet.load(tmp_path) == rs  # deterministic
    with pytest.raises(ResourceError):
        ResourceSet.load(tmp_path / "missing-dir")


def test_match_context_exposes_markers(tmp_path):
    write(tmp_path / "markers.tsv", "INU\tANI\n")
    rs = ResourceSet.load(tmp_path)
    ctx = rs.match_context({"pets": frozenset({"INU"})})
    assert ctx.marker_of("INU") == {"ANI"}
    assert "INU" in ctx.lexicons["pets"]
