"""Shared fixture builders: hand-rolled dependency trees in the input format."""

from anaphora.model import Document, parse_document


def bun(lemma, pos="noun", subpos="common", particles=(), dep=None, conj="", surface=None, extra=()):
    morphemes = [
        {
            "surface": surface or lemma,
            "lemma": lemma,
            "pos": pos,
            "subpos": subpos,
            "conjugation": conj,
        }
    ]
    morphemes.extend(extra)
    return {"morphemes": morphemes, "head": 0, "particles": list(particles), "dep": dep}


def doc_of(*sentences, case_links=None) -> Document:
    doc = {"sentences": [{"bunsetsu": list(s)} for s in sentences]}
    if case_links is not None:
        doc["case_links"] = list(case_links)
    return parse_document(doc)


def link(pred, slot, filler):
    return {"pred": list(pred), "slot": slot, "filler": filler if isinstance(filler, str) else list(filler)}
