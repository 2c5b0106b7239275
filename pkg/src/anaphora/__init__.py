"""Scored-heuristic resolver for Japanese anaphora over pre-parsed text.

The package estimates referential property and number for noun phrases,
resolves direct and bridging noun-phrase anaphora, demonstrative/personal/zero
pronouns, and sentence-final verb-phrase ellipsis, driven by declarative rule
packs over dependency/case structures and file-backed dictionary resources.
"""

from anaphora.scoring import (
    NEG_INF,
    Candidate,
    Formula,
    FormulaError,
    Score,
    ScoreBoard,
    compile_formula,
    select_best,
)

__all__ = [
    "NEG_INF",
    "Candidate",
    "Formula",
    "FormulaError",
    "Score",
    "ScoreBoard",
    "compile_formula",
    "select_best",
]
