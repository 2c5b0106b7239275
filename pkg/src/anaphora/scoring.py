"""Exact score arithmetic and candidate score boards.

All rule points are integers or halves (2.5, 3.5) plus a genuine negative
infinity used by the plausibility tables to veto a candidate outright.  Scores
therefore wrap :class:`fractions.Fraction` instead of floats: additions stay
exact, and negative infinity is absorbing under addition rather than being a
very large negative number that later points could claw back.

Point formulas in rule packs ("W-D+P+4", "W-D*0.4+30", "s*20-2") are evaluated
by a small whitelisted interpreter over the same arithmetic; decimal literals
are read exactly (0.4 becomes 2/5).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

ScoreLike = Union["Score", Fraction, int, float, str]


@dataclass(frozen=True)
class Score:
    """An exact rule score: a rational number or negative infinity."""

    value: Optional[Fraction]  # None encodes negative infinity

    @staticmethod
    def of(x: ScoreLike) -> "Score":
        if isinstance(x, Score):
            return x
        if isinstance(x, Fraction):
            return Score(x)
        if isinstance(x, bool):
            raise TypeError("bool is not a score")
        if isinstance(x, int):
            return Score(Fraction(x))
        if isinstance(x, float):
            # Exact only for decimal-friendly literals such as 2.5; go through
            # the shortest repr so 0.4 means 2/5, not its binary neighbour.
            return Score(Fraction(repr(x)))
        if isinstance(x, str):
            text = x.strip()
            if text in ("-inf", "-INF", "-Infinity"):
                return NEG_INF
            return Score(Fraction(text))
        raise TypeError(f"cannot interpret {x!r} as a score")

    @property
    def is_neg_inf(self) -> bool:
        return self.value is None

    def __add__(self, other: "Score") -> "Score":
        if not isinstance(other, Score):
            return NotImplemented
        if self.is_neg_inf or other.is_neg_inf:
            return NEG_INF
        return Score(self.value + other.value)

    def __sub__(self, other: "Score") -> "Score":
        if not isinstance(other, Score):
            return NotImplemented
        if other.is_neg_inf:
            raise ArithmeticError("cannot subtract negative infinity")
        if self.is_neg_inf:
            return NEG_INF
        return Score(self.value - other.value)

    def __neg__(self) -> "Score":
        if self.is_neg_inf:
            raise ArithmeticError("cannot negate negative infinity")
        return Score(-self.value)

    def __mul__(self, other: "Score") -> "Score":
        if not isinstance(other, Score):
            return NotImplemented
        if self.is_neg_inf or other.is_neg_inf:
            raise ArithmeticError("cannot multiply negative infinity")
        return Score(self.value * other.value)

    def __truediv__(self, other: "Score") -> "Score":
        if not isinstance(other, Score):
            return NotImplemented
        if self.is_neg_inf or other.is_neg_inf:
            raise ArithmeticError("cannot divide with negative infinity")
        return Score(self.value / other.value)

    def _cmp_key(self) -> Tuple[int, Fraction]:
        return (0, Fraction(0)) if self.is_neg_inf else (1, self.value)

    def __lt__(self, other: "Score") -> bool:
        if not isinstance(other, Score):
            return NotImplemented
        return self._cmp_key() < other._cmp_key()

    def __le__(self, other: "Score") -> bool:
        if not isinstance(other, Score):
            return NotImplemented
        return self._cmp_key() <= other._cmp_key()

    def __gt__(self, other: "Score") -> bool:
        if not isinstance(other, Score):
            return NotImplemented
        return other.__lt__(self)

    def __ge__(self, other: "Score") -> bool:
        if not isinstance(other, Score):
            return NotImplemented
        return other.__le__(self)

    def __str__(self) -> str:
        return "-inf" if self.is_neg_inf else str(self.value)

    def __repr__(self) -> str:
        return f"Score({self})"


NEG_INF = Score(None)
ZERO = Score(Fraction(0))


# ---------------------------------------------------------------------------
# Point formulas


_ALLOWED_BINOPS = {
    ast.Add: Score.__add__,
    ast.Sub: Score.__sub__,
    ast.Mult: Score.__mul__,
    ast.Div: Score.__truediv__,
}


class FormulaError(ValueError):
    """A points expression fails to parse or references unknown symbols."""


def compile_formula(src: str) -> "Formula":
    """Parse a points expression into an evaluatable form.

    The grammar is arithmetic over +, -, *, / with numeric literals and free
    symbols (W, D, P, S, s, ...).  Anything else is rejected at load time so a
    rule pack cannot smuggle in arbitrary code.
    """

    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise FormulaError(f"bad points expression {src!r}: {exc}") from None
    names = _validate(tree.body, src)
    return Formula(src, tree.body, frozenset(names))


def _validate(node: ast.expr, src: str) -> set:
    if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
        return _validate(node.left, src) | _validate(node.right, src)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        return _validate(node.operand, src)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        if isinstance(node.value, bool):
            raise FormulaError(f"bad literal in {src!r}")
        return set()
    if isinstance(node, ast.Name):
        return {node.id}
    raise FormulaError(f"unsupported syntax in points expression {src!r}")


@dataclass(frozen=True)
class Formula:
    src: str
    _node: ast.expr
    symbols: frozenset

    def evaluate(self, env: Mapping[str, ScoreLike]) -> Score:
        missing = self.symbols - set(env)
        if missing:
            raise FormulaError(
                f"unbound symbols {sorted(missing)} in {self.src!r}"
            )
        return self._eval(self._node, env)

    def _eval(self, node: ast.expr, env: Mapping[str, ScoreLike]) -> Score:
        if isinstance(node, ast.BinOp):
            op = _ALLOWED_BINOPS[type(node.op)]
            return op(self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            operand = self._eval(node.operand, env)
            return -operand if isinstance(node.op, ast.USub) else operand
        if isinstance(node, ast.Constant):
            return Score.of(node.value)
        if isinstance(node, ast.Name):
            return Score.of(env[node.id])
        raise AssertionError("validated formula contained unexpected node")

    def __str__(self) -> str:
        return self.src


# ---------------------------------------------------------------------------
# Candidates and score boards


@dataclass(frozen=True)
class Candidate:
    """A proposed answer: an entity mention, a sentence, a verb phrase, a
    synthesized completion, or one of the special outcome tokens.

    ``ref`` is interpreted by ``kind``:
      entity    -> (sentence index, bunsetsu index) of the mention
      sentence  -> sentence index
      phrase    -> (sentence index, bunsetsu index) of a predicate
      text      -> completion string
      marker    -> label such as "da", "suru", "interrogative", "no-ellipsis"
      special   -> label such as "indefinite", "generic", "no-referent",
                   "new-individual", "do-not-fill", "do-not-analyze",
                   "first-person", "second-person", "present-time",
                   "present-place", "exclamation", "idiom"
    """

    kind: str
    ref: object = None

    def describe(self) -> str:
        if self.kind == "entity":
            return f"entity{self.ref}"
        if self.kind == "sentence":
            return f"sentence[{self.ref}]"
        if self.kind == "phrase":
            return f"phrase{self.ref}"
        if self.kind == "text":
            return repr(self.ref)
        return f"{self.kind}:{self.ref}"


@dataclass
class BoardEntry:
    candidate: Candidate
    score: Score
    order: int
    trace: list = field(default_factory=list)  # (rule id, Score) pairs


class ScoreBoard:
    """Accumulates (candidate, points) proposals.

    Candidates keep the position of their first proposal; duplicate proposals
    for the same candidate add up.  Ties at selection time go to the earliest
    first proposal, per the rule framework's "first order" convention.
    """

    def __init__(self) -> None:
        self._entries: dict[Candidate, BoardEntry] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, candidate: Candidate) -> bool:
        return candidate in self._entries

    def entries(self) -> Sequence[BoardEntry]:
        return sorted(self._entries.values(), key=lambda e: e.order)

    def get(self, candidate: Candidate) -> Optional[BoardEntry]:
        return self._entries.get(candidate)

    def score_of(self, candidate: Candidate) -> Optional[Score]:
        entry = self._entries.get(candidate)
        return entry.score if entry else None

    def add(self, candidate: Candidate, points: ScoreLike, rule: str) -> None:
        points = Score.of(points)
        entry = self._entries.get(candidate)
        if entry is None:
            entry = BoardEntry(candidate, points, order=len(self._entries))
            self._entries[candidate] = entry
        else:
            entry.score = entry.score + points
        entry.trace.append((rule, points))

    def totals(self) -> dict[Candidate, Score]:
        return {c: e.score for c, e in self._entries.items()}


def select_best(board: ScoreBoard) -> Optional[Tuple[Candidate, Score]]:
    """Highest finite score wins; ties break to the earliest first proposal."""

    best: Optional[BoardEntry] = None
    for entry in board.entries():
        if entry.score.is_neg_inf:
            continue
        if best is None or entry.score > best.score:
            best = entry
    return None if best is None else (best.candidate, best.score)


def sum_scores(scores: Iterable[ScoreLike]) -> Score:
    total = ZERO
    for s in scores:
        total = total + Score.of(s)
    return total
