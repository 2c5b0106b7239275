"""The scored-rule framework shared by every resolver.

Three rule shapes drive the whole engine:

* estimation rules — condition ⇒ per-category (possibility, value); firing
  rules add their values per category, and a possibility-0 cell from any
  firing rule vetoes its category outright;
* candidate-enumerating rules — condition ⇒ proposals, each naming a
  candidate selector and a points expression over W, D, P, S;
* candidate-judging rules — condition ⇒ points (or a similarity-level table)
  added to already-enumerated candidates.

Rule packs are JSON files validated at load: patterns must compile, points
expressions may only reference the symbols W, D, P, S, and effects must stay
within the pack's category set.  What a candidate selector or a context
predicate *means* is supplied by the task module applying the pack, so this
module stays independent of any particular resolver.
"""

from __future__ import annotations

import builtins
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from anaphora.model import Document, Ref
from anaphora.pattern import MatchContext, Pattern, PatternError, compile_pattern
from anaphora.scoring import (
    Candidate,
    Formula,
    FormulaError,
    Score,
    ScoreBoard,
    compile_formula,
    select_best,
)

__all__ = [
    "RulePackError",
    "RuleCondition",
    "EstimationRule",
    "Proposal",
    "EnumeratingRule",
    "JudgingRule",
    "RulePack",
    "EvalContext",
    "load_rule_pack",
    "apply_estimation",
    "enumerate_candidates",
    "enumerate",
    "judge",
    "select_best",
    "table_points",
    "CATEGORY_SETS",
]

ALLOWED_SYMBOLS = frozenset({"W", "D", "P", "S"})

# `enumerate` is rebound below as the public name of enumerate_candidates;
# module internals use this alias for the builtin.
_builtin_enumerate = builtins.enumerate

CATEGORY_SETS = {
    "refprop": ("indefinite", "definite", "generic"),
    "number": ("singular", "plural", "uncountable"),
}


class RulePackError(ValueError):
    """A rule-pack file is malformed."""


@dataclass(frozen=True)
class RuleCondition:
    pattern: Optional[Pattern] = None  # anchored at the rule's target bunsetsu
    context: Tuple[str, ...] = ()  # predicate names, task-interpreted
    candidate: Tuple[str, ...] = ()  # per-candidate predicates (judging rules)


@dataclass(frozen=True)
class EstimationRule:
    id: str
    condition: RuleCondition
    effects: Mapping[str, Tuple[int, Score]]  # category → (possibility, value)
    enabled: bool = True
    note: str = ""


@dataclass(frozen=True)
class Proposal:
    selector: str
    points: Formula


@dataclass(frozen=True)
class EnumeratingRule:
    id: str
    condition: RuleCondition
    proposals: Tuple[Proposal, ...]
    merge: str = "add"  # how proposals within this rule combine per candidate
    enabled: bool = True
    note: str = ""


@dataclass(frozen=True)
class JudgingRule:
    id: str
    condition: RuleCondition
    points: Optional[Formula] = None
    table: Optional[Tuple[str, Tuple[Score, ...]]] = None  # (level source, 8 cells)
    applies_to: Tuple[str, ...] = ("entity",)
    enabled: bool = True
    note: str = ""


@dataclass(frozen=True)
class RulePack:
    task: str
    categories: Tuple[str, ...]
    lexicons: Mapping[str, frozenset]
    rules: Tuple[object, ...]  # mixed kinds, in file order

    @property
    def estimation_rules(self) -> List[EstimationRule]:
        return [r for r in self.rules if isinstance(r, EstimationRule)]

    @property
    def enumerating_rules(self) -> List[EnumeratingRule]:
        return [r for r in self.rules if isinstance(r, EnumeratingRule)]

    @property
    def judging_rules(self) -> List[JudgingRule]:
        return [r for r in self.rules if isinstance(r, JudgingRule)]


# ---------------------------------------------------------------------------
# Loading


def _compile_condition(raw: Optional[dict], where: str) -> RuleCondition:
    if raw is None:
        return RuleCondition()
    if not isinstance(raw, dict):
        raise RulePackError(f"{where}: condition must be an object")
    pattern = None
    if raw.get("pattern") is not None:
        try:
            pattern = compile_pattern(raw["pattern"])
        except PatternError as exc:
            raise RulePackError(f"{where}: {exc}") from None
    return RuleCondition(
        pattern=pattern,
        context=tuple(raw.get("context", ())),
        candidate=tuple(raw.get("candidate", ())),
    )


def _compile_points(raw, where: str) -> Formula:
    src = str(raw)
    try:
        formula = compile_formula(src)
    except FormulaError as exc:
        raise RulePackError(f"{where}: {exc}") from None
    unbound = formula.symbols - ALLOWED_SYMBOLS
    if unbound:
        raise RulePackError(f"{where}: unknown symbols {sorted(unbound)} in {src!r}")
    return formula


def _score_cell(raw, where: str) -> Score:
    try:
        return Score.of(raw)
    except (ValueError, TypeError) as exc:
        raise RulePackError(f"{where}: bad score {raw!r}: {exc}") from None


def load_rule_pack(source: Union[str, Path, dict]) -> RulePack:
    if isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RulePackError(f"{source}: {exc}") from None
    else:
        data = source
    task = data.get("task")
    if task not in (
        "refprop",
        "number",
        "coref",
        "indirect",
        "demonstrative",
        "personal",
        "zero",
        "ellipsis",
    ):
        raise RulePackError(f"unknown task {task!r}")
    categories = tuple(data.get("categories", CATEGORY_SETS.get(task, ())))
    lexicons = {
        name: frozenset(words) for name, words in (data.get("lexicons") or {}).items()
    }
    rules: List[object] = []
    for i, raw in _builtin_enumerate(data.get("rules", ())):
        rid = raw.get("id") or f"rule{i}"
        where = f"rules[{i}] ({rid})"
        kind = raw.get("kind")
        condition = _compile_condition(raw.get("condition"), where)
        enabled = bool(raw.get("enabled", True))
        note = raw.get("note", "")
        if kind == "estimate":
            if not categories:
                raise RulePackError(f"{where}: task {task} has no category set")
            effects: Dict[str, Tuple[int, Score]] = {c: (0, Score.of(0)) for c in categories}
            for cat, eff in (raw.get("effects") or {}).items():
                if cat not in categories:
                    raise RulePackError(f"{where}: unknown category {cat!r}")
                if not isinstance(eff, (list, tuple)) or len(eff) != 2:
                    raise RulePackError(f"{where}: effect must be [possibility, value]")
                poss, value = eff
                if poss not in (0, 1):
                    raise RulePackError(f"{where}: possibility must be 0 or 1")
                score = _score_cell(value, where)
                if poss == 0 and score != Score.of(0):
                    raise RulePackError(f"{where}: possibility 0 must carry value 0")
                effects[cat] = (poss, score)
            rules.append(
                EstimationRule(id=rid, condition=condition, effects=effects, enabled=enabled, note=note)
            )
        elif kind == "enumerate":
            proposals = []
            for j, p in _builtin_enumerate(raw.get("proposals") or ()):
                selector = p.get("candidate")
                if not isinstance(selector, str) or not selector:
                    raise RulePackError(f"{where}: proposal {j} needs a candidate selector")
                proposals.append(
                    Proposal(selector=selector, points=_compile_points(p.get("points", 0), where))
                )
            if not proposals:
                raise RulePackError(f"{where}: enumerating rule needs proposals")
            merge = raw.get("merge", "add")
            if merge not in ("add", "max"):
                raise RulePackError(f"{where}: merge must be add or max")
            rules.append(
                EnumeratingRule(
                    id=rid, condition=condition, proposals=tuple(proposals),
                    merge=merge, enabled=enabled, note=note,
                )
            )
        elif kind == "judge":
            points = None
            table = None
            if raw.get("table") is not None:
                t = raw["table"]
                cells = tuple(_score_cell(c, where) for c in t.get("cells", ()))
                if len(cells) != 8:
                    raise RulePackError(f"{where}: table needs 8 cells (levels 0..6 + exact)")
                kind_name = t.get("kind")
                if not kind_name:
                    raise RulePackError(f"{where}: table needs a kind")
                table = (kind_name, cells)
            if raw.get("points") is not None:
                points = _compile_points(raw["points"], where)
            if points is None and table is None:
                raise RulePackError(f"{where}: judging rule needs points or a table")
            rules.append(
                JudgingRule(
                    id=rid, condition=condition, points=points, table=table,
                    applies_to=tuple(raw.get("applies_to", ("entity",))),
                    enabled=enabled, note=note,
                )
            )
        else:
            raise RulePackError(f"{where}: unknown kind {kind!r}")
    return RulePack(task=task, categories=categories, lexicons=lexicons, rules=tuple(rules))


# ---------------------------------------------------------------------------
# Evaluation context


@dataclass
class EvalContext:
    """Everything a rule may consult while firing.

    `predicate` decides task-specific context conditions; `resolve` maps a
    proposal's candidate selector to concrete (candidate, env) pairs; `assess`
    scores a judging rule against one candidate (returning the points to add,
    or None when the rule does not fire).  Task modules supply these three.
    """

    doc: Document
    resources: object = None  # ResourceSet, untyped to avoid a hard dependency
    salience: object = None  # SalienceState
    refprop: Dict[Ref, object] = field(default_factory=dict)
    number: Dict[Ref, object] = field(default_factory=dict)
    config: Dict[str, object] = field(default_factory=dict)
    predicate: Optional[Callable] = None  # (ctx, name, ref, bindings) -> bool
    resolve: Optional[Callable] = None  # (ctx, rule, selector, ref, bindings) -> iterable
    assess: Optional[Callable] = None  # (ctx, rule, ref, candidate, bindings) -> Score|None
    extra_lexicons: Dict[str, frozenset] = field(default_factory=dict)

    def match_context(self, pack: RulePack) -> MatchContext:
        lexicons = dict(pack.lexicons)
        lexicons.update(self.extra_lexicons)
        if self.resources is not None:
            return self.resources.match_context(lexicons)
        return MatchContext(lexicons=lexicons)

    def condition_fires(
        self, condition: RuleCondition, ref: Ref, mctx: MatchContext
    ) -> Optional[dict]:
        """Bindings dict when the condition holds at ref, else None."""

        bindings: dict = {}
        if condition.pattern is not None:
            from anaphora.pattern import match_at

            got = match_at(condition.pattern, self.doc, ref, mctx)
            if got is None:
                return None
            bindings.update(got)
        for name in condition.context:
            if self.predicate is None or not self.predicate(self, name, ref, bindings):
                return None
        return bindings


# ---------------------------------------------------------------------------
# Appliers


def apply_estimation(
    pack: RulePack, ref: Ref, ctx: EvalContext
) -> Tuple[Dict[str, Tuple[int, Score]], List[str]]:
    """Combine the effects of every firing rule on one phrase.

    A firing rule marks each category possible (1) or impossible (0); a
    single impossibility vetoes the category no matter what other rules
    say.  Values accumulate additively across the rules that allow the
    category.  Returns (per-category (possibility, value), firing ids).
    """

    mctx = ctx.match_context(pack)
    vetoed = {c: False for c in pack.categories}
    allowed = {c: False for c in pack.categories}
    value = {c: Score.of(0) for c in pack.categories}
    fired: List[str] = []
    for rule in pack.estimation_rules:
        if not rule.enabled:
            continue
        if ctx.condition_fires(rule.condition, ref, mctx) is None:
            continue
        fired.append(rule.id)
        for cat, (p, v) in rule.effects.items():
            if p == 1:
                allowed[cat] = True
                value[cat] = value[cat] + v
            else:
                vetoed[cat] = True
    poss = {
        c: 1 if (allowed[c] and not vetoed[c]) else 0 for c in pack.categories
    }
    return {c: (poss[c], value[c]) for c in pack.categories}, fired


def enumerate_candidates(
    pack: RulePack, ref: Ref, ctx: EvalContext, board: Optional[ScoreBoard] = None
) -> ScoreBoard:
    """Run every enumerating rule at ref and accumulate proposals on a board.

    Passing an existing `board` lets several packs compete over the same
    candidate pool (their proposals add onto the shared entries).
    """

    mctx = ctx.match_context(pack)
    if board is None:
        board = ScoreBoard()
    for rule in pack.enumerating_rules:
        if not rule.enabled:
            continue
        bindings = ctx.condition_fires(rule.condition, ref, mctx)
        if bindings is None:
            continue
        staged: List[Tuple[Candidate, Score]] = []
        for proposal in rule.proposals:
            for candidate, env in ctx.resolve(ctx, rule, proposal.selector, ref, bindings):
                staged.append((candidate, proposal.points.evaluate(env)))
        if rule.merge == "max":
            best: Dict[Candidate, Score] = {}
            order: List[Candidate] = []
            for candidate, points in staged:
                if candidate not in best:
                    order.append(candidate)
                    best[candidate] = points
                elif points > best[candidate]:
                    best[candidate] = points
            staged = [(c, best[c]) for c in order]
        for candidate, points in staged:
            board.add(candidate, points, rule.id)
    return board


# The operation is also reachable under the bare name `enumerate`.
enumerate = enumerate_candidates  # noqa: A001 - deliberate public alias


def judge(pack: RulePack, ref: Ref, board: ScoreBoard, ctx: EvalContext) -> ScoreBoard:
    """Apply every judging rule to each eligible candidate on the board."""

    mctx = ctx.match_context(pack)
    for rule in pack.judging_rules:
        if not rule.enabled:
            continue
        bindings = ctx.condition_fires(rule.condition, ref, mctx)
        if bindings is None:
            continue
        for entry in board.entries():
            if entry.candidate.kind not in rule.applies_to:
                continue
            points = ctx.assess(ctx, rule, ref, entry.candidate, bindings)
            if points is not None:
                board.add(entry.candidate, points, rule.id)
    return board


def table_points(table: Tuple[str, Tuple[Score, ...]], level: int) -> Score:
    """Cell for a similarity level 0..6 or EXACT (7)."""

    _, cells = table
    if not 0 <= level <= 7:
        raise ValueError(f"similarity level {level} out of range")
    return cells[level]
