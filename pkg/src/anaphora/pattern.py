"""Tree patterns over dependency-parsed bunsetsu.

Rule conditions are written as s-expression patterns that are anchored at one
bunsetsu and may look at its morphemes, particles, semantic markers, its
dependents, and its governor.  The full grammar with worked examples lives in
docs/pattern.md; a compact summary:

    -                                any bunsetsu
    (node KEY=VALUE ... SUB ...)     attribute tests plus structural subpatterns
    (child P)                        inside node: some dependent matches P
    (modee P)                        inside node: the governor matches P
    (and P Q ...) (or P Q ...) (not P)

Attribute keys test the head morpheme (pos, subpos, conj, lemma, surface),
the whole bunsetsu (particle, psig, punct, morph), or context-provided data
(marker via the semantic-marker lookup, class via named lexicons).  VALUE may
be a comma-separated alternation; `~` instead of `=` makes it a regex search.
`capture=NAME` records the matched bunsetsu in the returned bindings.

Structural semantics are existential and independent: every (child P) clause
must be satisfied by some dependent, clauses do not compete for distinct
dependents, and the first satisfying dependent (in position order) supplies
any captures.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Tuple

from anaphora.model import Bunsetsu, Document, Ref

KEYS = frozenset(
    {
        "pos",
        "subpos",
        "conj",
        "lemma",
        "surface",
        "particle",
        "psig",
        "punct",
        "morph",
        "marker",
        "class",
        "capture",
    }
)


class PatternError(ValueError):
    """The pattern text is malformed."""


@dataclass(frozen=True)
class MatchContext:
    """External data a pattern may consult: semantic markers and lexicons."""

    marker_of: Callable[[str], frozenset] = lambda lemma: frozenset()
    lexicons: Mapping[str, frozenset] = field(default_factory=dict)


EMPTY_CONTEXT = MatchContext()


# --- AST ------------------------------------------------------------------


@dataclass(frozen=True)
class Test:
    key: str
    values: Tuple[str, ...]
    regex: bool = False


@dataclass(frozen=True)
class Node:
    tests: Tuple[Test, ...] = ()
    children: Tuple["PatternNode", ...] = ()
    governor: Optional["PatternNode"] = None
    capture: Optional[str] = None


@dataclass(frozen=True)
class Any_:
    pass


@dataclass(frozen=True)
class And:
    parts: Tuple["PatternNode", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["PatternNode", ...]


@dataclass(frozen=True)
class Not:
    part: "PatternNode"


PatternNode = object  # union of the above


@dataclass(frozen=True)
class Pattern:
    source: str
    root: PatternNode


# --- Tokenizer / parser -----------------------------------------------------


def _tokenize(text: str) -> list:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append((c, i))
            i += 1
        else:
            start = i
            buf = []
            while i < n and not text[i].isspace() and text[i] not in "()":
                if text[i] == '"':
                    i += 1
                    while i < n and text[i] != '"':
                        if text[i] == "\\" and i + 1 < n:
                            i += 1
                        buf.append(text[i])
                        i += 1
                    if i >= n:
                        raise PatternError(f"unterminated quote at {start}")
                    i += 1
                else:
                    buf.append(text[i])
                    i += 1
            tokens.append(("".join(buf), start))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def next(self):
        if self.pos >= len(self.tokens):
            raise PatternError("unexpected end of pattern")
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, what):
        tok, at = self.next()
        if tok != what:
            raise PatternError(f"expected {what!r} at {at}, found {tok!r}")

    def parse(self) -> PatternNode:
        node = self.parse_pattern()
        if self.pos != len(self.tokens):
            raise PatternError(f"trailing tokens at {self.tokens[self.pos][1]}")
        return node

    def parse_pattern(self) -> PatternNode:
        tok, at = self.next()
        if tok == "-":
            return Any_()
        if tok != "(":
            raise PatternError(f"expected pattern at {at}, found {tok!r}")
        head, at = self.next()
        if head == "node":
            return self.parse_node_body()
        if head in ("and", "or"):
            parts = []
            while self.peek() != ")":
                parts.append(self.parse_pattern())
            self.expect(")")
            if not parts:
                raise PatternError(f"empty ({head}) at {at}")
            return And(tuple(parts)) if head == "and" else Or(tuple(parts))
        if head == "not":
            part = self.parse_pattern()
            self.expect(")")
            return Not(part)
        raise PatternError(f"unknown form {head!r} at {at}")

    def parse_node_body(self) -> Node:
        tests = []
        children = []
        governor = None
        capture = None
        while True:
            tok = self.peek()
            if tok is None:
                raise PatternError("unterminated (node ...)")
            if tok == ")":
                self.next()
                break
            if tok == "(":
                self.next()
                sub, at = self.next()
                if sub == "child":
                    children.append(self.parse_pattern())
                    self.expect(")")
                elif sub == "modee":
                    if governor is not None:
                        raise PatternError(f"duplicate (modee ...) at {at}")
                    governor = self.parse_pattern()
                    self.expect(")")
                else:
                    raise PatternError(f"unknown form {sub!r} inside node at {at}")
                continue
            tok, at = self.next()
            m = re.match(r"([a-z]+)([=~])(.*)\Z", tok, re.S)
            if not m:
                raise PatternError(f"expected key=value at {at}, found {tok!r}")
            key, op, value = m.groups()
            if key not in KEYS:
                raise PatternError(f"unknown key {key!r} at {at}")
            if key == "capture":
                if op != "=" or not value:
                    raise PatternError(f"capture needs a name at {at}")
                capture = value
                continue
            if op == "~":
                try:
                    re.compile(value)
                except re.error as exc:
                    raise PatternError(f"bad regex at {at}: {exc}") from None
                tests.append(Test(key, (value,), regex=True))
            else:
                tests.append(Test(key, tuple(value.split(","))))
        return Node(tuple(tests), tuple(children), governor, capture)


def compile_pattern(text: str) -> Pattern:
    """Compile pattern text, raising PatternError on malformed input."""

    return Pattern(source=text, root=_Parser(text).parse())


# --- Matching ---------------------------------------------------------------


def _test_values(test: Test, b: Bunsetsu, ctx: MatchContext) -> frozenset:
    key = test.key
    if key == "pos":
        return frozenset({b.head.pos})
    if key == "subpos":
        return frozenset({b.head.subpos})
    if key == "conj":
        return frozenset({b.head.conjugation})
    if key == "lemma":
        return frozenset({b.head.lemma})
    if key == "surface":
        return frozenset({b.head.surface})
    if key == "particle":
        return frozenset(b.particles)
    if key == "psig":
        return frozenset({b.particle_signature})
    if key == "punct":
        p = b.ends_with_punctuation
        return frozenset({p}) if p else frozenset()
    if key == "morph":
        return frozenset(
            alt
            for m in b.morphemes
            for alt in (f"{m.pos}:{m.lemma}", f"{m.pos}:*", f"*:{m.lemma}")
        )
    if key == "marker":
        return frozenset(ctx.marker_of(b.head.lemma))
    if key == "class":
        return frozenset(
            name for name, lexicon in ctx.lexicons.items() if b.head.lemma in lexicon
        )
    raise AssertionError(key)


def _run_test(test: Test, b: Bunsetsu, ctx: MatchContext) -> bool:
    actual = _test_values(test, b, ctx)
    if test.regex:
        rx = re.compile(test.values[0])
        return any(rx.search(v) for v in actual)
    return any(v in actual for v in test.values)


def _match(node: PatternNode, doc: Document, b: Bunsetsu, ctx: MatchContext) -> Optional[dict]:
    if isinstance(node, Any_):
        return {}
    if isinstance(node, And):
        bindings: dict = {}
        for part in node.parts:
            got = _match(part, doc, b, ctx)
            if got is None:
                return None
            bindings.update(got)
        return bindings
    if isinstance(node, Or):
        for part in node.parts:
            got = _match(part, doc, b, ctx)
            if got is not None:
                return got
        return None
    if isinstance(node, Not):
        return {} if _match(node.part, doc, b, ctx) is None else None
    assert isinstance(node, Node)
    for test in node.tests:
        if not _run_test(test, b, ctx):
            return None
    bindings = {}
    if node.capture:
        bindings[node.capture] = b.ref
    if node.governor is not None:
        gov = doc.governor(b)
        if gov is None:
            return None
        got = _match(node.governor, doc, gov, ctx)
        if got is None:
            return None
        bindings.update(got)
    for child_pattern in node.children:
        dependents = doc.sentences[b.sentence_index].modifiers_of(b.sentence_pos)
        for dep in dependents:
            got = _match(child_pattern, doc, dep, ctx)
            if got is not None:
                bindings.update(got)
                break
        else:
            return None
    return bindings


def match_at(
    pattern: Pattern, doc: Document, ref: Ref, ctx: MatchContext = EMPTY_CONTEXT
) -> Optional[dict]:
    """Match the pattern anchored at ref; bindings dict on success, else None."""

    return _match(pattern.root, doc, doc.bunsetsu_at(ref), ctx)
