"""Concept specification language: syntax tree, parser, desugaring, evaluation.

A specification is a boolean formula over two kinds of atoms:

* ``gt(con1, con2)`` — concept ``con1`` is more strongly present than
  ``con2`` (a *strength predicate*),
* ``predict(cls)`` — the classifier outputs exactly class ``cls``.

Connectives are ``!``, ``&&``, ``||`` and the sugar ``=>``; ``hasCon(con)``
is sugar for "con beats every contrast concept".  Concrete syntax::

    pred := "gt(" con "," con ")" | "predict(" cls ")"
          | "hasCon(" con ["|" contrast-list] ")"
    expr := pred | "!" expr | expr "&&" expr | expr "||" expr
          | expr "=>" expr | "(" expr ")"

Precedence ``!`` > ``&&`` > ``||`` > ``=>``; ``&&``/``||`` associate left,
``=>`` right.  Formulas implicitly quantify over every input in the scope
under check; no variable appears in the tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence, Union

from .errors import (
    ClauseExplosion,
    EmptyContrastSet,
    MissingRepValue,
    SpecSyntaxError,
    UnknownName,
)

__all__ = [
    "ClassLabel",
    "TaskVocabulary",
    "Gt",
    "Predict",
    "Not",
    "And",
    "Or",
    "HasCon",
    "Implies",
    "SpecExpr",
    "Literal",
    "Clause",
    "parse_spec",
    "print_spec",
    "desugar",
    "evaluate",
    "to_lp_queries",
    "iter_spec_lines",
]


_NAME_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_")


def _is_token_name(s: str) -> bool:
    return bool(s) and all(ch in _NAME_CHARS for ch in s)


@dataclass(frozen=True)
class ClassLabel:
    """A classifier output class: display name plus output-vector index."""

    name: str
    index: int

    def __post_init__(self):
        if not _is_token_name(self.name):
            raise ValueError(f"invalid class name {self.name!r}")
        if self.index < 0:
            raise ValueError("class index must be >= 0")


@dataclass(frozen=True)
class TaskVocabulary:
    """The concept and class names a task's specifications may mention."""

    concepts: tuple[str, ...]
    classes: tuple[ClassLabel, ...]

    def __post_init__(self):
        if not self.concepts or not self.classes:
            raise ValueError("vocabulary needs at least one concept and one class")
        for con in self.concepts:
            if not _is_token_name(con):
                raise ValueError(f"invalid concept name {con!r}")
        if len(set(self.concepts)) != len(self.concepts):
            raise ValueError("duplicate concept names")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate class names")

    @classmethod
    def make(cls, concepts: Sequence[str], class_names: Sequence[str]) -> "TaskVocabulary":
        """Build a vocabulary with class indices assigned in listing order."""
        return cls(
            concepts=tuple(concepts),
            classes=tuple(ClassLabel(n, i) for i, n in enumerate(class_names)),
        )

    def class_by_name(self, name: str) -> ClassLabel:
        for c in self.classes:
            if c.name == name:
                return c
        raise UnknownName(f"unknown class {name!r}")

    def require_concept(self, name: str) -> str:
        if name not in self.concepts:
            raise UnknownName(f"unknown concept {name!r}")
        return name


# --- abstract syntax ---------------------------------------------------------


@dataclass(frozen=True)
class Gt:
    stronger: str
    weaker: str


@dataclass(frozen=True)
class Predict:
    label: ClassLabel


@dataclass(frozen=True)
class Not:
    operand: "SpecExpr"


@dataclass(frozen=True)
class And:
    left: "SpecExpr"
    right: "SpecExpr"


@dataclass(frozen=True)
class Or:
    left: "SpecExpr"
    right: "SpecExpr"


@dataclass(frozen=True)
class HasCon:
    """Sugar: ``concept`` beats every concept in ``contrast`` (None = default)."""

    concept: str
    contrast: tuple[str, ...] | None = None


@dataclass(frozen=True)
class Implies:
    """Sugar for material implication."""

    antecedent: "SpecExpr"
    consequent: "SpecExpr"


SpecExpr = Union[Gt, Predict, Not, And, Or, HasCon, Implies]

_CORE_FORMS = (Gt, Predict, Not, And, Or)


def is_core(e: SpecExpr) -> bool:
    """True when ``e`` contains no sugar nodes."""
    if isinstance(e, (Gt, Predict)):
        return True
    if isinstance(e, Not):
        return is_core(e.operand)
    if isinstance(e, (And, Or)):
        return is_core(e.left) and is_core(e.right)
    return False


# --- lexer --------------------------------------------------------------------

_PUNCT = ("=>", "&&", "||", "!", "(", ")", ",", "|")


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    """Yield (kind, value, position); kind is 'name' or 'punct'."""
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text.startswith("=>", i) or text.startswith("&&", i) or text.startswith("||", i):
            yield "punct", text[i : i + 2], i
            i += 2
            continue
        if ch in "!(),|":
            yield "punct", ch, i
            i += 1
            continue
        if ch in _NAME_CHARS:
            j = i
            while j < n and text[j] in _NAME_CHARS:
                j += 1
            yield "name", text[i:j], i
            i = j
            continue
        raise SpecSyntaxError(f"unexpected character {ch!r}", i)
    yield "eof", "", n


class _Parser:
    def __init__(self, text: str, vocab: TaskVocabulary):
        self.text = text
        self.vocab = vocab
        self.tokens = list(_tokenize(text))
        self.pos = 0

    @property
    def current(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def advance(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        kind, val, position = self.current
        if kind == "punct" and val == value:
            self.advance()
            return
        raise SpecSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", position)

    def parse(self) -> SpecExpr:
        e = self.implication()
        kind, val, position = self.current
        if kind != "eof":
            raise SpecSyntaxError(f"unexpected trailing input {val!r}", position)
        return e

    def implication(self) -> SpecExpr:
        left = self.disjunction()
        if self.current[:2] == ("punct", "=>"):
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> SpecExpr:
        e = self.conjunction()
        while self.current[:2] == ("punct", "||"):
            self.advance()
            e = Or(e, self.conjunction())
        return e

    def conjunction(self) -> SpecExpr:
        e = self.negation()
        while self.current[:2] == ("punct", "&&"):
            self.advance()
            e = And(e, self.negation())
        return e

    def negation(self) -> SpecExpr:
        if self.current[:2] == ("punct", "!"):
            self.advance()
            return Not(self.negation())
        return self.atom()

    def atom(self) -> SpecExpr:
        kind, val, position = self.current
        if kind == "punct" and val == "(":
            self.advance()
            e = self.implication()
            self.expect(")")
            return e
        if kind != "name":
            raise SpecSyntaxError(f"expected a predicate, found {val or 'end of input'!r}", position)
        if val == "gt":
            self.advance()
            self.expect("(")
            c1 = self.concept_name()
            self.expect(",")
            c2 = self.concept_name()
            self.expect(")")
            return Gt(c1, c2)
        if val == "predict":
            self.advance()
            self.expect("(")
            label = self.class_name()
            self.expect(")")
            return Predict(label)
        if val == "hasCon":
            self.advance()
            self.expect("(")
            con = self.concept_name()
            contrast: tuple[str, ...] | None = None
            if self.current[:2] == ("punct", "|"):
                self.advance()
                names = [self.concept_name()]
                while self.current[:2] == ("punct", ","):
                    self.advance()
                    names.append(self.concept_name())
                contrast = tuple(names)
            self.expect(")")
            return HasCon(con, contrast)
        raise SpecSyntaxError(f"unknown predicate {val!r}", position)

    def concept_name(self) -> str:
        kind, val, position = self.current
        if kind != "name":
            raise SpecSyntaxError(f"expected a concept name, found {val or 'end of input'!r}", position)
        self.advance()
        return self.vocab.require_concept(val)

    def class_name(self) -> ClassLabel:
        kind, val, position = self.current
        if kind != "name":
            raise SpecSyntaxError(f"expected a class name, found {val or 'end of input'!r}", position)
        self.advance()
        return self.vocab.class_by_name(val)


def parse_spec(text: str, vocab: TaskVocabulary) -> SpecExpr:
    """Parse one specification; every name is resolved against ``vocab``.

    Raises :class:`SpecSyntaxError` on malformed input and
    :class:`UnknownName` when a token is outside the vocabulary.
    """
    return _Parser(text, vocab).parse()


# --- printing ------------------------------------------------------------------

_LEVEL = {Implies: 1, Or: 2, And: 3, Not: 4}


def _level(e: SpecExpr) -> int:
    return _LEVEL.get(type(e), 5)


def print_spec(e: SpecExpr) -> str:
    """Render ``e`` in concrete syntax; reparsing yields an identical tree."""
    if isinstance(e, Gt):
        return f"gt({e.stronger}, {e.weaker})"
    if isinstance(e, Predict):
        return f"predict({e.label.name})"
    if isinstance(e, HasCon):
        if e.contrast is None:
            return f"hasCon({e.concept})"
        return f"hasCon({e.concept} | {', '.join(e.contrast)})"
    if isinstance(e, Not):
        inner = print_spec(e.operand)
        if _level(e.operand) < _level(e):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(e, (And, Or, Implies)):
        if isinstance(e, And):
            op, left, right = "&&", e.left, e.right
        elif isinstance(e, Or):
            op, left, right = "||", e.left, e.right
        else:
            op, left, right = "=>", e.antecedent, e.consequent
        lvl = _level(e)
        ls = print_spec(left)
        rs = print_spec(right)
        if isinstance(e, Implies):
            # right-associative: parenthesize a left child at the same level
            if _level(left) <= lvl:
                ls = f"({ls})"
            if _level(right) < lvl:
                rs = f"({rs})"
        else:
            if _level(left) < lvl:
                ls = f"({ls})"
            if _level(right) <= lvl:
                rs = f"({rs})"
        return f"{ls} {op} {rs}"
    raise TypeError(f"not a specification node: {e!r}")


# --- desugaring -----------------------------------------------------------------


def desugar(e: SpecExpr, vocab: TaskVocabulary) -> SpecExpr:
    """Rewrite sugar into the five core forms.

    ``hasCon(con)`` becomes the conjunction of ``gt(con, con_i)`` over the
    contrast set (defaulting to every other vocabulary concept, in
    vocabulary order); ``a => b`` becomes ``!a || b``.
    """
    if isinstance(e, (Gt, Predict)):
        return e
    if isinstance(e, Not):
        return Not(desugar(e.operand, vocab))
    if isinstance(e, And):
        return And(desugar(e.left, vocab), desugar(e.right, vocab))
    if isinstance(e, Or):
        return Or(desugar(e.left, vocab), desugar(e.right, vocab))
    if isinstance(e, Implies):
        return Or(Not(desugar(e.antecedent, vocab)), desugar(e.consequent, vocab))
    if isinstance(e, HasCon):
        contrast = e.contrast if e.contrast is not None else vocab.concepts
        others = tuple(c for c in contrast if c != e.concept)
        if not others:
            raise EmptyContrastSet(f"hasCon({e.concept}) has no contrast concepts")
        out: SpecExpr = Gt(e.concept, others[0])
        for con in others[1:]:
            out = And(out, Gt(e.concept, con))
        return out
    raise TypeError(f"not a specification node: {e!r}")


# --- evaluation -------------------------------------------------------------------


def argmax_set(scores: Sequence[float]) -> set[int]:
    top = max(scores)
    return {i for i, s in enumerate(scores) if s == top}


def evaluate(
    e: SpecExpr,
    classifier_output: Sequence[float],
    rep_values: Mapping[str, float],
) -> bool:
    """Evaluate a desugared formula at one input.

    ``gt`` compares concept strengths strictly; ``predict(c)`` holds only
    when the argmax of ``classifier_output`` is the singleton ``{c}``, so a
    tied maximum makes it false.
    """
    if isinstance(e, Gt):
        try:
            return rep_values[e.stronger] > rep_values[e.weaker]
        except KeyError as exc:
            raise MissingRepValue(f"no strength value for concept {exc.args[0]!r}") from None
    if isinstance(e, Predict):
        return argmax_set(classifier_output) == {e.label.index}
    if isinstance(e, Not):
        return not evaluate(e.operand, classifier_output, rep_values)
    if isinstance(e, And):
        return evaluate(e.left, classifier_output, rep_values) and evaluate(
            e.right, classifier_output, rep_values
        )
    if isinstance(e, Or):
        return evaluate(e.left, classifier_output, rep_values) or evaluate(
            e.right, classifier_output, rep_values
        )
    raise TypeError(f"evaluate() needs a desugared formula, got {type(e).__name__}")


# --- clause extraction --------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    """A possibly negated atom inside a conjunctive clause."""

    atom: Gt | Predict
    positive: bool = True

    def negated(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        s = print_spec(self.atom)
        return s if self.positive else f"!{s}"


@dataclass(frozen=True)
class Clause:
    """A conjunction of literals; one clause becomes one LP query."""

    literals: tuple[Literal, ...]

    def __str__(self) -> str:
        return " && ".join(str(lit) for lit in self.literals)

    def holds(self, classifier_output: Sequence[float], rep_values: Mapping[str, float]) -> bool:
        for lit in self.literals:
            value = evaluate(lit.atom, classifier_output, rep_values)
            if value != lit.positive:
                return False
        return True


DEFAULT_CLAUSE_CAP = 64


def _nnf(e: SpecExpr, negate: bool) -> SpecExpr:
    if isinstance(e, (Gt, Predict)):
        return Not(e) if negate else e
    if isinstance(e, Not):
        return _nnf(e.operand, not negate)
    if isinstance(e, And):
        cls = Or if negate else And
        return cls(_nnf(e.left, negate), _nnf(e.right, negate))
    if isinstance(e, Or):
        cls = And if negate else Or
        return cls(_nnf(e.left, negate), _nnf(e.right, negate))
    raise TypeError(f"to_lp_queries() needs a desugared formula, got {type(e).__name__}")


def _dnf(e: SpecExpr, cap: int) -> list[tuple[Literal, ...]]:
    if isinstance(e, (Gt, Predict)):
        return [(Literal(e, True),)]
    if isinstance(e, Not):
        # NNF guarantees the operand is an atom here
        return [(Literal(e.operand, False),)]
    if isinstance(e, Or):
        out = _dnf(e.left, cap) + _dnf(e.right, cap)
        if len(out) > cap:
            raise ClauseExplosion(f"DNF exceeds {cap} clauses")
        return out
    if isinstance(e, And):
        left = _dnf(e.left, cap)
        right = _dnf(e.right, cap)
        if len(left) * len(right) > cap:
            raise ClauseExplosion(f"DNF exceeds {cap} clauses")
        return [l + r for l in left for r in right]
    raise TypeError(f"unexpected node {type(e).__name__}")


def to_lp_queries(e: SpecExpr, max_clauses: int = DEFAULT_CLAUSE_CAP) -> list[Clause]:
    """Disjuncts of the DNF of ``!e``: each clause is one violation scenario.

    The input formula must be desugared.  ``!e`` holds at a point iff at
    least one returned clause has every literal true there.
    """
    negated = _nnf(e, negate=True)
    return [Clause(lits) for lits in _dnf(negated, max_clauses)]


# --- spec files -----------------------------------------------------------------------


def iter_spec_lines(text: str) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, spec text), skipping blanks and # comments."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line
