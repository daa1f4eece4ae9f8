"""Shared test helpers: random formula generators and reference evaluators."""

import random

import pytest

from conspec.lang import (
    And,
    Gt,
    HasCon,
    Implies,
    Not,
    Or,
    Predict,
    TaskVocabulary,
    evaluate,
)


@pytest.fixture
def vocab() -> TaskVocabulary:
    return TaskVocabulary.make(
        ["metallic", "ears", "wheels", "tail"], ["truck", "car", "cat"]
    )


def random_core_ast(rng: random.Random, vocab: TaskVocabulary, depth: int):
    """Uniformly messy formula over the core forms only."""
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            c1, c2 = rng.sample(list(vocab.concepts), 2)
            return Gt(c1, c2)
        return Predict(rng.choice(list(vocab.classes)))
    kind = rng.choice(["not", "and", "or"])
    if kind == "not":
        return Not(random_core_ast(rng, vocab, depth - 1))
    cls = And if kind == "and" else Or
    return cls(
        random_core_ast(rng, vocab, depth - 1),
        random_core_ast(rng, vocab, depth - 1),
    )


def random_sugared_ast(rng: random.Random, vocab: TaskVocabulary, depth: int):
    """Formula that may contain hasCon and => nodes."""
    if depth <= 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.35:
            c1, c2 = rng.sample(list(vocab.concepts), 2)
            return Gt(c1, c2)
        if roll < 0.6:
            return Predict(rng.choice(list(vocab.classes)))
        con = rng.choice(list(vocab.concepts))
        if rng.random() < 0.5:
            return HasCon(con, None)
        others = [c for c in vocab.concepts if c != con]
        contrast = tuple(rng.sample(others, rng.randint(1, len(others))))
        return HasCon(con, contrast)
    kind = rng.choice(["not", "and", "or", "implies"])
    if kind == "not":
        return Not(random_sugared_ast(rng, vocab, depth - 1))
    left = random_sugared_ast(rng, vocab, depth - 1)
    right = random_sugared_ast(rng, vocab, depth - 1)
    if kind == "and":
        return And(left, right)
    if kind == "or":
        return Or(left, right)
    return Implies(left, right)


def evaluate_with_sugar(e, scores, reps, vocab: TaskVocabulary) -> bool:
    """Reference evaluator that interprets sugar directly (no rewriting)."""
    if isinstance(e, HasCon):
        contrast = e.contrast if e.contrast is not None else vocab.concepts
        others = [c for c in contrast if c != e.concept]
        return all(reps[e.concept] > reps[c] for c in others)
    if isinstance(e, Implies):
        return (not evaluate_with_sugar(e.antecedent, scores, reps, vocab)) or (
            evaluate_with_sugar(e.consequent, scores, reps, vocab)
        )
    if isinstance(e, Not):
        return not evaluate_with_sugar(e.operand, scores, reps, vocab)
    if isinstance(e, And):
        return evaluate_with_sugar(e.left, scores, reps, vocab) and evaluate_with_sugar(
            e.right, scores, reps, vocab
        )
    if isinstance(e, Or):
        return evaluate_with_sugar(e.left, scores, reps, vocab) or evaluate_with_sugar(
            e.right, scores, reps, vocab
        )
    return evaluate(e, scores, reps)


def random_env(rng: random.Random, vocab: TaskVocabulary, ties: bool = True):
    """Random classifier scores and strength values; sometimes tied."""
    scores = [rng.choice([0.0, 0.25, 0.5, 1.0]) if ties else rng.random()
              for _ in vocab.classes]
    reps = {
        c: rng.choice([0.0, 0.1, 0.5, 0.9]) if ties else rng.random()
        for c in vocab.concepts
    }
    return scores, reps
