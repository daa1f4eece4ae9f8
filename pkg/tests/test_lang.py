import random

import pytest

from conspec.errors import (
    ClauseExplosion,
    EmptyContrastSet,
    MissingRepValue,
    SpecSyntaxError,
    UnknownName,
)
from conspec.lang import (
    And,
    Clause,
    Gt,
    HasCon,
    Implies,
    Literal,
    Not,
    Or,
    Predict,
    TaskVocabulary,
    desugar,
    evaluate,
    parse_spec,
    print_spec,
    to_lp_queries,
    iter_spec_lines,
)

from conftest import evaluate_with_sugar, random_core_ast, random_env, random_sugared_ast


class TestParse:
    def test_gt_atom(self, vocab):
        assert parse_spec("gt(wheels, ears)", vocab) == Gt("wheels", "ears")

    def test_implication_example(self, vocab):
        e = parse_spec("predict(truck) => gt(wheels, ears)", vocab)
        assert e == Implies(Predict(vocab.class_by_name("truck")), Gt("wheels", "ears"))

    def test_truncated_input_position(self, vocab):
        with pytest.raises(SpecSyntaxError) as exc:
            parse_spec("gt(wheels,", vocab)
        assert exc.value.position == 10

    def test_unknown_concept(self, vocab):
        with pytest.raises(UnknownName):
            parse_spec("gt(wheels, wings)", vocab)

    def test_unknown_class(self, vocab):
        with pytest.raises(UnknownName):
            parse_spec("predict(plane)", vocab)

    def test_class_is_not_a_concept(self, vocab):
        with pytest.raises(UnknownName):
            parse_spec("gt(truck, ears)", vocab)

    def test_precedence(self, vocab):
        e = parse_spec("!gt(ears, tail) && predict(car) || predict(cat)", vocab)
        assert isinstance(e, Or)
        assert isinstance(e.left, And)
        assert e.left.left == Not(Gt("ears", "tail"))

    def test_implies_right_associative(self, vocab):
        e = parse_spec("predict(car) => predict(cat) => gt(ears, tail)", vocab)
        assert isinstance(e, Implies)
        assert isinstance(e.consequent, Implies)

    def test_and_left_associative(self, vocab):
        e = parse_spec("gt(ears, tail) && gt(tail, ears) && predict(car)", vocab)
        assert isinstance(e, And)
        assert isinstance(e.left, And)

    def test_parentheses(self, vocab):
        e = parse_spec("!(gt(ears, tail) || predict(car))", vocab)
        assert isinstance(e, Not)
        assert isinstance(e.operand, Or)

    def test_hascon_with_contrast(self, vocab):
        e = parse_spec("hasCon(metallic | ears, wheels)", vocab)
        assert e == HasCon("metallic", ("ears", "wheels"))

    def test_trailing_garbage(self, vocab):
        with pytest.raises(SpecSyntaxError):
            parse_spec("gt(wheels, ears) gt(ears, wheels)", vocab)

    def test_empty_input(self, vocab):
        with pytest.raises(SpecSyntaxError):
            parse_spec("", vocab)

    def test_roundtrip_random_asts(self, vocab):
        rng = random.Random(7)
        for _ in range(500):
            e = random_sugared_ast(rng, vocab, depth=5)
            assert parse_spec(print_spec(e), vocab) == e


class TestDesugar:
    def test_hascon_default_contrast(self):
        vocab = TaskVocabulary.make(["metallic", "ears", "wheels"], ["truck"])
        out = desugar(HasCon("metallic"), vocab)
        assert out == And(Gt("metallic", "ears"), Gt("metallic", "wheels"))

    def test_implies_material(self, vocab):
        p = Predict(vocab.class_by_name("truck"))
        q = Gt("wheels", "ears")
        assert desugar(Implies(p, q), vocab) == Or(Not(p), q)

    def test_singleton_contrast(self, vocab):
        assert desugar(HasCon("metallic", ("ears",)), vocab) == Gt("metallic", "ears")

    def test_empty_contrast_raises(self):
        vocab = TaskVocabulary.make(["metallic"], ["truck"])
        with pytest.raises(EmptyContrastSet):
            desugar(HasCon("metallic"), vocab)

    def test_contrast_drops_self(self, vocab):
        out = desugar(HasCon("metallic", ("metallic", "ears")), vocab)
        assert out == Gt("metallic", "ears")

    def test_semantics_preserved_on_random_asts(self, vocab):
        rng = random.Random(11)
        for _ in range(1000):
            e = random_sugared_ast(rng, vocab, depth=5)
            scores, reps = random_env(rng, vocab)
            expected = evaluate_with_sugar(e, scores, reps, vocab)
            assert evaluate(desugar(e, vocab), scores, reps) == expected


class TestEvaluate:
    def test_gt_strict(self, vocab):
        assert evaluate(Gt("metallic", "ears"), [1.0], {"metallic": 0.9, "ears": 0.1})
        assert not evaluate(Gt("metallic", "ears"), [1.0], {"metallic": 0.5, "ears": 0.5})

    def test_predict_singleton_argmax(self, vocab):
        truck = Predict(vocab.class_by_name("truck"))
        assert evaluate(truck, [0.9, 0.1, 0.0], {})
        assert not evaluate(truck, [0.7, 0.7, 0.0], {})  # tie is not a singleton

    def test_missing_rep_value(self, vocab):
        with pytest.raises(MissingRepValue):
            evaluate(Gt("metallic", "ears"), [1.0], {"metallic": 0.9})

    def test_pure_function(self, vocab):
        e = desugar(parse_spec("hasCon(metallic) => predict(truck)", vocab), vocab)
        scores, reps = [0.2, 0.5, 0.1], {c: 0.3 for c in vocab.concepts}
        results = {evaluate(e, scores, reps) for _ in range(10)}
        assert len(results) == 1

    def test_rejects_sugar(self, vocab):
        with pytest.raises(TypeError):
            evaluate(HasCon("metallic"), [1.0, 0.0, 0.0], {})


class TestClauses:
    def test_negated_implication_single_clause(self, vocab):
        truck = vocab.class_by_name("truck")
        e = desugar(Implies(Predict(truck), Gt("wheels", "ears")), vocab)
        clauses = to_lp_queries(e)
        assert clauses == [
            Clause((Literal(Predict(truck), True), Literal(Gt("wheels", "ears"), False)))
        ]

    def test_atom_negation(self, vocab):
        assert to_lp_queries(Gt("ears", "tail")) == [
            Clause((Literal(Gt("ears", "tail"), False),))
        ]

    def test_conjunction_splits(self, vocab):
        p = Gt("ears", "tail")
        q = Predict(vocab.class_by_name("car"))
        clauses = to_lp_queries(And(p, q))
        assert clauses == [
            Clause((Literal(p, False),)),
            Clause((Literal(q, False),)),
        ]

    def test_clause_cap(self, vocab):
        e = Gt("ears", "tail")
        big = e
        for _ in range(8):
            big = Or(And(big, e), And(e, big))
        with pytest.raises(ClauseExplosion):
            to_lp_queries(big, max_clauses=64)

    def test_dnf_soundness_random(self, vocab):
        rng = random.Random(23)
        for _ in range(800):
            e = random_core_ast(rng, vocab, depth=5)
            clauses = to_lp_queries(e, max_clauses=4096)
            scores, reps = random_env(rng, vocab)
            negated = not evaluate(e, scores, reps)
            any_clause = any(c.holds(scores, reps) for c in clauses)
            assert any_clause == negated

    def test_rejects_sugar(self, vocab):
        with pytest.raises(TypeError):
            to_lp_queries(Implies(Gt("ears", "tail"), Gt("tail", "ears")))


def test_iter_spec_lines():
    text = "# header\n\npredict(truck) => gt(a, b)\n  # indented comment\ngt(a, b)  # tail\n"
    assert list(iter_spec_lines(text)) == [
        (3, "predict(truck) => gt(a, b)"),
        (5, "gt(a, b)"),
    ]


def test_vocabulary_invariants():
    with pytest.raises(ValueError):
        TaskVocabulary.make([], ["truck"])
    with pytest.raises(ValueError):
        TaskVocabulary.make(["a", "a"], ["truck"])
    with pytest.raises(ValueError):
        TaskVocabulary.make(["a"], ["truck", "truck"])
    with pytest.raises(ValueError):
        TaskVocabulary.make(["bad name"], ["truck"])
