"""Tour of the specification language: parsing, sugar, evaluation, clauses.

Run: python demos/01_specification_language.py
"""

from conspec import TaskVocabulary, desugar, evaluate, parse_spec, print_spec, to_lp_queries

# A task vocabulary: the concepts annotations talk about, and the classes
# the classifier can output.  Class indices follow listing order.
vocab = TaskVocabulary.make(
    concepts=["metallic", "ears", "wheels"],
    class_names=["truck", "car", "cat"],
)

# The bread-and-butter specification shape: a prediction should come with
# the right concept ordering ("the model predicts truck for the right reasons").
spec = parse_spec("predict(truck) => gt(wheels, ears)", vocab)
print("parsed:   ", spec)
print("printed:  ", print_spec(spec))

# hasCon(x) is sugar for "x beats every other concept"; => is material implication.
sugar = parse_spec("hasCon(metallic) && hasCon(wheels) => predict(truck) || predict(car)", vocab)
core = desugar(sugar, vocab)
print("desugared:", print_spec(core))

# Evaluation needs classifier scores and per-concept strengths.
scores = [2.5, 1.9, -0.3]  # truck wins
strengths = {"metallic": 0.61, "ears": 0.05, "wheels": 0.48}
print("holds here?", evaluate(desugar(spec, vocab), scores, strengths))

# A tied argmax makes predict() false: the prediction must be unambiguous.
just_predict = desugar(parse_spec("predict(truck)", vocab), vocab)
print("predict(truck) at tied scores:", evaluate(just_predict, [1.0, 1.0, 0.0], strengths))

# Verification asks whether any point violates the spec, so the negation is
# split into conjunctive clauses; each clause later becomes one LP.
for clause in to_lp_queries(core):
    print("violation clause:", clause)
