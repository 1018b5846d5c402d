"""
Grounding and solving a small theory
====================================

Two clauses over the constants a, b and c. The grounder instantiates
variables, expands `_` into a cardinality atom and evaluates equality
while grounding.
"""

from psplus import enumerate_models, ground_texts, solve

program = """
q(b,c) -> p(a).
p(X) -> q(X,_) ; X = a.
"""

# the r/1 facts only fix the constants and their order
gt = ground_texts(["r(a). r(b). r(c)."], ["data r/1.\n" + program])
for i in range(gt.n_clauses):
    print(gt.describe_clause(i))

# the instance for X = a is a tautology and has been dropped

# every model, by brute force and by search
oracle = enumerate_models(gt)
res = solve(gt, "all")
print(len(oracle), "models;", "solver agrees:", set(oracle) == set(res.models))
for m in res.models[:5]:
    print(" ", sorted(gt.model_names(m, with_data=False)))

# adding data changes what is possible: the CWA makes data atoms fixed
gt2 = ground_texts(["r(a). r(b). r(c). s(a)."], ["data r/1.\ndata s/1.\np(X) -> s(X).\n" + program])
print("with p restricted to s:", solve(gt2, "count").count, "models")
