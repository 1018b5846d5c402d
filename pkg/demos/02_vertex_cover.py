"""
Vertex cover in two encodings
=============================

The positional encoding assigns cover vertices to positions 1..k and
grounds to about m*n^2 clauses. The cardinality encoding says the same
thing with one c-atom `{ invc(_) } k` and grounds to about m+n clauses.
"""

import time

from psplus.benchmarks import (
    VC_CATOM,
    VC_POSITIONAL,
    gen_vertex_cover,
    min_cover_by_solver,
    min_vertex_cover_size,
    random_graph,
    run_instance,
)

print(VC_POSITIONAL)
print(VC_CATOM)

# ground sizes for growing graphs with m = 2n edges
for n in (10, 20, 40):
    pos = gen_vertex_cover(n, 2 * n, n // 2, seed=n, encoding="positional").ground()
    cat = gen_vertex_cover(n, 2 * n, n // 2, seed=n, encoding="catom").ground()
    print(f"n={n:3d}  positional {pos.n_clauses:7d} clauses   c-atom {cat.n_clauses:4d}   ratio {pos.n_clauses / cat.n_clauses:8.1f}")

# minimum covers found by the solver match brute force
for seed in range(5):
    graph = random_graph(8, 12, seed)
    k_bf = min_vertex_cover_size(*graph)
    t = time.perf_counter()
    k_cat = min_cover_by_solver(8, 12, seed, "catom", graph)
    k_pos = min_cover_by_solver(8, 12, seed, "positional", graph)
    print(f"seed {seed}: k_G={k_bf} catom={k_cat} positional={k_pos} ({time.perf_counter() - t:.2f} s)")

# a cover of a bigger graph at its minimum size
graph = random_graph(50, 100, 1)
k = min_cover_by_solver(50, 100, 1, "catom", graph)
out = run_instance(gen_vertex_cover(50, 100, k, 1, "catom", graph=graph))
print(f"n=50: k_G={k}, cover {out.solution}")
