"""
Queens, pigeons and Schur numbers
=================================

Each family comes with a generator, a decoder that turns a model back
into a solution, and an independent checker for that solution.
"""

import time

from psplus.benchmarks import format_solution, gen_nqueens, gen_pigeonhole, gen_schur, run_instance
from psplus.solver import solve

# counting all placements of 8 queens
print("8 queens:", solve(gen_nqueens(8).ground(), "count").count, "solutions")

inst = gen_nqueens(12)
out = run_instance(inst)
print(format_solution(inst, out.solution))

# p pigeons fit into h holes iff p <= h; the UNSAT side is the hard one
for p, h in [(6, 6), (7, 6), (8, 7)]:
    out = run_instance(gen_pigeonhole(p, h))
    print(f"pigeonhole({p},{h}): {out.status} in {out.seconds:.2f} s")

# S(3) = 13: 1..13 split into 3 sum-free bins, 1..14 cannot be
for n in (13, 14):
    inst = gen_schur(n, 3)
    out = run_instance(inst)
    print(f"schur({n},3): {out.status}")
    if out.solution:
        print(format_solution(inst, out.solution))

# S(4) = 44 takes a few seconds for 44 and several minutes to refute 45
t = time.perf_counter()
inst = gen_schur(44, 4)
out = run_instance(inst)
print(f"schur(44,4): {out.status} in {time.perf_counter() - t:.1f} s")
print(format_solution(inst, out.solution))
