"""End-to-end acceptance checks.

Every test prints exactly one PASS/FAIL line with its measured numbers
before asserting, so the run log doubles as the acceptance report.
"""

import itertools
import random
import time
from math import comb

import numpy as np
import pytest

from psplus.benchmarks import (
    extract_solution,
    gen_nqueens,
    gen_pigeonhole,
    gen_schur,
    gen_vertex_cover,
    min_cover_by_solver,
    min_vertex_cover_size,
    queens_ok,
    random_graph,
    run_instance,
    schur_ok,
)
from psplus.completion import supported_models, translated_models
from psplus.ground import GroundCAtom, GroundTheory, atom_catom, ground_texts
from psplus.propcore import catom_cnf, compile_cnf, enumerate_models, model_matrix
from psplus.solver import model_array, solve
from randprog import random_program
from randtheory import random_theory


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return emit


def _keys(rows):
    w = 1 << np.arange(rows.shape[1], dtype=np.int64)
    return np.sort(rows.astype(np.int64) @ w)


WORKED = "q(b,c) -> p(a).\np(X) -> q(X,_) ; X = a.\n"


def test_criterion_1_worked_example(report):
    t = time.perf_counter()
    # the r/1 facts only fix a, b, c as the constants, in that order
    gt = ground_texts(["r(a). r(b). r(c)."], ["data r/1.\n" + WORKED])
    clauses = [gt.describe_clause(i) for i in range(gt.n_clauses)]
    models = {frozenset(gt.model_names(m, with_data=False)) for m in enumerate_models(gt)}
    secs = time.perf_counter() - t
    want = [
        "1{q(b,c)}1 => 1{p(a)}1",
        "1{p(b)}1 => 1{q(b,a),q(b,b),q(b,c)}",
        "1{p(c)}1 => 1{q(c,a),q(c,b),q(c,c)}",
    ]
    ok = (
        clauses == want
        and frozenset({"p(a)", "q(b,c)"}) in models
        and frozenset({"p(b)", "p(c)", "q(b,a)", "q(c,c)"}) in models
        and secs < 1.0
    )
    report(1, "worked example", ok, f"{len(clauses)} clauses as listed={clauses == want}, {len(models)} models, {secs:.3f} s (< 1 s)")


def _ex_texts(A, B, with_ex3):
    data = " ".join(f"p1({a})." for a in A) + " " + " ".join(f"p2({b})." for b in B)
    prog = "data p1/1.\ndata p2/1.\nq1(X) -> p1(X).\nq2(X) -> p2(X).\n"
    if with_ex3:
        prog += f"p1({A[0]}) -> p1({B[0]}).\n"
    return [data], [prog]


def _subsets(xs):
    return itertools.chain.from_iterable(itertools.combinations(xs, r) for r in range(len(xs) + 1))


def test_criterion_2_nonmonotonicity(report):
    t = time.perf_counter()
    A, B = ["a0", "a1"], ["b0", "b1"]
    gt = ground_texts(*_ex_texts(A, B, False))
    D = {"p1(a0)", "p1(a1)", "p2(b0)", "p2(b1)"}
    models = {frozenset(gt.model_names(m)) for m in enumerate_models(gt)}
    want = {
        frozenset(D | {f"q1({a})" for a in sa} | {f"q2({b})" for b in sb}) for sa in _subsets(A) for sb in _subsets(B)
    }
    gt3 = ground_texts(*_ex_texts(A, B, True))
    n3 = len(enumerate_models(gt3))
    via_solver = solve(gt3).status
    secs = time.perf_counter() - t
    ok = models == want and len(models) == 16 and n3 == 0 and via_solver == "UNSAT" and secs < 1.0
    report(2, "nonmonotonicity Ex1-Ex3", ok, f"{len(models)} models (want 16, exact match={models == want}), with Ex3: {n3} models / {via_solver}, {secs:.3f} s (< 1 s)")


def test_criterion_3_solver_oracle_equivalence(report):
    rng = random.Random(2024)
    t = time.perf_counter()
    bad = 0
    total_models = 0
    n = 1000
    for _ in range(n):
        gt = random_theory(rng, max_atoms=20, max_clauses=8)
        want = _keys(model_matrix(gt))
        total_models += len(want)
        if not np.array_equal(_keys(model_array(gt)), want):
            bad += 1
    secs = time.perf_counter() - t
    ok = bad == 0 and secs < 60
    report(3, "solver vs oracle", ok, f"{bad} discrepancies over {n} theories ({total_models} models), {secs:.1f} s (< 60 s)")


def _fragment_theory(rng, n_atoms):
    gt = GroundTheory([f"x{i}" for i in range(n_atoms)])
    for _ in range(rng.randint(1, 6)):
        if rng.random() < 0.5:
            k = rng.randint(1, n_atoms)
            atoms = tuple(sorted(rng.sample(range(n_atoms), k)))
            lo = rng.choice([None] + list(range(0, k + 2)))
            hi = rng.choice([None] + list(range(0, k + 1)))
            gt.add_clause([], [GroundCAtom(lo, atoms, hi)])
        else:
            ante = [atom_catom(a) for a in rng.sample(range(n_atoms), rng.randint(0, min(3, n_atoms)))]
            cons = []
            for _ in range(rng.randint(0, 3)):
                atoms = tuple(sorted(rng.sample(range(n_atoms), rng.randint(1, min(4, n_atoms)))))
                cons.append(GroundCAtom(1, atoms, None) if len(atoms) > 1 else atom_catom(atoms[0]))
            gt.add_clause(ante, cons)
    return gt


def _cnf_rows(cnf, n):
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(bool)
    ok = np.ones(len(bits), dtype=bool)
    for cl in cnf.clauses:
        sat = np.zeros(len(bits), dtype=bool)
        for lit in cl:
            sat |= bits[:, abs(lit) - 1] if lit > 0 else ~bits[:, abs(lit) - 1]
        ok &= sat
    return bits[ok]


def test_criterion_4_cnf_oracle_equivalence(report):
    rng = random.Random(77)
    t = time.perf_counter()
    bad_models = bad_counts = 0
    n = 500
    catoms = 0
    for _ in range(n):
        gt = _fragment_theory(rng, rng.randint(1, 12))
        cnf = compile_cnf(gt)
        if not np.array_equal(_keys(_cnf_rows(cnf, gt.n_atoms)), _keys(model_matrix(gt))):
            bad_models += 1
        for c in gt.catoms:
            k = len(set(c.atoms))
            expected = (comb(k, c.upper + 1) if c.upper is not None else 0) + (comb(k, k - c.lower + 1) if c.lower else 0)
            catoms += 1
            if len(catom_cnf(c)) != expected:
                bad_counts += 1
    secs = time.perf_counter() - t
    ok = bad_models == 0 and bad_counts == 0 and secs < 30
    report(4, "CNF vs oracle", ok, f"{bad_models} model-set and {bad_counts} clause-count discrepancies over {n} theories / {catoms} c-atoms, {secs:.1f} s (< 30 s)")


def test_criterion_5_schur_boundary(report):
    t = time.perf_counter()
    inst44 = gen_schur(44, 4)
    gt44 = inst44.ground()
    r44 = solve(gt44)
    placed = r44.satisfiable and schur_ok(44, 4, extract_solution(inst44, gt44, r44.models[0]))
    t44 = time.perf_counter() - t
    r45 = solve(gen_schur(45, 4).ground(), timeout=900)
    secs = time.perf_counter() - t
    ok = placed and r45.status == "UNSAT" and secs <= 600
    report(5, "Schur S(4)=44", ok, f"n=44 {r44.status} (placement checked={placed}, {t44:.1f} s), n=45 {r45.status} ({r45.decisions} decisions), total {secs:.1f} s (<= 600 s)")


def test_criterion_6_pigeonhole(report):
    results = {}
    for p, h in [(8, 8), (9, 8), (10, 9)]:
        t = time.perf_counter()
        out = run_instance(gen_pigeonhole(p, h), timeout=900)
        results[(p, h)] = (out.status, time.perf_counter() - t)
    ok = (
        results[(8, 8)][0] == "SAT"
        and results[(9, 8)][0] == "UNSAT"
        and results[(10, 9)][0] == "UNSAT"
        and results[(10, 9)][1] <= 600
    )
    detail = ", ".join(f"({p},{h}) {s} {secs:.1f} s" for (p, h), (s, secs) in results.items())
    report(6, "pigeonhole", ok, detail + " ((10,9) <= 600 s)")


def _queens_brute(n):
    return sum(
        1
        for perm in itertools.permutations(range(n))
        if all(abs(perm[i] - perm[j]) != j - i for i in range(n) for j in range(i + 1, n))
    )


def test_criterion_7_nqueens(report):
    c4 = solve(gen_nqueens(4).ground(), "count").count
    c8 = solve(gen_nqueens(8).ground(), "count").count
    b4, b8 = _queens_brute(4), _queens_brute(8)
    t = time.perf_counter()
    out = run_instance(gen_nqueens(23), timeout=600)
    secs = time.perf_counter() - t
    placed = out.status == "SAT" and queens_ok(23, out.solution)
    ok = c4 == b4 == 2 and c8 == b8 == 92 and placed and secs <= 300
    report(7, "n-queens", ok, f"count(4)={c4} (oracle {b4}), count(8)={c8} (oracle {b8}), n=23 {out.status} checked={placed} in {secs:.1f} s (<= 300 s)")


def vc_graphs(count=100, seed=0):
    """Seeded random graphs for the vertex-cover check: 3..8 vertices, n-1..2n edges."""
    rng = random.Random(seed)
    out = []
    for g in range(count):
        n = rng.randint(3, 8)
        m = min(rng.randint(n - 1, 2 * n), n * (n - 1) // 2)
        out.append((n, m, 1000 + g))
    return out


def test_criterion_8_vertex_cover_minimum(report):
    t = time.perf_counter()
    bad = 0
    for n, m, seed in vc_graphs():
        graph = random_graph(n, m, seed)
        want = min_vertex_cover_size(*graph)
        k_pos = min_cover_by_solver(n, m, seed, "positional", graph)
        k_cat = min_cover_by_solver(n, m, seed, "catom", graph)
        bad += not (k_pos == k_cat == want)
    secs = time.perf_counter() - t
    ok = bad == 0 and secs < 60
    report(8, "vertex-cover minimum k", ok, f"{bad} discrepancies over 100 graphs (both encodings vs brute force), {secs:.1f} s (< 60 s)")


def test_criterion_9_ground_size_asymmetry(report):
    ratios = {}
    for n in (10, 20, 40):
        pos = gen_vertex_cover(n, 2 * n, n // 2, seed=n, encoding="positional").ground().n_clauses
        cat = gen_vertex_cover(n, 2 * n, n // 2, seed=n, encoding="catom").ground().n_clauses
        ratios[n] = pos / cat
    growth = [ratios[20] / ratios[10], ratios[40] / ratios[20]]
    # doubling n should multiply the ratio by about 4; allow 30% for lower-order terms
    ok = all(g >= 0.7 * 4 for g in growth)
    detail = ", ".join(f"n={n}: {r:.1f}" for n, r in ratios.items())
    report(9, "ground-size asymmetry", ok, f"ratios {detail}; growth {growth[0]:.2f}, {growth[1]:.2f} (>= 2.8)")


def test_criterion_10_theorem4_witness(report):
    rng = random.Random(4)
    t = time.perf_counter()
    bad = 0
    n = 200
    nonempty = 0
    for _ in range(n):
        prog, data = random_program(rng)
        want = supported_models(prog, data)
        nonempty += bool(want)
        if translated_models(prog, data) != want:
            bad += 1
    secs = time.perf_counter() - t
    ok = bad == 0 and secs < 120
    report(10, "supported models = models of T(P)", ok, f"{bad} discrepancies over {n} programs ({nonempty} with models), {secs:.1f} s (< 120 s)")
