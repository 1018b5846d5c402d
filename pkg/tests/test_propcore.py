import itertools
import random
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psplus.ground import GroundCAtom, GroundClause, GroundTheory, atom_catom, ground_texts
from psplus.propcore import (
    CnfFragmentError,
    OracleGuardError,
    catom_cnf,
    check_model,
    compile_cnf,
    enumerate_models,
    sat_catom,
    sat_clause,
)

A, B, C = 0, 1, 2


def _cnf_models(cnf, n):
    out = []
    for bits in itertools.product([0, 1], repeat=n):
        m = {i for i, b in enumerate(bits) if b}
        if cnf.is_model(m):
            out.append(frozenset(m))
    return out


def test_sat_catom_examples():
    p = atom_catom(0)
    assert sat_catom(p, {0}) and not sat_catom(p, set())
    assert all(sat_catom(GroundCAtom(0, (0, 1), None), m) for m in [set(), {0}, {0, 1}])
    two = GroundCAtom(2, (A, B, C), 2)
    assert sat_catom(two, {A, C}) and not sat_catom(two, {A, B, C})


def test_sat_clause_examples():
    assert not sat_clause(GroundClause((), ()), {0})
    assert sat_clause(GroundClause((atom_catom(1),), (atom_catom(0),)), {0, 1})
    ante = GroundCAtom(1, (A, B), 1)
    cons = GroundCAtom(2, (A, B), 2)
    assert not sat_clause(GroundClause((ante,), (cons,)), {A})


def _worked():
    return ground_texts([], ["q(b,c) -> p(a).\np(X) -> q(X,_) ; X = a.\n"])


def _model(gt, names):
    return {gt.atom_id(n) for n in names}


def test_check_model_worked_example():
    gt = _worked()
    assert check_model(gt, _model(gt, ["p(a)", "q(b,c)"]))
    assert check_model(gt, _model(gt, ["p(b)", "p(c)", "q(b,a)", "q(c,c)"]))
    assert not check_model(gt, _model(gt, ["p(b)"]))
    assert check_model(GroundTheory(), {0, 1})


def test_enumerate_worked_example():
    gt = _worked()
    models = {frozenset(gt.atoms[i] for i in m) for m in enumerate_models(gt)}
    assert frozenset({"p(a)", "q(b,c)"}) in models
    assert frozenset({"p(b)", "p(c)", "q(b,a)", "q(c,c)"}) in models
    # every model is verified independently
    assert all(check_model(gt, m) for m in enumerate_models(gt))


def test_enumerate_unsat_and_order():
    gt = GroundTheory(["a"], [], [((), ())])
    assert enumerate_models(gt) == []
    free = GroundTheory(["a", "b"])
    assert enumerate_models(free) == [frozenset(), frozenset({1}), frozenset({0}), frozenset({0, 1})]
    assert enumerate_models(free, limit=3) == enumerate_models(free)[:3]


def test_enumerate_guard():
    gt = GroundTheory([f"x{i}" for i in range(25)])
    with pytest.raises(OracleGuardError):
        enumerate_models(gt)
    assert len(enumerate_models(gt, limit=5)) == 5


def test_catom_cnf_examples():
    assert catom_cnf(GroundCAtom(None, (A, B, C), 1)) == [(-1, -2), (-1, -3), (-2, -3)]
    assert catom_cnf(GroundCAtom(1, (A, B, C), None)) == [(1, 2, 3)]
    two = GroundCAtom(2, (A, B, C), 2)
    gt = GroundTheory(["a", "b", "c"])
    gt.add_clause([], [two])
    cnf = compile_cnf(gt)
    assert len(cnf.clauses) == 4  # C(3,3) + C(3,2)
    assert set(_cnf_models(cnf, 3)) == {frozenset({A, B}), frozenset({A, C}), frozenset({B, C})}


def test_dimacs_format():
    gt = GroundTheory(["a", "b", "c"])
    gt.add_clause([atom_catom(A)], [GroundCAtom(1, (B, C), None)])
    gt.add_clause([], [])
    assert compile_cnf(gt).to_dimacs() == "p cnf 3 2\n-1 2 3 0\n0\n"


def test_fragment_rejected():
    gt = GroundTheory(["a", "b"])
    gt.add_clause([GroundCAtom(2, (A, B), 2)], [atom_catom(A)])
    with pytest.raises(CnfFragmentError):
        compile_cnf(gt)


def test_one_of_p_is_p():
    for m in [set(), {0}]:
        assert sat_catom(atom_catom(0), m) == (0 in m)


@settings(max_examples=300, deadline=None)
@given(
    k=st.integers(1, 6),
    m=st.integers(0, 7),
    n=st.integers(0, 7),
    widen=st.tuples(st.integers(0, 2), st.integers(0, 2)),
    bits=st.integers(0, 63),
)
def test_widening_bounds_preserves_satisfaction(k, m, n, widen, bits):
    atoms = tuple(range(k))
    model = {i for i in atoms if bits >> i & 1}
    narrow = GroundCAtom(m, atoms, n)
    wide = GroundCAtom(max(0, m - widen[0]), atoms, n + widen[1])
    if sat_catom(narrow, model):
        assert sat_catom(wide, model)


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
            ante = [atom_catom(a) for a in rng.sample(range(n_atoms), rng.randint(0, min(2, n_atoms)))]
            cons = []
            for _ in range(rng.randint(0, 2)):
                atoms = tuple(sorted(rng.sample(range(n_atoms), rng.randint(1, min(3, n_atoms)))))
                cons.append(GroundCAtom(1, atoms, None) if len(atoms) > 1 else atom_catom(atoms[0]))
            gt.add_clause(ante, cons)
    return gt


def test_cnf_equivalence_random():
    rng = random.Random(11)
    for _ in range(200):
        gt = _fragment_theory(rng, rng.randint(1, 8))
        cnf = compile_cnf(gt)
        assert set(_cnf_models(cnf, gt.n_atoms)) == set(enumerate_models(gt))


@pytest.mark.parametrize("k,m,n", [(4, 1, 2), (5, 2, 3), (6, 0, 1), (6, 3, None), (3, None, 0), (7, 7, 7)])
def test_clause_count_law(k, m, n):
    c = GroundCAtom(m, tuple(range(k)), n)
    expected = (comb(k, n + 1) if n is not None else 0) + (comb(k, k - m + 1) if m else 0)
    assert len(catom_cnf(c)) == expected
