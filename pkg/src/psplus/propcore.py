"""Semantics of propositional PS+: satisfaction, model checking, a brute-force
model enumerator and compilation of c-atoms to plain CNF."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .ground import GroundCAtom, GroundClause, GroundTheory
from .lang import PSError

Model = frozenset  # of GroundAtomId

ORACLE_GUARD = 24
_CHUNK = 1 << 18


class OracleGuardError(PSError):
    pass


class CnfFragmentError(PSError):
    pass


def sat_catom(c: GroundCAtom, model) -> bool:
    n = sum(1 for a in set(c.atoms) if a in model)
    return c.lo <= n <= c.hi


def sat_clause(cl: GroundClause, model) -> bool:
    return any(sat_catom(b, model) for b in cl.consequent) or not all(
        sat_catom(a, model) for a in cl.antecedent
    )


def check_model(gt: GroundTheory, model) -> bool:
    model = set(model)
    sat = [sat_catom(c, model) for c in gt.catoms]
    for ante, cons in gt.clauses:
        if not (any(sat[b] for b in cons) or not all(sat[a] for a in ante)):
            return False
    return True


def _chunk_matrix(start: int, stop: int, n: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(bool)


def model_matrix(gt: GroundTheory, limit: Optional[int] = None, guard: int = ORACLE_GUARD) -> np.ndarray:
    """All models as rows of a boolean matrix (columns are atom ids).

    Rows follow the lexicographic order of the assignment vector
    ``(x0, x1, ...)`` with false before true.
    """
    n = gt.n_atoms
    if n > guard and limit is None:
        raise OracleGuardError(f"{n} atoms exceed the oracle guard of {guard}; pass a limit")
    found = []
    total = 0
    step = max(1, min(_CHUNK, 1 << n))
    for start in range(0, 1 << n, step):
        bits = _chunk_matrix(start, min(start + step, 1 << n), n)
        ok = np.ones(len(bits), dtype=bool)
        sat = []
        for c in gt.catoms:
            cnt = bits[:, list(dict.fromkeys(c.atoms))].sum(axis=1) if c.atoms else np.zeros(len(bits), int)
            sat.append((cnt >= c.lo) & (cnt <= c.hi))
        for ante, cons in gt.clauses:
            clause = np.zeros(len(bits), dtype=bool)
            for b in cons:
                clause |= sat[b]
            body = np.ones(len(bits), dtype=bool)
            for a in ante:
                body &= sat[a]
            ok &= clause | ~body
        rows = bits[ok]
        if limit is not None and total + len(rows) >= limit:
            found.append(rows[: limit - total])
            break
        found.append(rows)
        total += len(rows)
    if not found:
        return np.zeros((0, n), dtype=bool)
    return np.concatenate(found)


def enumerate_models(gt: GroundTheory, limit: Optional[int] = None, guard: int = ORACLE_GUARD) -> list:
    """Every model of ``gt`` by exhaustive search over all atom subsets."""
    return [frozenset(np.flatnonzero(row).tolist()) for row in model_matrix(gt, limit, guard)]


# ---------------------------------------------------------------------------
# CNF compilation


@dataclass
class CnfTheory:
    n_vars: int
    clauses: list = field(default_factory=list)  # tuples of signed 1-based literals

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {len(self.clauses)}"]
        lines += [" ".join(str(l) for l in cl) + (" 0" if cl else "0") for cl in self.clauses]
        return "\n".join(lines) + "\n"

    def is_model(self, model) -> bool:
        return all(any((l > 0) == ((abs(l) - 1) in model) for l in cl) for cl in self.clauses)


def _single(c: GroundCAtom) -> Optional[int]:
    """The atom ``p`` if ``c`` is equivalent to the plain atom ``p``."""
    atoms = set(c.atoms)
    if len(atoms) == 1 and c.lo == 1 and c.hi >= 1:
        return c.atoms[0]
    return None


def _disjunction(c: GroundCAtom) -> Optional[tuple]:
    atoms = tuple(dict.fromkeys(c.atoms))
    if atoms and c.lo == 1 and c.hi >= len(atoms):
        return atoms
    return None


def catom_cnf(c: GroundCAtom) -> list:
    """Subset clauses for ``T => c``: one negative clause per (n+1)-subset and
    one positive clause per (k-m+1)-subset."""
    atoms = tuple(dict.fromkeys(c.atoms))
    k = len(atoms)
    out = []
    if c.upper is not None and c.upper < k:
        for sub in combinations(atoms, c.upper + 1):
            out.append(tuple(-(a + 1) for a in sub))
    if c.lower is not None and c.lower > 0:
        if c.lower > k + 1:
            out.append(())
        else:
            for sub in combinations(atoms, k - c.lower + 1):
                out.append(tuple(a + 1 for a in sub))
    return out


def compile_cnf(gt: GroundTheory) -> CnfTheory:
    """Compile ``gt`` to CNF without auxiliary variables (variable = atom id + 1).

    Supported clause shapes: ``T => B`` with a single arbitrary c-atom ``B``,
    and clauses whose antecedent members are plain atoms and whose consequent
    members are plain atoms or disjunctions ``1{p1,...,pk}``.
    """
    cnf = CnfTheory(gt.n_atoms)
    for i, (ante, cons) in enumerate(gt.clauses):
        if not ante and len(cons) == 1:
            cnf.clauses.extend(catom_cnf(gt.catoms[cons[0]]))
            continue
        lits: dict = {}
        for a in ante:
            p = _single(gt.catoms[a])
            if p is None:
                raise CnfFragmentError(f"clause {i}: antecedent {gt.catoms[a]} is not a plain atom")
            lits.setdefault(-(p + 1), None)
        for b in cons:
            d = _disjunction(gt.catoms[b])
            if d is None:
                raise CnfFragmentError(f"clause {i}: consequent {gt.catoms[b]} is not a disjunction")
            for p in d:
                lits.setdefault(p + 1, None)
        cnf.clauses.append(tuple(lits))
    return cnf


def to_dimacs(gt: GroundTheory) -> str:
    return compile_cnf(gt).to_dimacs()
