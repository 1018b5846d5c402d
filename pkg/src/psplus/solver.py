"""Davis-Putnam style search over propositional PS+ theories.

C-atoms are propagated natively through true/unknown counters; the search
is chronological backtracking without clause learning.  The inner loop
lives in :mod:`psplus._kernel`.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernel as K
from .ground import GroundCAtom, GroundTheory

FIXED_TRUE = 1
FIXED_FALSE = 0
OPEN = -1

_STATUS_NAME = {FIXED_TRUE: "fixed-true", FIXED_FALSE: "fixed-false", OPEN: "open"}


@dataclass
class SolveResult:
    satisfiable: bool
    models: list = field(default_factory=list)
    count: Optional[int] = None
    complete: bool = True  # False when stopped by a limit or timeout
    decisions: int = 0
    conflicts: int = 0
    seconds: float = 0.0

    @property
    def status(self) -> str:
        if self.satisfiable:
            return "SAT"
        return "UNSAT" if self.complete else "UNKNOWN"


def _csr(lists, n_rows):
    ptr = np.zeros(n_rows + 1, dtype=np.int64)
    for i, row in enumerate(lists):
        ptr[i + 1] = ptr[i] + len(row)
    flat = np.fromiter((x for row in lists for x in row), dtype=np.int64, count=int(ptr[-1]))
    return ptr, flat


def _expand(cube: np.ndarray, cap: Optional[int]) -> np.ndarray:
    """Rows for the completions of ``cube`` (-1 = free), at most ``cap`` of them."""
    free = np.flatnonzero(cube == -1)
    total = 1 << len(free) if len(free) < 62 else None
    k = total if cap is None else (cap if total is None else min(cap, total))
    rows = np.repeat((cube == 1)[None, :], k, axis=0)
    if len(free):
        bits = np.arange(k, dtype=np.int64)
        for t, a in enumerate(free[::-1]):
            rows[:, a] = (bits >> t) & 1
    return rows


class Solver:
    """Search state over one :class:`GroundTheory`.

    One instance is single-threaded; separate instances over the same
    theory are independent.
    """

    def __init__(self, gt: GroundTheory):
        self.gt = gt
        n = gt.n_atoms
        cat_atoms = [tuple(dict.fromkeys(c.atoms)) for c in gt.catoms]
        nc = len(cat_atoms)
        cat_lo = np.array([c.lo for c in gt.catoms], dtype=np.int64)
        cat_hi = np.array(
            [len(a) if c.upper is None else c.upper for c, a in zip(gt.catoms, cat_atoms)], dtype=np.int64
        )
        cat_ptr, cat_flat = _csr(cat_atoms, nc)
        # atom -> c-atoms, each list in c-atom order (stable sort on atom id)
        owner = np.repeat(np.arange(nc, dtype=np.int64), np.diff(cat_ptr))
        atom_flat = owner[np.argsort(cat_flat, kind="stable")]
        atom_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(cat_flat, minlength=n), out=atom_ptr[1:])

        nl = len(gt.clauses)
        mem, pol, lens = [], [], []
        for ante, cons in gt.clauses:
            a_ = list(dict.fromkeys(ante))
            c_ = list(dict.fromkeys(cons))
            mem += a_
            mem += c_
            pol += [0] * len(a_)
            pol += [1] * len(c_)
            lens.append(len(a_) + len(c_))
        cl_mem = np.array(mem, dtype=np.int64)
        cl_pol = np.array(pol, dtype=np.int64)
        cl_ptr = np.zeros(nl + 1, dtype=np.int64)
        np.cumsum(np.array(lens, dtype=np.int64), out=cl_ptr[1:])

        # per c-atom clause lists ordered antecedent, both sides (pol 2),
        # consequent, clauses ascending within each block; cc_mid/cc_cons
        # mark where the last two blocks start
        owner_cl = np.repeat(np.arange(nl, dtype=np.int64), lens)
        pairs, inv = np.unique(cl_mem * max(nl, 1) + owner_cl, return_inverse=True)
        has0 = np.zeros(len(pairs), dtype=bool)
        has1 = np.zeros(len(pairs), dtype=bool)
        has0[inv[cl_pol == 0]] = True
        has1[inv[cl_pol == 1]] = True
        upol = np.where(has0 & has1, 2, np.where(has0, 0, 1))
        pc, pli = pairs // max(nl, 1), pairs % max(nl, 1)
        rank = np.array([0, 2, 1])[upol]
        order = np.lexsort((pli, rank, pc))
        cc_flat = pli[order]
        cc_ptr = np.zeros(nc + 1, dtype=np.int64)
        np.cumsum(np.bincount(pc, minlength=nc), out=cc_ptr[1:])
        cc_mid = cc_ptr[:-1] + np.bincount(pc[upol == 0], minlength=nc)
        cc_cons = cc_ptr[1:] - np.bincount(pc[upol == 1], minlength=nc)

        self.T = (cat_lo, cat_hi, cat_ptr, cat_flat, atom_ptr, atom_flat, cl_ptr, cl_mem, cl_pol, cc_ptr, cc_flat, cc_mid, cc_cons)
        self.sizes = np.array([len(a) for a in cat_atoms], dtype=np.int64)
        self.reset()

    def reset(self) -> None:
        longest = int(np.diff(self.T[6]).max()) if self.gt.n_clauses else 1
        self.S = K.make_state(self.gt.n_atoms, len(self.gt.catoms), self.gt.n_clauses, self.sizes, longest)

    # low-level access, mainly for tests and tracing

    @property
    def level(self) -> int:
        return int(self.S[14][K.CTL_LEVEL])

    def value(self, atom: int) -> Optional[bool]:
        v = int(self.S[0][atom])
        return None if v < 0 else bool(v)

    def catom_status(self, c: int) -> str:
        return _STATUS_NAME[int(K.catom_status(c, self.T, self.S))]

    def counters(self, c: int) -> tuple:
        lo = int(self.S[1][c])
        return lo, lo + int(self.S[2][c])

    def assign(self, atom: int, value: bool) -> None:
        """Assign as a decision at a new level."""
        if self.S[0][atom] != -1:
            raise ValueError(f"atom {atom} already assigned")
        K.decide(atom, int(bool(value)), self.T, self.S)

    def propagate(self, initial: bool = False) -> bool:
        """Propagate to fixpoint; ``initial`` first schedules every clause."""
        if initial:
            K.enqueue_all(self.T, self.S)
        return bool(K.propagate(self.T, self.S))

    def backtrack(self, level: int) -> None:
        K.backtrack_to(level, self.T, self.S)

    def snapshot(self) -> tuple:
        return self.S[0].copy(), self.S[1].copy(), self.S[2].copy(), int(self.S[14][K.CTL_TRAIL])

    def pick(self) -> tuple:
        a, pol, any_open = K.pick(self.T, self.S)
        return int(a), int(pol), bool(any_open)

    # search

    def solve(
        self,
        mode: str = "one",
        limit: Optional[int] = None,
        timeout: Optional[float] = None,
        batch: int = 4096,
        budget: int = 200_000,
    ) -> SolveResult:
        """Search for models.

        ``mode`` is ``"one"``, ``"all"`` or ``"count"``.  ``limit`` caps the
        number of models returned in ``"all"`` mode.  With ``timeout`` the
        search stops after roughly that many seconds and the result is
        marked incomplete.
        """
        if mode not in ("one", "all", "count"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "one":
            limit = 1
        start = time.perf_counter()
        rows, count, complete = self._run(mode, limit, timeout, batch, budget)
        models = [frozenset(np.flatnonzero(row).tolist()) for row in rows]
        ctl = self.S[14]
        return SolveResult(
            satisfiable=bool(models) or bool(count),
            models=models,
            count=count,
            complete=complete,
            decisions=int(ctl[K.CTL_DECISIONS]),
            conflicts=int(ctl[K.CTL_CONFLICTS]),
            seconds=time.perf_counter() - start,
        )

    def model_array(self, limit: Optional[int] = None, timeout: Optional[float] = None) -> np.ndarray:
        """Models as rows of a boolean matrix, in search order."""
        return self._run("all", limit, timeout, 4096, 200_000)[0]

    def _run(self, mode, limit, timeout, batch, budget):
        self.reset()
        start = time.perf_counter()
        n = self.gt.n_atoms
        kmode = K.MODE_COUNT if mode == "count" else K.MODE_ALL
        want = batch if limit is None else max(1, min(batch, limit))
        out = np.zeros((want, n), dtype=np.int8)
        chunks: list = []
        n_models = 0
        bigcount = 0
        complete = True
        ctl = self.S[14]
        while True:
            ret = K.search(self.T, self.S, kmode, out, budget)
            k = int(ctl[K.CTL_NOUT])
            for row in out[:k]:
                block = _expand(row, None if limit is None else limit - n_models)
                chunks.append(block)
                n_models += block.shape[0]
                if limit is not None and n_models >= limit:
                    break
            if limit is not None and n_models >= limit:
                complete = ret == K.RET_DONE and int(ctl[K.CTL_PHASE]) == K.PHASE_DONE
                break
            if ret == K.RET_DONE or (ret == K.RET_MODELS and int(ctl[K.CTL_PHASE]) == K.PHASE_DONE and k == 0):
                break
            if ret == K.RET_BIGADD:
                bigcount += 1 << int(ctl[K.CTL_BIGADD])
            if timeout is not None and time.perf_counter() - start > timeout:
                complete = False
                break
        rows = np.concatenate(chunks) if chunks else np.zeros((0, n), dtype=bool)
        if limit is not None:
            rows = rows[:limit]
        count = int(ctl[K.CTL_COUNT]) + bigcount if mode == "count" else None
        return rows, count, complete


def reduce_theory(gt: GroundTheory):
    """Simplify ``gt`` by propagation at level 0.

    Returns ``(reduced, keep, fixed_true)`` where ``keep[i]`` is the original
    id of reduced atom ``i`` and ``fixed_true`` the atoms forced true, or
    ``None`` when propagation alone refutes the theory.  Atom order is kept,
    so the branching heuristic makes the same choices on either theory.
    """
    s = Solver(gt)
    if not s.propagate(initial=True):
        return None
    val = s.S[0]
    keep = np.flatnonzero(val == -1).tolist()
    fixed_true = np.flatnonzero(val == 1).tolist()
    new_id = {a: i for i, a in enumerate(keep)}
    red = GroundTheory([gt.atoms[a] for a in keep], data=gt.data)
    status = [int(K.catom_status(c, s.T, s.S)) for c in range(len(gt.catoms))]

    def shrink(ci):
        c = gt.catoms[ci]
        atoms = tuple(dict.fromkeys(c.atoms))
        t = sum(1 for a in atoms if val[a] == 1)
        lower = None if c.lower is None else max(0, c.lower - t)
        upper = None if c.upper is None else c.upper - t
        return GroundCAtom(lower, tuple(new_id[a] for a in atoms if val[a] == -1), upper)

    for ante, cons in gt.clauses:
        if any(status[c] == 0 for c in ante) or any(status[c] == 1 for c in cons):
            continue
        red.add_clause(
            [shrink(c) for c in ante if status[c] != 1],
            [shrink(c) for c in cons if status[c] != 0],
        )
    return red, keep, fixed_true


def solve(gt: GroundTheory, mode: str = "one", **kw) -> SolveResult:
    """Solve ``gt`` after level-0 simplification; models use ``gt``'s atom ids."""
    start = time.perf_counter()
    r = reduce_theory(gt)
    if r is None:
        return SolveResult(False, [], 0 if mode == "count" else None, True, 0, 1, time.perf_counter() - start)
    red, keep, fixed_true = r
    res = Solver(red).solve(mode, **kw)
    base = frozenset(fixed_true)
    res.models = [base | {keep[a] for a in m} for m in res.models]
    res.seconds = time.perf_counter() - start
    return res


def model_array(gt: GroundTheory, limit: Optional[int] = None) -> np.ndarray:
    """All models of ``gt`` (up to ``limit``) as a boolean matrix over ``gt``'s atoms."""
    r = reduce_theory(gt)
    if r is None:
        return np.zeros((0, gt.n_atoms), dtype=bool)
    red, keep, fixed_true = r
    sub = Solver(red).model_array(limit)
    rows = np.zeros((sub.shape[0], gt.n_atoms), dtype=bool)
    rows[:, fixed_true] = True
    rows[:, keep] = sub
    return rows
