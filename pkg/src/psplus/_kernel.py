"""Jitted search kernel for the cardinality-aware Davis-Putnam procedure.

All state lives in flat numpy arrays so that a search can be suspended
(model buffer full, decision budget spent) and resumed from Python.

Static theory tuple ``T``::

    cat_lo, cat_hi            effective bounds of each c-atom
    cat_ptr, cat_atoms        CSR: atoms of each c-atom
    atom_ptr, atom_cats       CSR: c-atoms containing each atom
    cl_ptr, cl_mem, cl_pol    CSR: members of each clause, 0 antecedent / 1 consequent
    cc_ptr, cc_cls            CSR: clauses mentioning each c-atom

Mutable state tuple ``S``::

    val                       int8, -1 unknown / 0 / 1
    cnt_true, cnt_unk         per c-atom counters
    trail, level_start, dec_atom, dec_val, dec_flip
    lvl_nact                  active-clause count on entry to each level
    queue, inq                FIFO of clauses to re-examine
    score, pos_occ, neg_occ   heuristic scratch
    ctl                       scalars, see the CTL_* indices
    act                       clauses not yet known satisfied; the first
                              ctl[CTL_NACT] entries are live
    opened                    scratch: open members of the clause being scored
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


CTL_TRAIL = 0
CTL_LEVEL = 1
CTL_QHEAD = 2
CTL_QLEN = 3
CTL_PHASE = 4
CTL_DECISIONS = 5
CTL_CONFLICTS = 6
CTL_NOUT = 7
CTL_COUNT = 8
CTL_BIGADD = 9
CTL_PROPS = 10
CTL_NACT = 11
CTL_SIZE = 12

PHASE_FRESH = 0
PHASE_DECIDE = 1
PHASE_BACKTRACK = 2
PHASE_DONE = 3

RET_DONE = 0
RET_MODELS = 1
RET_BUDGET = 2
RET_BIGADD = 3

MODE_ALL = 0
MODE_COUNT = 1

_WEIGHTS = np.array([math.ldexp(1.0, -f) for f in range(64)])


@njit(cache=True, inline="always")
def _status(lo, unk, m, n):
    hi = lo + unk
    if lo >= m and hi <= n:
        return 1
    if hi < m or lo > n:
        return 0
    return -1


@njit(cache=True)
def catom_status(c, T, S):
    """1 fixed-true, 0 fixed-false, -1 open."""
    return _status(S[1][c], S[2][c], T[0][c], T[1][c])


@njit(cache=True, inline="always")
def _push(queue, ctl, cl):
    # FIFO ring; a clause is queued at most once, so it never overflows
    t = ctl[CTL_QHEAD] + ctl[CTL_QLEN]
    if t >= queue.shape[0]:
        t -= queue.shape[0]
    queue[t] = cl
    ctl[CTL_QLEN] += 1


@njit(cache=True)
def enqueue_all(T, S):
    queue, inq, ctl = S[9], S[10], S[14]
    for cl in range(T[6].shape[0] - 1):
        if inq[cl] == 0:
            inq[cl] = 1
            _push(queue, ctl, cl)


@njit(cache=True, inline="always")
def assign(a, v, T, S):
    cat_lo, cat_hi = T[0], T[1]
    atom_ptr, atom_cats, cc_ptr, cc_cls, cc_mid, cc_cons = T[4], T[5], T[9], T[10], T[11], T[12]
    val, cnt_true, cnt_unk, trail = S[0], S[1], S[2], S[3]
    queue, inq, ctl = S[9], S[10], S[14]
    val[a] = v
    trail[ctl[CTL_TRAIL]] = a
    ctl[CTL_TRAIL] += 1
    ctl[CTL_PROPS] += 1
    for i in range(atom_ptr[a], atom_ptr[a + 1]):
        c = atom_cats[i]
        cnt_unk[c] -= 1
        if v == 1:
            cnt_true[c] += 1
        # skip the clauses this c-atom now satisfies: nothing to propagate
        st = _status(cnt_true[c], cnt_unk[c], cat_lo[c], cat_hi[c])
        j0 = cc_mid[c] if st == 0 else cc_ptr[c]
        j1 = cc_cons[c] if st == 1 else cc_ptr[c + 1]
        for j in range(j0, j1):
            cl = cc_cls[j]
            if inq[cl] == 0:
                inq[cl] = 1
                _push(queue, ctl, cl)


@njit(cache=True, inline="always")
def undo(pos, T, S):
    """Pop the trail down to length ``pos``."""
    atom_ptr, atom_cats = T[4], T[5]
    val, cnt_true, cnt_unk, trail, ctl = S[0], S[1], S[2], S[3], S[14]
    tl = ctl[CTL_TRAIL]
    while tl > pos:
        tl -= 1
        a = trail[tl]
        v = val[a]
        val[a] = -1
        for i in range(atom_ptr[a], atom_ptr[a + 1]):
            c = atom_cats[i]
            cnt_unk[c] += 1
            if v == 1:
                cnt_true[c] -= 1
    ctl[CTL_TRAIL] = tl


@njit(cache=True, inline="always")
def _set_unknowns(c, v, T, S):
    cat_ptr, cat_atoms = T[2], T[3]
    val = S[0]
    for i in range(cat_ptr[c], cat_ptr[c + 1]):
        a = cat_atoms[i]
        if val[a] == -1:
            assign(a, v, T, S)


@njit(cache=True, inline="always")
def force(c, want, T, S):
    """Make c-atom ``c`` true (want=1) or false (want=0) where a margin is tight."""
    cat_lo, cat_hi = T[0], T[1]
    cnt_true, cnt_unk = S[1], S[2]
    lo = cnt_true[c]
    hi = lo + cnt_unk[c]
    m = cat_lo[c]
    n = cat_hi[c]
    if want == 1:
        if lo == n:
            _set_unknowns(c, 0, T, S)
        elif hi == m:
            _set_unknowns(c, 1, T, S)
    else:
        if lo >= m:
            if hi == n + 1:
                _set_unknowns(c, 1, T, S)
        elif hi <= n and lo == m - 1:
            _set_unknowns(c, 0, T, S)


@njit(cache=True, inline="always")
def propagate(T, S):
    """Run unit propagation to fixpoint; returns False on conflict."""
    cat_lo, cat_hi = T[0], T[1]
    cl_ptr, cl_mem, cl_pol = T[6], T[7], T[8]
    cnt_true, cnt_unk = S[1], S[2]
    queue, inq, ctl = S[9], S[10], S[14]
    while ctl[CTL_QLEN] > 0:
        cl = queue[ctl[CTL_QHEAD]]
        ctl[CTL_QHEAD] += 1
        if ctl[CTL_QHEAD] == queue.shape[0]:
            ctl[CTL_QHEAD] = 0
        ctl[CTL_QLEN] -= 1
        inq[cl] = 0
        n_open = 0
        last = -1
        last_pol = 0
        sat = False
        for j in range(cl_ptr[cl], cl_ptr[cl + 1]):
            c = cl_mem[j]
            st = _status(cnt_true[c], cnt_unk[c], cat_lo[c], cat_hi[c])
            if st == -1:
                n_open += 1
                last = c
                last_pol = cl_pol[j]
            elif st == cl_pol[j]:
                sat = True
                break
        if sat:
            continue
        if n_open == 0:
            while ctl[CTL_QLEN] > 0:
                inq[queue[ctl[CTL_QHEAD]]] = 0
                ctl[CTL_QHEAD] += 1
                if ctl[CTL_QHEAD] == queue.shape[0]:
                    ctl[CTL_QHEAD] = 0
                ctl[CTL_QLEN] -= 1
            return False
        if n_open == 1:
            force(last, last_pol, T, S)
    return True


@njit(cache=True, inline="always")
def pick(T, S):
    """Branching atom, its first polarity and whether any clause is still open.

    Score of an unknown atom: sum over unsatisfied clauses of 2^-(open
    members), for every open member containing it.  Ties go to the smallest
    id.  True first iff the atom has more consequent than antecedent
    occurrences among those members.
    """
    cat_lo, cat_hi, cat_ptr, cat_atoms = T[0], T[1], T[2], T[3]
    cl_ptr, cl_mem, cl_pol = T[6], T[7], T[8]
    cnt_true, cnt_unk = S[1], S[2]
    val, score, pos_occ, neg_occ, ctl, act = S[0], S[11], S[12], S[13], S[14], S[15]
    n_atoms = val.shape[0]
    score[:] = 0.0
    pos_occ[:] = 0
    neg_occ[:] = 0
    any_open = False
    # satisfied clauses stay satisfied below this level: drop them from the
    # live prefix of ``act``; backtracking restores the saved prefix length
    nact = ctl[CTL_NACT]
    opened = S[16]
    i = 0
    while i < nact:
        cl = act[i]
        f = 0
        sat = False
        for j in range(cl_ptr[cl], cl_ptr[cl + 1]):
            c = cl_mem[j]
            st = _status(cnt_true[c], cnt_unk[c], cat_lo[c], cat_hi[c])
            if st == -1:
                opened[f] = j
                f += 1
            elif st == cl_pol[j]:
                sat = True
                break
        if sat:
            nact -= 1
            act[i] = act[nact]
            act[nact] = cl
            continue
        i += 1
        if f == 0:
            continue
        any_open = True
        w = _WEIGHTS[f] if f < _WEIGHTS.shape[0] else math.ldexp(1.0, -f)
        for t in range(f):
            j = opened[t]
            c = cl_mem[j]
            pos = cl_pol[j] == 1
            for q in range(cat_ptr[c], cat_ptr[c + 1]):
                a = cat_atoms[q]
                if val[a] == -1:
                    score[a] += w
                    if pos:
                        pos_occ[a] += 1
                    else:
                        neg_occ[a] += 1
    ctl[CTL_NACT] = nact
    best = -1
    best_score = -1.0
    for a in range(n_atoms):
        if val[a] == -1 and score[a] > best_score:
            best = a
            best_score = score[a]
    pol = 0
    if best >= 0 and pos_occ[best] > neg_occ[best]:
        pol = 1
    return best, pol, any_open


@njit(cache=True, inline="always")
def decide(a, v, T, S):
    level_start, dec_atom, dec_val, dec_flip, ctl = S[4], S[5], S[6], S[7], S[14]
    lvl = ctl[CTL_LEVEL] + 1
    ctl[CTL_LEVEL] = lvl
    level_start[lvl] = ctl[CTL_TRAIL]
    dec_atom[lvl] = a
    dec_val[lvl] = v
    dec_flip[lvl] = 0
    S[8][lvl] = ctl[CTL_NACT]
    ctl[CTL_DECISIONS] += 1
    assign(a, v, T, S)


@njit(cache=True, inline="always")
def backtrack_to(lvl, T, S):
    level_start, ctl = S[4], S[14]
    if lvl < ctl[CTL_LEVEL]:
        undo(level_start[lvl + 1], T, S)
        ctl[CTL_NACT] = S[8][lvl + 1]
        ctl[CTL_LEVEL] = lvl


@njit(cache=True)
def search(T, S, mode, out, budget):
    """Chronological backtracking search; resumable.

    ``mode`` MODE_ALL copies models (as cubes) into ``out`` until it is full;
    MODE_COUNT only counts.  Returns one of the RET_* codes.
    """
    val, level_start, dec_atom, dec_val, dec_flip, ctl = S[0], S[4], S[5], S[6], S[7], S[14]
    n_out = 0
    ctl[CTL_NOUT] = 0
    spent = 0
    phase = ctl[CTL_PHASE]
    if phase == PHASE_DONE:
        return RET_DONE
    if phase == PHASE_FRESH:
        enqueue_all(T, S)
        if not propagate(T, S):
            ctl[CTL_PHASE] = PHASE_DONE
            return RET_DONE
        ok = True
    else:
        ok = phase == PHASE_DECIDE
    while True:
        if ok:
            if spent >= budget:
                ctl[CTL_PHASE] = PHASE_DECIDE
                ctl[CTL_NOUT] = n_out
                return RET_BUDGET
            a, pol, any_open = pick(T, S)
            if mode == MODE_COUNT and not any_open:
                free = 0
                for x in range(val.shape[0]):
                    if val[x] == -1:
                        free += 1
                ok = False
                if free >= 62:
                    ctl[CTL_BIGADD] = free
                    ctl[CTL_PHASE] = PHASE_BACKTRACK
                    return RET_BIGADD
                ctl[CTL_COUNT] += 1 << free
                continue
            if a < 0 or not any_open:
                # every completion of the current assignment is a model; the
                # row is emitted as a cube with -1 marking the free atoms
                ok = False
                if mode == MODE_COUNT:
                    ctl[CTL_COUNT] += 1
                    continue
                out[n_out, :] = val
                n_out += 1
                if n_out == out.shape[0]:
                    ctl[CTL_PHASE] = PHASE_BACKTRACK
                    ctl[CTL_NOUT] = n_out
                    return RET_MODELS
                continue
            spent += 1
            decide(a, pol, T, S)
            ok = propagate(T, S)
            if not ok:
                ctl[CTL_CONFLICTS] += 1
        else:
            lvl = ctl[CTL_LEVEL]
            while lvl > 0 and dec_flip[lvl] == 1:
                lvl -= 1
            if lvl == 0:
                backtrack_to(0, T, S)
                ctl[CTL_PHASE] = PHASE_DONE
                ctl[CTL_NOUT] = n_out
                return RET_DONE if n_out == 0 else RET_MODELS
            undo(level_start[lvl], T, S)
            ctl[CTL_NACT] = S[8][lvl]
            ctl[CTL_LEVEL] = lvl
            v = 1 - dec_val[lvl]
            dec_val[lvl] = v
            dec_flip[lvl] = 1
            assign(dec_atom[lvl], v, T, S)
            ok = propagate(T, S)
            if not ok:
                ctl[CTL_CONFLICTS] += 1


def make_state(n_atoms: int, n_catoms: int, n_clauses: int, cat_sizes: np.ndarray, max_clause_len: int = 1):
    ctl = np.zeros(CTL_SIZE, dtype=np.int64)
    ctl[CTL_NACT] = n_clauses
    return (
        np.full(n_atoms, -1, dtype=np.int8),
        np.zeros(n_catoms, dtype=np.int64),
        cat_sizes.astype(np.int64).copy(),
        np.zeros(max(n_atoms, 1), dtype=np.int64),
        np.zeros(n_atoms + 2, dtype=np.int64),
        np.zeros(n_atoms + 2, dtype=np.int64),
        np.zeros(n_atoms + 2, dtype=np.int64),
        np.zeros(n_atoms + 2, dtype=np.int64),
        np.zeros(n_atoms + 2, dtype=np.int64),
        np.zeros(max(n_clauses, 1), dtype=np.int64),
        np.zeros(max(n_clauses, 1), dtype=np.int8),
        np.zeros(n_atoms, dtype=np.float64),
        np.zeros(n_atoms, dtype=np.int64),
        np.zeros(n_atoms, dtype=np.int64),
        ctl,
        np.arange(max(n_clauses, 1), dtype=np.int64),
        np.zeros(max(max_clause_len, 1), dtype=np.int64),
    )
