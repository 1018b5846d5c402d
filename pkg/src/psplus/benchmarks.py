"""Instance generators, solution extraction and a timing harness for the
benchmark families: vertex cover (two encodings), n-queens, pigeonhole and
Schur numbers."""

from __future__ import annotations

import json
import random
import re
import statistics
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .ground import GroundTheory, ground_theory
from .lang import PSError, make_theory
from .propcore import check_model, enumerate_models
from .solver import solve

FAMILIES = ("vertex-cover", "vertex-cover-catom", "nqueens", "pigeonhole", "schur")

VC_POSITIONAL = """\
vpos(I,X) -> vtx(X).
vpos(I,X) -> pos(I).
vtx(X) -> vpos(_,X).
vpos(I,X), vpos(J,X) -> I = J.
vpos(I,X), vpos(I,Y) -> X = Y.
edge(X,Y), vpos(I,X), vpos(J,Y), size(K) -> I <= K ; J <= K.
"""

VC_CATOM = """\
invc(X) -> vtx(X).
{ invc(_) } k.
edge(X,Y) -> invc(X) ; invc(Y).
"""

NQUEENS = """\
pos(R) -> q(R,_).
q(R,C) -> pos(R).
q(R,C) -> pos(C).
q(R,C1), q(R,C2) -> C1 = C2.
q(R1,C), q(R2,C) -> R1 = R2.
q(R,C), q(R + I,C + I) -> F.
q(R,C), q(R + I,C - I) -> F.
"""

PIGEONHOLE = """\
in(P,H) -> pigeon(P).
in(P,H) -> hole(H).
pigeon(P) -> 1 { in(P,_) } 1.
hole(H) -> { in(_,H) } 1.
"""

SCHUR = """\
bin(X,B) -> num(X).
bin(X,B) -> box(B).
num(X) -> 1 { bin(X,_) } 1.
bin(X,B), bin(Y,B), X <= Y, bin(X + Y,B) -> F.
"""


class SolutionError(PSError):
    """A model does not decode to a valid solution."""


@dataclass
class BenchmarkInstance:
    family: str
    params: dict
    data_text: str
    program_text: str
    bindings: dict = field(default_factory=dict)
    graph: Optional[tuple] = None  # (vertices, edges) for vertex cover

    def theory(self):
        return make_theory([self.data_text], [self.program_text], self.bindings)

    def ground(self) -> GroundTheory:
        return ground_theory(self.theory())


def _facts(pred: str, rows) -> list:
    return [f"{pred}({','.join(str(x) for x in row)})." for row in rows]


def random_graph(n: int, m: int, seed: int) -> tuple:
    """Vertices ``v1..vn`` and ``m`` distinct edges drawn uniformly."""
    pairs = list(combinations(range(1, n + 1), 2))
    if not 0 <= m <= len(pairs):
        raise ValueError(f"cannot draw {m} edges on {n} vertices")
    chosen = sorted(random.Random(seed).sample(pairs, m))
    vertices = [f"v{i}" for i in range(1, n + 1)]
    return vertices, [(f"v{a}", f"v{b}") for a, b in chosen]


def gen_vertex_cover(
    n: int,
    m_edges: int,
    k: int,
    seed: int = 0,
    encoding: str = "catom",
    graph: Optional[tuple] = None,
) -> BenchmarkInstance:
    """Vertex-cover instance in the positional or the c-atom encoding."""
    if encoding not in ("positional", "catom"):
        raise ValueError(f"unknown encoding {encoding!r}")
    if k < 0:
        raise ValueError("k must be non-negative")
    vertices, edges = graph if graph is not None else random_graph(n, m_edges, seed)
    lines = _facts("vtx", [(v,) for v in vertices]) + _facts("edge", edges)
    params = {"n": len(vertices), "m": len(edges), "k": k, "seed": seed}
    if encoding == "positional":
        lines += _facts("size", [(k,)]) + _facts("pos", [(i,) for i in range(1, len(vertices) + 1)])
        return BenchmarkInstance("vertex-cover", params, "\n".join(lines) + "\n", VC_POSITIONAL, {}, (vertices, edges))
    return BenchmarkInstance(
        "vertex-cover-catom", params, "\n".join(lines) + "\n", VC_CATOM, {"k": k}, (vertices, edges)
    )


def gen_nqueens(n: int) -> BenchmarkInstance:
    if n < 1:
        raise ValueError("n must be positive")
    data = "\n".join(_facts("pos", [(i,) for i in range(1, n + 1)])) + "\n"
    return BenchmarkInstance("nqueens", {"n": n}, data, NQUEENS)


def gen_pigeonhole(p: int, h: int) -> BenchmarkInstance:
    if p < 1 or h < 1:
        raise ValueError("p and h must be positive")
    lines = _facts("pigeon", [(i,) for i in range(1, p + 1)]) + _facts("hole", [(i,) for i in range(1, h + 1)])
    return BenchmarkInstance("pigeonhole", {"p": p, "h": h}, "\n".join(lines) + "\n", PIGEONHOLE)


def gen_schur(n: int, k: int) -> BenchmarkInstance:
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    lines = _facts("num", [(i,) for i in range(1, n + 1)]) + _facts("box", [(i,) for i in range(1, k + 1)])
    return BenchmarkInstance("schur", {"n": n, "k": k}, "\n".join(lines) + "\n", SCHUR)


# ---------------------------------------------------------------------------
# solutions

_NAME_RE = re.compile(r"^([a-z][A-Za-z0-9_]*)(?:\((.*)\))?$")


def parse_atom_name(name: str) -> tuple:
    m = _NAME_RE.match(name)
    if not m:
        raise ValueError(f"bad atom name {name!r}")
    args = m.group(2)
    vals = tuple(int(a) if re.fullmatch(r"-?\d+", a) else a for a in args.split(",")) if args else ()
    return m.group(1), vals


def _true_atoms(gt: GroundTheory, model, pred: str) -> list:
    out = []
    for i in sorted(model):
        p, args = parse_atom_name(gt.atoms[i])
        if p == pred:
            out.append(args)
    return out


def is_vertex_cover(edges, cover) -> bool:
    cover = set(cover)
    return all(a in cover or b in cover for a, b in edges)


def min_vertex_cover_size(vertices, edges) -> int:
    for k in range(len(vertices) + 1):
        for sub in combinations(vertices, k):
            if is_vertex_cover(edges, sub):
                return k
    return len(vertices)


def queens_ok(n: int, queens) -> bool:
    if len(queens) != n:
        return False
    rows = {r for r, _ in queens}
    cols = {c for _, c in queens}
    if rows != set(range(1, n + 1)) or cols != set(range(1, n + 1)):
        return False
    for (r1, c1), (r2, c2) in combinations(queens, 2):
        if abs(r1 - r2) == abs(c1 - c2):
            return False
    return True


def schur_ok(n: int, k: int, bins: dict) -> bool:
    if sorted(bins) != list(range(1, n + 1)) or not all(1 <= b <= k for b in bins.values()):
        return False
    for x in range(1, n + 1):
        for y in range(x, n + 1 - x):
            if bins[x] == bins[y] == bins[x + y]:
                return False
    return True


def extract_solution(inst: BenchmarkInstance, gt: GroundTheory, model):
    """Decode a model into a solution and re-verify it directly.

    Raises :class:`SolutionError` when the decoded solution violates the
    problem's own constraint.
    """
    fam = inst.family
    if fam == "vertex-cover":
        k = inst.params["k"]
        cover = sorted({x for i, x in _true_atoms(gt, model, "vpos") if isinstance(i, int) and i <= k})
        if len(cover) > k or not is_vertex_cover(inst.graph[1], cover):
            raise SolutionError(f"not a vertex cover of size <= {k}: {cover}")
        return cover
    if fam == "vertex-cover-catom":
        k = inst.params["k"]
        cover = sorted(x for (x,) in _true_atoms(gt, model, "invc"))
        if len(cover) > k or not is_vertex_cover(inst.graph[1], cover):
            raise SolutionError(f"not a vertex cover of size <= {k}: {cover}")
        return cover
    if fam == "nqueens":
        n = inst.params["n"]
        queens = sorted(_true_atoms(gt, model, "q"))
        if not queens_ok(n, queens):
            raise SolutionError(f"queens attack each other: {queens}")
        return queens
    if fam == "pigeonhole":
        p, h = inst.params["p"], inst.params["h"]
        placed = _true_atoms(gt, model, "in")
        where = dict(placed)
        if (
            len(placed) != p
            or sorted(where) != list(range(1, p + 1))
            or len(set(where.values())) != p
            or not all(1 <= x <= h for x in where.values())
        ):
            raise SolutionError(f"bad pigeon placement: {placed}")
        return where
    if fam == "schur":
        n, k = inst.params["n"], inst.params["k"]
        pairs = _true_atoms(gt, model, "bin")
        bins = dict(pairs)
        if len(pairs) != n or not schur_ok(n, k, bins):
            raise SolutionError(f"not a sum-free placement: {pairs}")
        return bins
    raise ValueError(f"unknown family {fam!r}")


def format_solution(inst: BenchmarkInstance, sol) -> str:
    if inst.family == "nqueens":
        n = inst.params["n"]
        cells = set(sol)
        return "\n".join("".join("Q" if (r, c) in cells else "." for c in range(1, n + 1)) for r in range(1, n + 1))
    if inst.family == "schur":
        by_bin: dict = {}
        for x, b in sorted(sol.items()):
            by_bin.setdefault(b, []).append(x)
        return "\n".join(f"bin {b}: {' '.join(map(str, xs))}" for b, xs in sorted(by_bin.items()))
    if inst.family == "pigeonhole":
        return " ".join(f"{p}->{h}" for p, h in sorted(sol.items()))
    return " ".join(map(str, sol))


# ---------------------------------------------------------------------------
# running


@dataclass
class RunOutcome:
    status: str
    gt: GroundTheory
    seconds: float
    ground_seconds: float
    solution: object = None
    count: Optional[int] = None
    decisions: int = 0


def run_instance(inst: BenchmarkInstance, mode: str = "one", timeout: Optional[float] = None) -> RunOutcome:
    """Ground and solve; decode and check the solution when one is found."""
    t0 = time.perf_counter()
    gt = inst.ground()
    t1 = time.perf_counter()
    res = solve(gt, mode, timeout=timeout)
    t2 = time.perf_counter()
    sol = None
    if res.models:
        if not check_model(gt, res.models[0]):
            raise SolutionError("solver returned a non-model")
        sol = extract_solution(inst, gt, res.models[0])
    elif res.complete and mode != "count" and gt.n_atoms <= 16:
        if enumerate_models(gt):
            raise SolutionError("solver reported UNSAT on a satisfiable theory")
    return RunOutcome(res.status, gt, t2 - t1, t1 - t0, sol, res.count, res.decisions)


def min_cover_by_solver(n, m, seed, encoding, graph=None) -> int:
    """Smallest k for which the solver finds a cover (k iterated upward)."""
    graph = graph or random_graph(n, m, seed)
    for k in range(len(graph[0]) + 1):
        inst = gen_vertex_cover(n, m, k, seed, encoding, graph=graph)
        if run_instance(inst).status == "SAT":
            return k
    raise SolutionError("no cover found even with all vertices")


def make_instance(spec: dict) -> BenchmarkInstance:
    fam = spec["family"]
    if fam in ("vertex-cover", "vertex-cover-catom"):
        enc = "positional" if fam == "vertex-cover" else "catom"
        return gen_vertex_cover(spec["n"], spec["m"], spec["k"], spec.get("seed", 0), enc)
    if fam == "nqueens":
        return gen_nqueens(spec["n"])
    if fam == "pigeonhole":
        return gen_pigeonhole(spec["p"], spec["h"])
    if fam == "schur":
        return gen_schur(spec["n"], spec["k"])
    raise ValueError(f"unknown family {fam!r}")


def _label(spec: dict) -> str:
    keys = [k for k in ("n", "m", "k", "p", "h", "graphs", "seed") if k in spec]
    return " ".join(f"{k}={spec[k]}" for k in keys)


def bench(runs: list, timeout: Optional[float] = None) -> list:
    """Run every entry of ``runs`` and return one report row per entry.

    Vertex-cover entries may set ``k = "min"`` and ``graphs = N``: the
    minimum cover size k_G of each of N seeded graphs is found with the
    solver and the row reports the mean time at k_G.
    """
    rows = []
    for spec in runs:
        mode = spec.get("mode", "one")
        t_limit = spec.get("timeout", timeout)
        fam = spec["family"]
        if fam.startswith("vertex-cover") and (spec.get("k") == "min" or "graphs" in spec):
            enc = "positional" if fam == "vertex-cover" else "catom"
            times, atoms, clauses, ks = [], [], [], []
            base = spec.get("seed", 0)
            for g in range(spec.get("graphs", 1)):
                seed = base + g
                graph = random_graph(spec["n"], spec["m"], seed)
                k = min_cover_by_solver(spec["n"], spec["m"], seed, enc, graph) if spec.get("k", "min") == "min" else spec["k"]
                out = run_instance(gen_vertex_cover(spec["n"], spec["m"], k, seed, enc, graph=graph), mode, t_limit)
                times.append(out.seconds)
                atoms.append(out.gt.n_atoms)
                clauses.append(out.gt.n_clauses)
                ks.append(k)
            rows.append(
                {
                    "family": fam,
                    "params": _label(spec),
                    "status": "SAT",
                    "atoms": round(statistics.mean(atoms), 1),
                    "clauses": round(statistics.mean(clauses), 1),
                    "result": f"mean k_G={statistics.mean(ks):.2f}",
                    "seconds": statistics.mean(times),
                }
            )
            continue
        inst = make_instance(spec)
        out = run_instance(inst, mode, t_limit)
        result = ""
        if mode == "count":
            result = f"count={out.count}"
        elif out.status == "SAT":
            result = "verified"
        rows.append(
            {
                "family": fam,
                "params": _label(spec),
                "status": out.status,
                "atoms": out.gt.n_atoms,
                "clauses": out.gt.n_clauses,
                "result": result,
                "seconds": out.seconds,
            }
        )
    return rows


def format_report(rows: list) -> str:
    cols = ["family", "params", "status", "atoms", "clauses", "result", "seconds"]
    cells = [[str(r[c]) if c != "seconds" else f"{r[c]:.3f}" for c in cols] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def report_json(rows: list) -> str:
    return "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
