"""Command-line front end: ``psplus ground|solve|complete|bench|gen``.

Exit status follows the SAT-solver convention: 10 satisfiable, 20
unsatisfiable, 1 error, 0 otherwise (count mode, translation, reports).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import benchmarks as B
from .completion import parse_lp, translate
from .ground import GroundTheory, ground_texts
from .lang import PSError
from .propcore import compile_cnf
from .solver import solve

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

EXIT_SAT, EXIT_UNSAT, EXIT_ERROR, EXIT_OTHER = 10, 20, 1, 0


def _binding(text: str) -> tuple:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected name=int, got {text!r}")
    try:
        return name.strip(), int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value!r} is not an integer") from None


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_ground(args) -> int:
    data = [Path(f).read_text() for f in args.data]
    progs = [Path(f).read_text() for f in args.program]
    gt = ground_texts(data, progs, dict(args.const))
    _write(args.output, gt.to_text())
    print(f"grounded: {gt.n_atoms} atoms, {gt.n_clauses} clauses", file=sys.stderr)
    return EXIT_OTHER


def cmd_solve(args) -> int:
    gt = GroundTheory.from_text(Path(args.theory).read_text())
    if args.dimacs:
        Path(args.dimacs).write_text(compile_cnf(gt).to_dimacs())
    mode = "count" if args.count else "all" if args.all else "one"
    res = solve(gt, mode, limit=args.limit, timeout=args.timeout)
    if mode == "count":
        print(f"COUNT {res.count}" + ("" if res.complete else " (incomplete)"))
        return EXIT_OTHER
    if res.satisfiable:
        print("SAT")
        for m in res.models:
            print(" ".join(gt.model_names(m)))
        return EXIT_SAT
    if res.complete:
        print("UNSAT")
        return EXIT_UNSAT
    print("UNKNOWN")
    return EXIT_OTHER


def cmd_complete(args) -> int:
    prog = parse_lp(Path(args.program).read_text())
    _write(args.output, translate(prog))
    return EXIT_OTHER


def load_suite(path) -> tuple:
    with open(path, "rb") as f:
        cfg = tomllib.load(f)
    runs = cfg.get("run", [])
    if not isinstance(runs, list) or not runs:
        raise PSError(f"{path}: expected one or more [[run]] tables")
    for r in runs:
        if r.get("family") not in B.FAMILIES:
            raise PSError(f"{path}: unknown family {r.get('family')!r}")
    return runs, cfg.get("timeout")


def cmd_bench(args) -> int:
    runs, timeout = load_suite(args.config)
    rows = B.bench(runs, timeout=timeout)
    _write(args.output, B.format_report(rows))
    if args.json:
        Path(args.json).write_text(B.report_json(rows))
    return EXIT_OTHER


def cmd_gen(args) -> int:
    fam = args.family
    if fam == "vertex-cover":
        inst = B.gen_vertex_cover(args.n, args.m, args.k, args.seed, args.encoding)
    elif fam == "nqueens":
        inst = B.gen_nqueens(args.n)
    elif fam == "pigeonhole":
        inst = B.gen_pigeonhole(args.p, args.h)
    else:
        inst = B.gen_schur(args.n, args.k)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "data.ps").write_text(inst.data_text)
    (out / "program.ps").write_text(inst.program_text)
    if inst.bindings:
        print(" ".join(f"-c {k}={v}" for k, v in inst.bindings.items()))
    return EXIT_OTHER


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="psplus", description="Ground and solve PS+ theories.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("ground", help="ground a theory (D, P)")
    g.add_argument("-d", "--data", nargs="+", default=[], metavar="FILE")
    g.add_argument("-p", "--program", nargs="+", required=True, metavar="FILE")
    g.add_argument("-c", "--const", action="append", type=_binding, default=[], metavar="NAME=INT")
    g.add_argument("-o", "--output", default="-")
    g.set_defaults(func=cmd_ground)

    s = sub.add_parser("solve", help="solve a grounded theory")
    s.add_argument("theory")
    grp = s.add_mutually_exclusive_group()
    grp.add_argument("--all", action="store_true", help="print every model")
    grp.add_argument("--count", action="store_true", help="count models")
    s.add_argument("--limit", type=int, default=None, help="stop after this many models")
    s.add_argument("--timeout", type=float, default=None, metavar="SECONDS")
    s.add_argument("--dimacs", metavar="FILE", help="also write the CNF translation")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("complete", help="translate a normal logic program to PS+")
    c.add_argument("program")
    c.add_argument("-o", "--output", default="-")
    c.set_defaults(func=cmd_complete)

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("config")
    b.add_argument("-o", "--output", default="-")
    b.add_argument("--json", metavar="FILE", help="also write one JSON row per line")
    b.set_defaults(func=cmd_bench)

    n = sub.add_parser("gen", help="write a benchmark instance as data.ps and program.ps")
    n.add_argument("family", choices=["vertex-cover", "nqueens", "pigeonhole", "schur"])
    n.add_argument("-n", type=int, default=8)
    n.add_argument("-m", type=int, default=16, help="edges (vertex cover)")
    n.add_argument("-k", type=int, default=4)
    n.add_argument("-p", type=int, default=3, help="pigeons")
    n.add_argument("--holes", dest="h", type=int, default=2)
    n.add_argument("--seed", type=int, default=0)
    n.add_argument("--encoding", choices=["positional", "catom"], default="catom")
    n.add_argument("-o", "--outdir", default=".")
    n.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PSError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
