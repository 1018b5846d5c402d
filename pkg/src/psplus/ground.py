"""Grounding of PS+ theories into propositional PS+ theories.

Variables range over every constant of the theory.  Data atoms and
predefined atoms are evaluated while grounding, so the output mentions
program atoms only.  Every ordinary atom ``p`` becomes the c-atom
``1{p}1`` and every existential atom becomes ``1{b(s1),...,b(sk)}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .lang import (
    DATA,
    INT64_MAX,
    INT64_MIN,
    PREDEFINED,
    PROGRAM,
    App,
    Atom,
    CAtom,
    Const,
    ExtendedClause,
    Int,
    PSError,
    Theory,
    Underscore,
    Var,
    term_value,
)


class GroundingError(PSError):
    pass


@dataclass(frozen=True)
class GroundCAtom:
    """Propositional c-atom ``lower {atoms} upper``; ``None`` marks a missing bound."""

    lower: Optional[int]
    atoms: tuple
    upper: Optional[int]

    @property
    def lo(self) -> int:
        return 0 if self.lower is None else self.lower

    @property
    def hi(self) -> int:
        return len(self.atoms) if self.upper is None else self.upper

    def describe(self, names: Sequence[str]) -> str:
        lo = "" if self.lower is None else str(self.lower)
        hi = "" if self.upper is None else str(self.upper)
        return f"{lo}{{{','.join(names[a] for a in self.atoms)}}}{hi}"


def atom_catom(atom_id: int) -> GroundCAtom:
    return GroundCAtom(1, (atom_id,), 1)


@dataclass(frozen=True)
class GroundClause:
    antecedent: tuple = ()
    consequent: tuple = ()


def format_atom(pred: str, args: tuple) -> str:
    if not args:
        return pred
    return f"{pred}({','.join(str(a) for a in args)})"


class AtomTable:
    """Dense interning of ground program atoms."""

    def __init__(self):
        self.keys: list = []
        self.names: list = []
        self.index: dict = {}

    def __len__(self) -> int:
        return len(self.keys)

    def intern(self, pred: str, args: tuple) -> int:
        key = (pred, args)
        i = self.index.get(key)
        if i is None:
            i = len(self.keys)
            self.index[key] = i
            self.keys.append(key)
            self.names.append(format_atom(pred, args))
        return i


class GroundTheory:
    """A propositional PS+ theory.

    C-atoms are interned: ``catoms`` holds each distinct c-atom once and a
    clause is a pair of tuples of c-atom indices.
    """

    def __init__(self, atoms: Sequence[str] = (), catoms=(), clauses=(), data=()):
        self.atoms = list(atoms)
        self.catoms = list(catoms)
        self.clauses = [(tuple(a), tuple(c)) for a, c in clauses]
        self.data = list(data)
        self._catom_index = {c: i for i, c in enumerate(self.catoms)}

    @classmethod
    def from_clauses(cls, n_atoms: int, clauses: Iterable[GroundClause], names=None, data=()):
        gt = cls(names or [f"x{i}" for i in range(n_atoms)], data=data)
        for cl in clauses:
            gt.add_clause(cl.antecedent, cl.consequent)
        return gt

    def catom_id(self, c: GroundCAtom) -> int:
        i = self._catom_index.get(c)
        if i is None:
            i = len(self.catoms)
            self._catom_index[c] = i
            self.catoms.append(c)
        return i

    def add_clause(self, antecedent: Iterable[GroundCAtom], consequent: Iterable[GroundCAtom]) -> None:
        self.clauses.append(
            (tuple(self.catom_id(c) for c in antecedent), tuple(self.catom_id(c) for c in consequent))
        )

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def clause(self, i: int) -> GroundClause:
        a, c = self.clauses[i]
        return GroundClause(tuple(self.catoms[j] for j in a), tuple(self.catoms[j] for j in c))

    def iter_clauses(self):
        for i in range(len(self.clauses)):
            yield self.clause(i)

    def atom_id(self, name: str) -> int:
        return self.atoms.index(name)

    def model_names(self, model: Iterable[int], with_data: bool = True) -> list[str]:
        names = [self.atoms[i] for i in sorted(model)]
        return (list(self.data) + names) if with_data else names

    def describe_clause(self, i: int) -> str:
        cl = self.clause(i)
        ante = " & ".join(c.describe(self.atoms) for c in cl.antecedent) or "T"
        cons = " | ".join(c.describe(self.atoms) for c in cl.consequent) or "F"
        return f"{ante} => {cons}"

    # grounded-theory text format

    def to_text(self) -> str:
        out = [f"p gnd {len(self.atoms)} {len(self.clauses)}"]
        out += [f"a {i} {name}" for i, name in enumerate(self.atoms)]
        out += [f"d {name}" for name in self.data]
        for c in self.catoms:
            lo = "*" if c.lower is None else str(c.lower)
            hi = "*" if c.upper is None else str(c.upper)
            out.append(" ".join(["c", lo, hi, str(len(c.atoms))] + [str(a) for a in c.atoms]))
        for a, c in self.clauses:
            out.append(" ".join(["r", str(len(a)), str(len(c))] + [str(x) for x in a + c]))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GroundTheory":
        header = None
        names: list = []
        data: list = []
        catoms: list = []
        clauses: list = []
        for lineno, line in enumerate(text.splitlines(), 1):
            f = line.split()
            if not f:
                continue
            try:
                tag = f[0]
                if tag == "p":
                    if f[1] != "gnd" or len(f) != 4:
                        raise ValueError("bad header")
                    header = (int(f[2]), int(f[3]))
                elif tag == "a":
                    if int(f[1]) != len(names) or len(f) != 3:
                        raise ValueError("atom ids must be dense and in order")
                    names.append(f[2])
                elif tag == "d":
                    data.append(f[1])
                elif tag == "c":
                    k = int(f[3])
                    ids = tuple(int(x) for x in f[4:])
                    if len(ids) != k or any(not 0 <= x < len(names) for x in ids):
                        raise ValueError("bad c-atom")
                    lo = None if f[1] == "*" else int(f[1])
                    hi = None if f[2] == "*" else int(f[2])
                    catoms.append(GroundCAtom(lo, ids, hi))
                elif tag == "r":
                    s, t = int(f[1]), int(f[2])
                    idx = [int(x) for x in f[3:]]
                    if len(idx) != s + t or any(not 0 <= x < len(catoms) for x in idx):
                        raise ValueError("bad clause")
                    clauses.append((tuple(idx[:s]), tuple(idx[s:])))
                else:
                    raise ValueError(f"unknown line type {tag!r}")
            except (ValueError, IndexError) as e:
                raise PSError(f"line {lineno}: {e}") from None
        if header is None:
            raise PSError("missing 'p gnd' header")
        if header != (len(names), len(clauses)):
            raise PSError(f"header announces {header}, found {(len(names), len(clauses))}")
        return cls(names, catoms, clauses, data)


# ---------------------------------------------------------------------------
# evaluation of predefined symbols

_FAIL = object()


def _checked(v: int) -> int:
    if not INT64_MIN <= v <= INT64_MAX:
        raise GroundingError(f"integer overflow: {v}")
    return v


def eval_term(t, sub: Mapping[str, object]):
    """Value of a term under ``sub``; ``None`` if an operand has the wrong type."""
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Var):
        return sub[t.name]
    if isinstance(t, App):
        vals = [eval_term(a, sub) for a in t.args]
        if any(v is None or not isinstance(v, int) for v in vals):
            return None
        if t.op == "abs":
            return _checked(abs(vals[0]))
        x, y = vals
        if t.op == "+":
            return _checked(x + y)
        if t.op == "-":
            return _checked(x - y)
        if t.op == "*":
            return _checked(x * y)
        if t.op == "mod":
            return None if y == 0 else x % y
    raise GroundingError(f"cannot evaluate {t}")


def compare(op: str, x, y) -> bool:
    if op == "=":
        return type(x) is type(y) and x == y
    if op == "!=":
        return not (type(x) is type(y) and x == y)
    if not (isinstance(x, int) and isinstance(y, int)):
        return False
    if op == "<":
        return x < y
    if op == "<=":
        return x <= y
    if op == ">":
        return x > y
    return x >= y


def eval_predefined(a, constants: Iterable, sub: Optional[Mapping] = None):
    """Evaluate a ground comparison (``bool``) or arithmetic term (value or ``False``).

    A value outside ``constants`` or an ill-typed operand makes the result false.
    """
    consts = constants if isinstance(constants, (set, frozenset, dict)) else set(constants)
    sub = sub or {}
    if isinstance(a, Atom):
        if a.kind != PREDEFINED:
            raise GroundingError(f"{a} is not a predefined atom")
        x, y = (eval_term(t, sub) for t in a.args)
        if x is None or y is None or x not in consts or y not in consts:
            return False
        return compare(a.pred, x, y)
    v = eval_term(a, sub)
    if v is None or v not in consts:
        return False
    return v


# ---------------------------------------------------------------------------
# instantiation of atoms


def _arg_values(atom: Atom, sub, consts):
    """Tuple of argument values, or ``None`` if some argument is invalid."""
    out = []
    for t in atom.args:
        if isinstance(t, Const):
            out.append(t.name)
        elif isinstance(t, Int):
            out.append(t.value)
        elif isinstance(t, Var):
            out.append(sub[t.name])
        elif isinstance(t, Underscore):
            out.append(None)
        else:
            v = eval_term(t, sub)
            if v is None or v not in consts:
                return None
            out.append(v)
    return tuple(out)


def _expansions(atom: Atom, sub, constants: Sequence, consts) -> list:
    """All argument tuples obtained by replacing underscores with constants."""
    vals = _arg_values(atom, sub, consts)
    if vals is None:
        return []
    holes = [i for i, v in enumerate(atom.args) if isinstance(v, Underscore)]
    if not holes:
        return [vals]
    out = []
    base = list(vals)
    for combo in itertools.product(constants, repeat=len(holes)):
        for i, c in zip(holes, combo):
            base[i] = c
        out.append(tuple(base))
    return out


def expand_existential(b: Atom, sub: Mapping, constants: Sequence, table: Optional[AtomTable] = None) -> GroundCAtom:
    """The disjunction of all underscore replacements of ``b`` as ``1{...}``."""
    table = table if table is not None else AtomTable()
    seen: dict = {}
    for args in _expansions(b, sub, constants, set(constants)):
        seen.setdefault(table.intern(b.pred, args), None)
    return GroundCAtom(1, tuple(seen), None)


def instantiate_catom(
    c: CAtom,
    sub: Mapping,
    constants: Sequence,
    table: Optional[AtomTable] = None,
    bindings: Optional[Mapping[str, int]] = None,
) -> GroundCAtom:
    """Ground a c-atom: every underscore replacement, bounds resolved to integers."""
    table = table if table is not None else AtomTable()
    seen: dict = {}
    for args in _expansions(c.inner, sub, constants, set(constants)):
        seen.setdefault(table.intern(c.inner.pred, args), None)
    return GroundCAtom(_bound(c.lower, bindings), tuple(seen), _bound(c.upper, bindings))


def _bound(b, bindings) -> Optional[int]:
    if b is None:
        return None
    if isinstance(b, str):
        if not bindings or b not in bindings:
            raise GroundingError(f"unresolved bound {b!r}")
        b = int(bindings[b])
    if b < 0:
        raise GroundingError(f"negative c-atom bound {b}")
    return b


# ---------------------------------------------------------------------------
# the grounder

_TRUE = 1
_FALSE = 0


class _Member:
    """One clause member compiled for evaluation at a fixed enumeration depth."""

    __slots__ = ("index", "node", "in_ante", "ready", "kind", "var_pos")

    def __init__(self, index, node, in_ante, ready, var_pos=()):
        self.index = index
        self.var_pos = var_pos
        self.node = node
        self.in_ante = in_ante
        self.ready = ready
        if isinstance(node, CAtom):
            self.kind = "catom"
        elif node.kind == PREDEFINED:
            self.kind = "pre"
        elif node.kind == DATA:
            self.kind = "data"
        else:
            self.kind = "prog"


class Grounder:
    def __init__(self, theory: Theory):
        self.theory = theory
        self.constants = list(theory.constants)
        self.consts = set(self.constants)
        self.rank = {c: i for i, c in enumerate(self.constants)}
        self.data_keys = set()
        self.data_tuples: dict = {}
        for a in theory.data:
            vals = tuple(term_value(t) for t in a.args)
            self.data_keys.add((a.pred, vals))
            self.data_tuples.setdefault(a.pred, []).append(vals)
        self.table = AtomTable()
        self.gt = GroundTheory(data=[str(a) for a in theory.data])
        self._candidate_cache: dict = {}

    def run(self) -> GroundTheory:
        for clause in self.theory.program:
            self.ground_clause(clause)
        # the rest of the Herbrand base: atoms that occur in no clause are
        # unconstrained but still belong to every model's universe
        for pred, arity in self._program_predicates().items():
            for args in itertools.product(self.constants, repeat=arity):
                self.table.intern(pred, args)
        self.gt.atoms = self.table.names
        return self.gt

    def _program_predicates(self) -> dict:
        out: dict = {}
        for clause in self.theory.program:
            for m in clause.antecedent + clause.consequent:
                a = m.inner if isinstance(m, CAtom) else m
                if a.kind == PROGRAM:
                    out.setdefault(a.pred, a.arity)
        return out

    # member evaluation: returns _TRUE, _FALSE or a GroundCAtom

    def _eval(self, m: _Member, sub):
        node = m.node
        if m.kind == "pre":
            x = eval_term(node.args[0], sub)
            y = eval_term(node.args[1], sub)
            if x is None or y is None or x not in self.consts or y not in self.consts:
                return _FALSE
            return _TRUE if compare(node.pred, x, y) else _FALSE
        if m.kind == "data":
            for args in _expansions(node, sub, self.constants, self.consts):
                if (node.pred, args) in self.data_keys:
                    return _TRUE
            return _FALSE
        if m.kind == "prog":
            exps = _expansions(node, sub, self.constants, self.consts)
            if not exps:
                return _FALSE
            if node.has_underscore:
                return (1, node.pred, exps, None)
            return (1, node.pred, exps, 1)
        # c-atom
        exps = list(dict.fromkeys(_expansions(node.inner, sub, self.constants, self.consts)))
        lo = _bound(node.lower, self.theory.bindings)
        hi = _bound(node.upper, self.theory.bindings)
        k = len(exps)
        lo_v = 0 if lo is None else lo
        hi_v = k if hi is None else hi
        if lo_v > hi_v or lo_v > k:
            return _FALSE
        if lo_v <= 0 and hi_v >= k:
            return _TRUE
        return (lo, node.inner.pred, exps, hi)

    def _candidates(self, plan, depth, values):
        """Values for the variable at ``depth`` allowed by antecedent data atoms."""
        restr = plan[depth]
        if not restr:
            return self.constants
        allowed = None
        for ai, positions in restr:
            key = (positions, tuple(values[j] for _, kind, j, _ in positions if kind == "var"))
            s = self._candidate_cache.get(key)
            if s is None:
                s = set()
                for tup in self.data_tuples.get(positions[0][3], ()):
                    ok = True
                    val = _FAIL
                    for pos, kind, j, _ in positions:
                        v = tup[pos]
                        if kind == "const":
                            ok = v == j
                        elif kind == "var":
                            ok = v == values[j]
                        elif val is _FAIL:
                            val = v
                        else:
                            ok = v == val
                        if not ok:
                            break
                    if ok and val is not _FAIL:
                        s.add(val)
                self._candidate_cache[key] = s
            allowed = s if allowed is None else allowed & s
        return [c for c in self.constants if c in allowed]

    def _plan(self, clause: ExtendedClause, variables):
        pos_of = {v: i for i, v in enumerate(variables)}
        plan = [[] for _ in variables]
        for ai, a in enumerate(clause.antecedent):
            if isinstance(a, CAtom) or a.kind != DATA:
                continue
            for d, v in enumerate(variables):
                if not any(isinstance(t, Var) and t.name == v for t in a.args):
                    continue
                positions = []
                for p, t in enumerate(a.args):
                    if isinstance(t, (Const, Int)):
                        positions.append((p, "const", term_value(t), a.pred))
                    elif isinstance(t, Var) and t.name == v:
                        positions.append((p, "self", None, a.pred))
                    elif isinstance(t, Var) and pos_of[t.name] < d:
                        positions.append((p, "var", pos_of[t.name], a.pred))
                # "self" entries first so positions[0][3] is always set
                positions.sort(key=lambda e: e[1] != "self")
                plan[d].append((ai, tuple(positions)))
        return plan

    def ground_clause(self, clause: ExtendedClause) -> None:
        variables = clause.variables()
        pos_of = {v: i for i, v in enumerate(variables)}
        members = []
        for i, m in enumerate(clause.antecedent + clause.consequent):
            var_pos = tuple(sorted({pos_of[v] for v in m.variables()}))
            ready = var_pos[-1] + 1 if var_pos else 0
            members.append(_Member(i, m, i < len(clause.antecedent), ready, var_pos))
        by_depth = [[] for _ in range(len(variables) + 1)]
        for m in members:
            by_depth[m.ready].append(m)
        plan = self._plan(clause, variables)
        results = [None] * len(members)
        values = [None] * len(variables)
        sub: dict = {}
        keys = [None] * len(members)
        n_ante = len(clause.antecedent)
        nvars = len(variables)
        # a member's value depends only on its own variables, so evaluations
        # and c-atom ids are memoised per (member, values of those variables);
        # interning still happens at first emission, keeping atom order
        evals = [{} for _ in members]
        cids = [{} for _ in members]

        def check(depth) -> bool:
            for m in by_depth[depth]:
                key = tuple(values[j] for j in m.var_pos)
                memo = evals[m.index]
                r = memo.get(key)
                if r is None:
                    r = memo[key] = self._eval(m, sub)
                if m.in_ante:
                    if r is _FALSE:
                        return False
                elif r is _TRUE:
                    return False
                results[m.index] = r
                keys[m.index] = key
            return True

        def emit():
            ante, cons = [], []
            for i, r in enumerate(results):
                if r is _TRUE or r is _FALSE:
                    continue
                memo = cids[i]
                c = memo.get(keys[i])
                if c is None:
                    lo, pred, exps, hi = r
                    ids = tuple(dict.fromkeys(self.table.intern(pred, args) for args in exps))
                    c = memo[keys[i]] = self.gt.catom_id(GroundCAtom(lo, ids, hi))
                (ante if i < n_ante else cons).append(c)
            self.gt.clauses.append((tuple(dict.fromkeys(ante)), tuple(dict.fromkeys(cons))))

        def rec(depth):
            if depth == nvars:
                emit()
                return
            name = variables[depth]
            for c in self._candidates(plan, depth, values):
                values[depth] = c
                sub[name] = c
                if check(depth + 1):
                    rec(depth + 1)
            values[depth] = None
            sub.pop(name, None)

        if check(0):
            rec(0)


def ground_theory(theory: Theory) -> GroundTheory:
    """Ground ``theory`` into a propositional PS+ theory.

    Clauses come out in program order, and instances of one clause in
    lexicographic order of the substitution (variables by first occurrence,
    constants in table order).
    """
    return Grounder(theory).run()


def ground_texts(data_texts=(), program_texts=(), bindings=None) -> GroundTheory:
    from .lang import make_theory

    return ground_theory(make_theory(data_texts, program_texts, bindings))
