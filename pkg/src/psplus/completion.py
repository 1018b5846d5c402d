"""Normal logic programs, their Clark completion, and the clausal PS+ theory
T(P) whose models restricted to the program's atoms are exactly the
supported models of D ∪ P."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional

import numpy as np

from .ground import compare, eval_term, format_atom, ground_texts
from .lang import (
    PREDEFINED,
    PROGRAM,
    Atom,
    Const,
    Int,
    ParseError,
    PSError,
    Var,
    _Parser,
    parse_data,
    term_value,
    term_vars,
)
from .propcore import model_matrix
from .solver import model_array

HB_GUARD = 20


class NormalFormError(PSError):
    pass


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"not {self.atom}"


@dataclass(frozen=True)
class NormalRule:
    head: Atom
    body: tuple = ()  # Literal

    @property
    def head_vars(self) -> tuple:
        return tuple(t.name for t in self.head.args)

    @property
    def local_vars(self) -> tuple:
        """Variables of the body that are not in the head (Y_r), first occurrence."""
        seen = dict.fromkeys(self.head_vars)
        out: dict = {}
        for lit in self.body:
            for t in lit.atom.args:
                for v in term_vars(t):
                    if v not in seen:
                        out.setdefault(v, None)
        return tuple(out)

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(l) for l in self.body)}."


@dataclass
class NormalProgram:
    rules: list
    signature: dict = field(default_factory=dict)  # extra predicates not mentioned by any rule

    def __post_init__(self):
        self.arities = dict(self.signature)
        for r in self.rules:
            for a in [r.head] + [l.atom for l in r.body]:
                if a.kind == PREDEFINED:
                    continue
                if self.arities.setdefault(a.pred, a.arity) != a.arity:
                    raise NormalFormError(f"predicate {a.pred} used with two arities")
        check_normal_form(self)

    @property
    def predicates(self) -> list:
        """Pr: every non-predefined predicate, first-occurrence order."""
        return list(self.arities)

    @property
    def defined(self) -> list:
        heads = {r.head.pred for r in self.rules}
        return [p for p in self.arities if p in heads]

    @property
    def inputs(self) -> list:
        """Pr': predicates with no defining rule."""
        heads = {r.head.pred for r in self.rules}
        return [p for p in self.arities if p not in heads]

    def rules_for(self, pred: str) -> list:
        return [r for r in self.rules if r.head.pred == pred]

    def constants(self) -> list:
        out: dict = {}
        for r in self.rules:
            for a in [r.head] + [l.atom for l in r.body]:
                for t in a.args:
                    _collect(t, out)
        return list(out)

    def __str__(self) -> str:
        return "\n".join(str(r) for r in self.rules) + ("\n" if self.rules else "")


def _collect(t, out: dict) -> None:
    if isinstance(t, (Int, Const)):
        out.setdefault(term_value(t), None)
    elif hasattr(t, "args"):
        for x in t.args:
            _collect(x, out)


def check_normal_form(prog: NormalProgram) -> None:
    heads: dict = {}
    for r in prog.rules:
        h = r.head
        if h.kind == PREDEFINED:
            raise NormalFormError(f"predefined predicate {h.pred} in a rule head")
        if not all(isinstance(t, Var) for t in h.args):
            raise NormalFormError(f"head {h} has a non-variable argument")
        names = r.head_vars
        if len(set(names)) != len(names):
            raise NormalFormError(f"head {h} repeats a variable")
        if heads.setdefault(h.pred, names) != names:
            raise NormalFormError(f"rules for {h.pred} use different head variables")
        for lit in r.body:
            if any(t.__class__.__name__ == "Underscore" for t in lit.atom.args):
                raise NormalFormError(f"underscore in rule body of {r}")


# ---------------------------------------------------------------------------
# parsing `head :- b1, ..., not c1, ... .`


class _LPParser(_Parser):
    def literal(self) -> Literal:
        positive = True
        if self.tok.kind == "name" and self.tok.text == "not" and self.peek().kind == "name":
            self.next()
            positive = False
        a = self.atom_or_comparison()
        if a.kind != PREDEFINED:
            a = Atom(a.pred, a.args, PROGRAM)
        return Literal(a, positive)

    def rule(self) -> NormalRule:
        start = self.tok
        head = self.literal()
        if not head.positive or head.atom.kind == PREDEFINED:
            raise self.error("rule head must be an ordinary atom", start)
        body = []
        if self.at(":-"):
            self.next()
            body.append(self.literal())
            while self.at(","):
                self.next()
                body.append(self.literal())
        self.expect(".")
        return NormalRule(head.atom, tuple(body))


def parse_lp(text: str, signature: Optional[dict] = None) -> NormalProgram:
    p = _LPParser(text)
    rules = []
    while p.tok.kind != "eof":
        rules.append(p.rule())
    try:
        return NormalProgram(rules, dict(signature or {}))
    except NormalFormError as e:
        raise ParseError(str(e)) from None


# ---------------------------------------------------------------------------
# completion as formulas


@dataclass(frozen=True)
class Formula:
    op: str  # atom, not, and, or, exists, iff, true, false
    args: tuple = ()
    atom: Optional[Atom] = None
    vars: tuple = ()

    def __str__(self) -> str:
        if self.op == "atom":
            return str(self.atom)
        if self.op == "true":
            return "T"
        if self.op == "false":
            return "F"
        if self.op == "not":
            return f"¬{self.args[0]}"
        if self.op == "exists":
            return f"∃{','.join(self.vars)} ({self.args[0]})"
        sym = {"and": " ∧ ", "or": " ∨ ", "iff": " ⇔ "}[self.op]
        parts = [str(a) if a.op in ("atom", "not", "true", "false", "exists") else f"({a})" for a in self.args]
        return sym.join(parts)


def _lit_formula(l: Literal) -> Formula:
    f = Formula("atom", atom=l.atom)
    return f if l.positive else Formula("not", (f,))


def _conj(fs: list) -> Formula:
    if not fs:
        return Formula("true")
    return fs[0] if len(fs) == 1 else Formula("and", tuple(fs))


def _disj(fs: list) -> Formula:
    if not fs:
        return Formula("false")
    return fs[0] if len(fs) == 1 else Formula("or", tuple(fs))


def _head_atom(prog: NormalProgram, pred: str) -> Atom:
    rules = prog.rules_for(pred)
    if rules:
        return rules[0].head
    return Atom(pred, tuple(Var(f"X{i + 1}") for i in range(prog.arities[pred])), PROGRAM)


def clark_completion(prog: NormalProgram) -> list:
    """cc(p) for every predicate p of the program; undefined ones complete to F."""
    out = []
    for pred in prog.predicates:
        disjuncts = []
        for r in prog.rules_for(pred):
            body = _conj([_lit_formula(l) for l in r.body])
            ys = r.local_vars
            disjuncts.append(Formula("exists", (body,), vars=ys) if ys else body)
        out.append(Formula("iff", (Formula("atom", atom=_head_atom(prog, pred)), _disj(disjuncts))))
    return out


# ---------------------------------------------------------------------------
# T(P)


def aux_names(prog: NormalProgram) -> list:
    """One fresh predicate name per rule, never clashing with the program's."""
    taken = set(prog.arities)
    names = []
    for i, r in enumerate(prog.rules, 1):
        base = f"d_{r.head.pred}_{i}"
        while base in taken:
            base = "d" + base
        taken.add(base)
        names.append(base)
    return names


def _atom_text(pred: str, args) -> str:
    return pred if not args else f"{pred}({','.join(args)})"


def translate(prog: NormalProgram) -> str:
    """The clausal PS+ program T(P) as text.

    Input predicates (Pr') are declared ``data``; for each rule r of a defined
    predicate the fresh predicate d_r carries the head variables followed by
    the body-only variables.
    """
    lines = [f"data {p}/{prog.arities[p]}." for p in prog.inputs]
    names = aux_names(prog)
    for r, d in zip(prog.rules, names):
        dv = r.head_vars + r.local_vars
        d_atom = _atom_text(d, dv)
        pos = [str(l.atom) for l in r.body if l.positive]
        neg = [str(l.atom) for l in r.body if not l.positive]
        lines.append(f"% {r}")
        # d_r(X,Y) => B(r)
        for a in pos:
            lines.append(f"{d_atom} -> {a}.")
        for a in neg:
            lines.append(f"{d_atom}, {a} -> F.")
        # B(r) => d_r(X,Y), negative literals moved to the consequent
        cons = " ; ".join([d_atom] + neg)
        lines.append(f"{', '.join(pos)} -> {cons}." if pos else f"{cons}.")
    for pred in prog.defined:
        head = _head_atom(prog, pred)
        hv = tuple(t.name for t in head.args)
        alts = []
        for r, d in zip(prog.rules, names):
            if r.head.pred != pred:
                continue
            lines.append(f"{_atom_text(d, hv + r.local_vars)} -> {head}.")
            alts.append(_atom_text(d, hv + ("_",) * len(r.local_vars)))
        lines.append(f"{head} -> {' ; '.join(alts)}.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# supported models


def _data_atoms(data) -> list:
    if isinstance(data, str):
        return parse_data(data)
    return [parse_data(d)[0] if isinstance(d, str) else d for d in data]


def _universe(prog: NormalProgram, data: list) -> list:
    out: dict = {}
    for a in data:
        for t in a.args:
            out.setdefault(term_value(t), None)
    for c in prog.constants():
        out.setdefault(c, None)
    return list(out)


def _check_data(prog: NormalProgram, data: list) -> None:
    inputs = set(prog.inputs)
    for a in data:
        if a.pred not in inputs:
            raise PSError(f"data atom {a} is not over an input predicate")
        if prog.arities[a.pred] != a.arity:
            raise PSError(f"data atom {a} has the wrong arity")


def _ground_value(t, sub, consts):
    v = eval_term(t, sub)
    return v if v is not None and v in consts else None


def supported_models(prog: NormalProgram, data=(), guard: int = HB_GUARD) -> set:
    """Supported models of D ∪ P by exhaustive search.

    Models are frozensets of ground-atom names.  The universe is the set of
    constants of D ∪ P; the guard bounds the number of ground atoms over
    defined predicates (atoms over input predicates are fixed by D).
    """
    data = _data_atoms(data)
    _check_data(prog, data)
    consts = _universe(prog, data)
    cset = set(consts)
    dnames = {format_atom(a.pred, tuple(term_value(t) for t in a.args)) for a in data}

    defined = []
    index: dict = {}
    for p in prog.defined:
        for args in product(consts, repeat=prog.arities[p]):
            index[format_atom(p, args)] = len(defined)
            defined.append(format_atom(p, args))
    n = len(defined)
    if n > guard:
        raise PSError(f"{n} ground atoms over defined predicates exceed the guard of {guard}")
    input_preds = set(prog.inputs)

    # ground rule instances as (head, positive ids, negative ids); None = drop
    instances = []
    for r in prog.rules:
        vs = list(dict.fromkeys(r.head_vars + r.local_vars))
        for vals in product(consts, repeat=len(vs)):
            sub = dict(zip(vs, vals))
            head = index[format_atom(r.head.pred, tuple(sub[v] for v in r.head_vars))]
            pos, neg, alive = [], [], True
            for l in r.body:
                a = l.atom
                if a.kind == PREDEFINED:
                    x, y = (_ground_value(t, sub, cset) for t in a.args)
                    truth = x is not None and y is not None and compare(a.pred, x, y)
                    alive = truth == l.positive
                else:
                    args = tuple(_ground_value(t, sub, cset) for t in a.args)
                    if any(v is None for v in args):
                        alive = not l.positive
                    elif a.pred in input_preds:
                        alive = (format_atom(a.pred, args) in dnames) == l.positive
                    else:
                        (pos if l.positive else neg).append(index[format_atom(a.pred, args)])
                        continue
                if not alive:
                    break
            if alive:
                instances.append((head, pos, neg))

    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(bool)
    supported = np.zeros_like(bits)
    ok = np.ones(len(bits), dtype=bool)
    for head, pos, neg in instances:
        body = np.ones(len(bits), dtype=bool)
        for i in pos:
            body &= bits[:, i]
        for i in neg:
            body &= ~bits[:, i]
        ok &= ~body | bits[:, head]
        supported[:, head] |= body
    ok &= ~(bits & ~supported).any(axis=1)
    out = set()
    for row in bits[ok]:
        out.add(frozenset(dnames | {defined[i] for i in np.flatnonzero(row)}))
    return out


def translated_models(prog: NormalProgram, data=(), engine: str = "auto") -> set:
    """{M' ∩ HB(P)} over the models M' of the PS+ theory (D, T(P)).

    ``engine`` is ``"oracle"`` (exhaustive enumeration), ``"solver"`` or
    ``"auto"``, which enumerates up to 20 ground atoms and searches above.
    """
    data = _data_atoms(data)
    _check_data(prog, data)
    text = translate(prog)
    data_text = "\n".join(f"{a}." for a in data)
    if not _universe(prog, data):
        if any(r.head.args or any(l.atom.args for l in r.body) for r in prog.rules):
            raise PSError("empty universe with non-propositional rules")
        # a propositional program: any constant leaves the grounding unchanged
        text = "data univ_pad_/1.\n" + text
        data_text += "\nuniv_pad_(u)."
    gt = ground_texts([data_text], [text])
    preds = set(prog.predicates)
    dnames = {format_atom(a.pred, tuple(term_value(t) for t in a.args)) for a in data}
    if engine == "auto":
        engine = "oracle" if gt.n_atoms <= 20 else "solver"
    rows = model_matrix(gt) if engine == "oracle" else model_array(gt)
    cols = [i for i, name in enumerate(gt.atoms) if name.split("(")[0] in preds]
    if not cols:
        return {frozenset(dnames)} if rows.shape[0] else set()
    out = set()
    for row in np.unique(rows[:, cols], axis=0):
        out.add(frozenset(dnames | {gt.atoms[cols[i]] for i in np.flatnonzero(row)}))
    return out
