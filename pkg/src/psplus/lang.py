"""Abstract syntax and surface-syntax parser for PS+ theories.

Two kinds of input files are understood:

* data files, a sequence of ground facts ``pred(c1,...,cn).``
* program files, a sequence of extended clauses
  ``A1, ..., As -> B1 ; ... ; Bt.`` and ``data pred/arity.`` declarations.

``%`` starts a comment that runs to the end of the line.  The full grammar
is in ``docs/language.md``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "mod", "abs")

DATA = "data"
PROGRAM = "program"
PREDEFINED = "predefined"


class PSError(Exception):
    """Base class for errors raised by this package."""


class ParseError(PSError, ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg = msg
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + msg)


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Underscore:
    def __str__(self) -> str:
        return "_"


@dataclass(frozen=True)
class App:
    """Application of a predefined arithmetic function."""

    op: str
    args: tuple

    def __str__(self) -> str:
        if self.op == "abs":
            return f"abs({self.args[0]})"
        left, right = self.args
        prec = _PREC[self.op]
        ls = str(left)
        rs = str(right)
        if isinstance(left, App) and left.op != "abs" and _PREC[left.op] < prec:
            ls = f"({ls})"
        if isinstance(right, App) and right.op != "abs" and _PREC[right.op] <= prec:
            rs = f"({rs})"
        return f"{ls} {self.op} {rs}"


_PREC = {"+": 1, "-": 1, "*": 2, "mod": 2}

Term = Union[Const, Int, Var, Underscore, App]


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, App):
        for a in t.args:
            yield from term_vars(a)


def is_ground_term(t: Term) -> bool:
    return isinstance(t, (Const, Int)) or (
        isinstance(t, App) and all(is_ground_term(a) for a in t.args)
    )


# ---------------------------------------------------------------------------
# atoms and clauses


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    kind: str = PROGRAM

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def has_underscore(self) -> bool:
        return any(isinstance(a, Underscore) for a in self.args)

    def variables(self) -> Iterator[str]:
        for a in self.args:
            yield from term_vars(a)

    def __str__(self) -> str:
        if self.kind == PREDEFINED:
            return f"{self.args[0]} {self.pred} {self.args[1]}"
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(str(a) for a in self.args)})"


Bound = Union[int, str, None]


@dataclass(frozen=True)
class CAtom:
    """Cardinality atom ``lower { inner } upper``; a ``str`` bound is unresolved."""

    lower: Bound
    inner: Atom
    upper: Bound

    def variables(self) -> Iterator[str]:
        return self.inner.variables()

    def __str__(self) -> str:
        lo = "" if self.lower is None else f"{self.lower} "
        hi = "" if self.upper is None else f" {self.upper}"
        return f"{lo}{{ {self.inner} }}{hi}"


Member = Union[Atom, CAtom]


@dataclass(frozen=True)
class ExtendedClause:
    antecedent: tuple = ()
    consequent: tuple = ()

    def variables(self) -> list[str]:
        """Variables in order of first occurrence, antecedent first."""
        seen: dict[str, None] = {}
        for m in self.antecedent + self.consequent:
            for v in m.variables():
                seen.setdefault(v, None)
        return list(seen)

    def __str__(self) -> str:
        ante = ", ".join(str(m) for m in self.antecedent)
        cons = " ; ".join(str(m) for m in self.consequent)
        if not self.antecedent:
            return f"{cons or 'T -> F'}."
        return f"{ante} -> {cons or 'F'}."


@dataclass
class Program:
    """A parsed program file: clauses plus explicit data declarations."""

    clauses: list = field(default_factory=list)
    data_decls: list = field(default_factory=list)  # (name, arity) in file order

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __getitem__(self, i):
        return self.clauses[i]

    def __str__(self) -> str:
        lines = [f"data {p}/{n}." for p, n in self.data_decls]
        lines += [str(c) for c in self.clauses]
        return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>%[^\n]*)
  | (?P<op>->|:-|<=|>=|!=|[=<>(){},;.+\-*/])
  | (?P<int>[0-9]+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<under>_(?![A-Za-z0-9_]))
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # op, int, var, name, under, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(Token("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    # terms

    def term(self) -> Term:
        left = self.product()
        while self.at("+") or self.at("-"):
            op = self.next().text
            left = App(op, (left, self.product()))
        return left

    def product(self) -> Term:
        left = self.factor()
        while self.at("*") or (self.tok.kind == "name" and self.tok.text == "mod"):
            op = self.next().text
            left = App(op, (left, self.factor()))
        return left

    def factor(self) -> Term:
        t = self.tok
        if t.kind == "int":
            self.next()
            return Int(_check_int(int(t.text), t))
        if t.kind == "op" and t.text == "-" and self.peek().kind == "int":
            self.next()
            v = self.next()
            return Int(_check_int(-int(v.text), v))
        if t.kind == "var":
            self.next()
            return Var(t.text)
        if t.kind == "under":
            self.next()
            return Underscore()
        if t.kind == "name":
            if t.text == "abs" and self.peek().text == "(":
                self.next()
                self.expect("(")
                arg = self.term()
                self.expect(")")
                return App("abs", (arg,))
            self.next()
            return Const(t.text)
        if self.at("("):
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    def args(self) -> tuple:
        if not self.at("("):
            return ()
        self.next()
        out = [self.term()]
        while self.at(","):
            self.next()
            out.append(self.term())
        self.expect(")")
        return tuple(out)

    # atoms

    def atom_or_comparison(self) -> Atom:
        t = self.tok
        if t.kind == "name" and self.peek().text == "(" and t.text != "abs":
            self.next()
            return Atom(t.text, self.args())
        start = self.tok
        left = self.term()
        if self.tok.kind == "op" and self.tok.text in COMPARISONS:
            op = self.next().text
            right = self.term()
            return Atom(op, (left, right), PREDEFINED)
        if isinstance(left, Const):
            return Atom(left.name, ())
        raise self.error("expected an atom", start)

    def bound(self) -> Bound:
        t = self.next()
        return int(t.text) if t.kind == "int" else t.text

    def member(self):
        """Parse an atom, a c-atom or a truth constant (returned as str)."""
        t = self.tok
        if t.kind == "var" and t.text in ("T", "F") and not (
            self.peek().kind == "op" and self.peek().text in COMPARISONS + ("+", "-", "*")
        ) and not (self.peek().kind == "name" and self.peek().text == "mod"):
            self.next()
            return t.text
        lower: Bound = None
        if t.kind in ("int", "name") and self.peek().text == "{" and self.peek().kind == "op":
            lower = self.bound()
        if self.at("{"):
            self.next()
            start = self.tok
            inner = self.atom_or_comparison()
            if inner.kind == PREDEFINED:
                raise self.error("c-atom over a predefined predicate", start)
            self.expect("}")
            upper: Bound = None
            if self.tok.kind in ("int", "name"):
                upper = self.bound()
            return CAtom(lower, inner, upper)
        return self.atom_or_comparison()

    def member_list(self, sep: str, truth: str) -> tuple[list, list[Token]]:
        starts = [self.tok]
        items = [self.member()]
        while self.at(sep):
            self.next()
            starts.append(self.tok)
            items.append(self.member())
        if len(items) == 1 and items[0] == truth:
            return [], []
        for it, tok in zip(items, starts):
            if isinstance(it, str):
                raise self.error(f"truth constant {it} cannot be combined with other members", tok)
        return items, starts

    # statements

    def fact(self) -> Atom:
        start = self.tok
        if start.kind != "name":
            raise self.error("expected a fact")
        self.next()
        args = self.args()
        for a in args:
            if isinstance(a, (Var, Underscore)):
                raise self.error(f"variable {a} in a fact", start)
            if isinstance(a, App):
                raise self.error("arithmetic in a fact", start)
        self.expect(".")
        return Atom(start.text, args, DATA)

    def clause(self) -> tuple[ExtendedClause, list[Token]]:
        if self.at("->"):  # omitted T
            first, first_toks = [], []
        else:
            first, first_toks = self.member_list(",", "T")
        if self.at("->"):
            self.next()
            second, _ = self.member_list(";", "F")
            self.expect(".")
            return ExtendedClause(tuple(first), tuple(second)), first_toks
        # no '->': the list is the consequent; re-read it as a disjunction
        if len(first) > 1:
            raise self.error("expected '->' after a conjunction")
        rest = list(first)
        while self.at(";"):
            self.next()
            m = self.member()
            if isinstance(m, str):
                raise self.error("truth constant in a disjunction")
            rest.append(m)
        self.expect(".")
        return ExtendedClause((), tuple(rest)), []


def _check_int(v: int, tok: Token) -> int:
    if not INT64_MIN <= v <= INT64_MAX:
        raise ParseError(f"integer {v} out of 64-bit range", tok.line, tok.col)
    return v


# ---------------------------------------------------------------------------
# public entry points


def parse_data(text: str) -> list[Atom]:
    """Parse a data file into its facts, in file order, without duplicates."""
    p = _Parser(text)
    facts: dict[Atom, None] = {}
    arities: dict[str, int] = {}
    while p.tok.kind != "eof":
        start = p.tok
        a = p.fact()
        if arities.setdefault(a.pred, a.arity) != a.arity:
            raise ParseError(
                f"predicate {a.pred} used with arities {arities[a.pred]} and {a.arity}",
                start.line,
                start.col,
            )
        facts.setdefault(a, None)
    return list(facts)


def parse_program(
    text: str,
    bindings: Optional[Mapping[str, int]] = None,
    data_predicates: Iterable[str] = (),
) -> Program:
    """Parse a program file.

    With ``bindings`` given, symbolic constants and c-atom bounds named in it
    are replaced by their integers and any other symbolic bound is an error.
    With ``bindings=None`` bounds stay symbolic (useful for pretty-printing).
    Atom kinds are resolved against ``data_predicates`` plus the file's own
    ``data p/n.`` declarations.
    """
    p = _Parser(text)
    prog = Program()
    positions = []
    while p.tok.kind != "eof":
        if p.tok.kind == "name" and p.tok.text == "data" and p.peek().kind == "name" and p.peek(2).text == "/":
            p.next()
            name = p.next().text
            p.expect("/")
            ar = p.next()
            if ar.kind != "int":
                raise p.error("expected an arity", ar)
            p.expect(".")
            prog.data_decls.append((name, int(ar.text)))
            continue
        start = p.tok
        clause, ante_toks = p.clause()
        prog.clauses.append(clause)
        positions.append((start, ante_toks))

    data_preds = set(data_predicates) | {n for n, _ in prog.data_decls}
    resolved = []
    for clause, (start, ante_toks) in zip(prog.clauses, positions):
        resolved.append(_resolve_clause(clause, bindings, data_preds, start, ante_toks))
    prog.clauses = resolved
    return prog


def _resolve_clause(clause, bindings, data_preds, start, ante_toks) -> ExtendedClause:
    def fix_term(t):
        if bindings is not None and isinstance(t, Const) and t.name in bindings:
            return Int(int(bindings[t.name]))
        if isinstance(t, App):
            return App(t.op, tuple(fix_term(a) for a in t.args))
        return t

    def fix_atom(a: Atom, tok) -> Atom:
        args = tuple(fix_term(x) for x in a.args)
        if a.kind == PREDEFINED:
            if any(isinstance(x, Underscore) for x in args):
                raise ParseError("underscore in a comparison", tok.line, tok.col)
            return Atom(a.pred, args, PREDEFINED)
        kind = DATA if a.pred in data_preds else PROGRAM
        return Atom(a.pred, args, kind)

    def fix_bound(b, tok):
        if isinstance(b, str) and bindings is not None:
            if b not in bindings:
                raise ParseError(f"unknown symbolic bound {b!r}", tok.line, tok.col)
            return int(bindings[b])
        return b

    def fix_member(m, tok, in_antecedent):
        if isinstance(m, CAtom):
            inner = fix_atom(m.inner, tok)
            if inner.kind != PROGRAM:
                raise ParseError(
                    f"c-atom over non-program predicate {inner.pred}", tok.line, tok.col
                )
            return CAtom(fix_bound(m.lower, tok), inner, fix_bound(m.upper, tok))
        a = fix_atom(m, tok)
        if in_antecedent and a.has_underscore:
            raise ParseError("underscore in an antecedent atom", tok.line, tok.col)
        return a

    toks = ante_toks or [start] * len(clause.antecedent)
    ante = tuple(fix_member(m, t, True) for m, t in zip(clause.antecedent, toks))
    cons = tuple(fix_member(m, start, False) for m in clause.consequent)
    for m in ante + cons:
        for a in m.inner.args if isinstance(m, CAtom) else m.args:
            if isinstance(a, App) and _has_underscore(a):
                raise ParseError("underscore inside arithmetic", start.line, start.col)
    return ExtendedClause(ante, cons)


def _has_underscore(t) -> bool:
    if isinstance(t, Underscore):
        return True
    return isinstance(t, App) and any(_has_underscore(a) for a in t.args)


# ---------------------------------------------------------------------------
# theories

ConstValue = Union[int, str]


def term_value(t: Term) -> ConstValue:
    """Python value of a constant term: ``int`` for integers, ``str`` for symbols."""
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Const):
        return t.name
    raise TypeError(f"not a constant term: {t}")


@dataclass
class Theory:
    """A PS+ theory (D, P) ready for grounding."""

    data: list  # ground data atoms, file order
    program: list  # ExtendedClause
    data_predicates: dict  # name -> arity
    constants: list  # ConstValue, first-occurrence order
    bindings: dict = field(default_factory=dict)

    def predicate_kinds(self) -> dict:
        kinds = {p: DATA for p in self.data_predicates}
        for c in self.program:
            for m in c.antecedent + c.consequent:
                a = m.inner if isinstance(m, CAtom) else m
                kinds.setdefault(a.pred, a.kind)
        return kinds


def make_theory(
    data_texts: Iterable[str] = (),
    program_texts: Iterable[str] = (),
    bindings: Optional[Mapping[str, int]] = None,
) -> Theory:
    """Parse and check a theory from data-file and program-file contents."""
    bindings = dict(bindings or {})
    data: dict[Atom, None] = {}
    for text in data_texts:
        for a in parse_data(text):
            data.setdefault(a, None)
    arities: dict[str, int] = {}

    def note(pred: str, arity: int) -> None:
        if arities.setdefault(pred, arity) != arity:
            raise PSError(f"predicate {pred} used with arities {arities[pred]} and {arity}")

    data_preds: dict[str, int] = {}
    for a in data:
        note(a.pred, a.arity)
        data_preds[a.pred] = a.arity

    program_texts = list(program_texts)
    # declarations may appear in any program file: collect them first
    for text in program_texts:
        for name, ar in parse_program(text, None).data_decls:
            note(name, ar)
            data_preds.setdefault(name, ar)

    clauses = []
    for text in program_texts:
        clauses.extend(parse_program(text, bindings, data_preds).clauses)

    for c in clauses:
        for m in c.antecedent + c.consequent:
            a = m.inner if isinstance(m, CAtom) else m
            if a.kind != PREDEFINED:
                note(a.pred, a.arity)
            if isinstance(m, CAtom):
                for b in (m.lower, m.upper):
                    if isinstance(b, int) and b < 0:
                        raise PSError(f"negative c-atom bound in {m}")

    consts: dict[ConstValue, None] = {}
    for a in data:
        for t in a.args:
            consts.setdefault(term_value(t), None)

    def collect(t):
        if isinstance(t, (Int, Const)):
            consts.setdefault(term_value(t), None)
        elif isinstance(t, App):
            for x in t.args:
                collect(x)

    for c in clauses:
        for m in c.antecedent + c.consequent:
            a = m.inner if isinstance(m, CAtom) else m
            for t in a.args:
                collect(t)
    if not consts:
        raise PSError("theory mentions no constant")
    return Theory(list(data), clauses, data_preds, list(consts), bindings)
