import re
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psplus.lang import (
    DATA,
    PREDEFINED,
    PROGRAM,
    App,
    Atom,
    CAtom,
    Const,
    Int,
    ParseError,
    PSError,
    Underscore,
    Var,
    make_theory,
    parse_data,
    parse_program,
)

CORPUS = sorted((Path(__file__).parent / "corpus").glob("*.ps"))


def _norm(text):
    return re.sub(r"\s+", "", re.sub(r"%[^\n]*", "", text))


def test_parse_data_facts():
    facts = parse_data("vtx(a). edge(a,b).")
    assert [str(f) for f in facts] == ["vtx(a)", "edge(a,b)"]
    assert all(f.kind == DATA for f in facts)


def test_parse_data_empty_and_comments():
    assert parse_data("") == []
    assert parse_data("% nothing here\n") == []


def test_parse_data_integers():
    facts = parse_data("pos(1). pos(2). pos(3).")
    assert [f.args[0] for f in facts] == [Int(1), Int(2), Int(3)]


@pytest.mark.parametrize(
    "text",
    ["p(X).", "p(a) q(b).", "p(1+2).", "p(a", "p(_)."],
)
def test_parse_data_rejects(text):
    with pytest.raises(ParseError):
        parse_data(text)


def test_parse_data_arity_conflict():
    with pytest.raises(ParseError):
        parse_data("p(a). p(a,b).")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_data("p(a).\n  q(X).")
    assert (e.value.line, e.value.col) == (2, 3)


def test_clause_c1_shape():
    (cl,) = parse_program("q(B,C) -> p(A).")
    assert cl.antecedent == (Atom("q", (Var("B"), Var("C")), PROGRAM),)
    assert cl.consequent == (Atom("p", (Var("A"),), PROGRAM),)


def test_clause_c2():
    (cl,) = parse_program("p(X) -> q(X,_) ; X = a.")
    assert cl.consequent[0] == Atom("q", (Var("X"), Underscore()), PROGRAM)
    assert cl.consequent[1] == Atom("=", (Var("X"), Const("a")), PREDEFINED)


def test_symbolic_bound_resolved():
    (cl,) = parse_program("{ invc(_) } k.", {"k": 3})
    assert cl.antecedent == ()
    (c,) = cl.consequent
    assert isinstance(c, CAtom) and c.lower is None and c.upper == 3
    assert c.inner == Atom("invc", (Underscore(),), PROGRAM)


def test_symbolic_bound_kept_without_bindings():
    (cl,) = parse_program("{ invc(_) } k.")
    assert str(cl) == "{ invc(_) } k."


def test_unknown_symbolic_bound():
    with pytest.raises(ParseError):
        parse_program("{ invc(_) } k.", {})


def test_symbolic_constant_in_term():
    (cl,) = parse_program("p(X) -> X <= k.", {"k": 4})
    assert cl.consequent[0].args[1] == Int(4)


def test_underscore_rejected_in_antecedent():
    with pytest.raises(ParseError):
        parse_program("q(X,_) -> p(X).")


def test_underscore_allowed_in_antecedent_catom():
    (cl,) = parse_program("2 { r(X,_) } 2 -> s(X).")
    assert isinstance(cl.antecedent[0], CAtom)


def test_catom_over_data_predicate_rejected():
    with pytest.raises(ParseError):
        parse_program("data e/1.\n{ e(_) } 1.")


def test_underscore_in_arithmetic_rejected():
    with pytest.raises(ParseError):
        parse_program("p(X) -> q(_ + 1).")


def test_truth_constants_and_defaults():
    (cl,) = parse_program("T -> F.")
    assert cl.antecedent == () and cl.consequent == ()
    (fact,) = parse_program("p(a).")
    assert fact.antecedent == () and len(fact.consequent) == 1


def test_arithmetic_precedence():
    (cl,) = parse_program("p(X) -> q(X + 2 * X - 1).")
    t = cl.consequent[0].args[0]
    assert t == App("-", (App("+", (Var("X"), App("*", (Int(2), Var("X"))))), Int(1)))


def test_negative_integer_constant():
    (cl,) = parse_program("p(-3).")
    assert cl.consequent[0].args[0] == Int(-3)


def test_integer_overflow_is_an_error():
    with pytest.raises(ParseError):
        parse_program("p(99999999999999999999).")


def test_data_declaration_sets_kind():
    prog = parse_program("data e/2.\ne(X,Y) -> p(X).")
    assert prog.data_decls == [("e", 2)]
    assert prog.clauses[0].antecedent[0].kind == DATA


def test_theory_kinds_partition_predicates():
    th = make_theory(["e(a,b)."], ["e(X,Y), X != Y -> p(X) ; 1 { q(_) } 2."])
    kinds = th.predicate_kinds()
    assert kinds == {"e": DATA, "!=": PREDEFINED, "p": PROGRAM, "q": PROGRAM}


def test_theory_constants_first_occurrence():
    th = make_theory(["r(c). r(b)."], ["p(a) -> p(b) ; X = 3."])
    assert th.constants == ["c", "b", "a", 3]


def test_theory_arity_mismatch():
    with pytest.raises(PSError):
        make_theory(["e(a)."], ["e(X,Y) -> p(X)."])


def test_theory_without_constants():
    with pytest.raises(PSError):
        make_theory([], ["p(X) -> q(X)."])


def test_negative_bound_rejected():
    with pytest.raises(PSError):
        make_theory(["d(a)."], ["{ p(_) } k."], {"k": -1})


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.name)
def test_corpus_round_trip(path):
    src = path.read_text()
    printed = str(parse_program(src))
    assert _norm(printed) == _norm(src)
    assert parse_program(printed) == parse_program(src)


def test_parse_is_deterministic():
    src = CORPUS[0].read_text()
    assert parse_program(src) == parse_program(src)


# generated clauses survive print -> parse

_names = st.sampled_from(["a", "b", "c"])
_vars = st.sampled_from(["X", "Y", "Z"])
_ints = st.integers(-5, 9).map(Int)


def _term(depth=2):
    leaf = st.one_of(_names.map(Const), _vars.map(Var), _ints)
    if depth == 0:
        return leaf
    sub = _term(depth - 1)
    ops = st.builds(lambda op, x, y: App(op, (x, y)), st.sampled_from(["+", "-", "*", "mod"]), sub, sub)
    return st.one_of(leaf, ops, st.builds(lambda x: App("abs", (x,)), sub))


@st.composite
def _clause_text(draw):
    arity = {"p": 1, "q": 2, "r": 0}
    def atom(allow_under):
        p = draw(st.sampled_from(list(arity)))
        args = []
        for _ in range(arity[p]):
            if allow_under and draw(st.booleans()):
                args.append("_")
            else:
                args.append(str(draw(_term(1))))
        return p + (f"({','.join(args)})" if args else "")
    ante = [atom(False) for _ in range(draw(st.integers(0, 2)))]
    if draw(st.booleans()):
        ante.append(f"{draw(_term(1))} {draw(st.sampled_from(['=', '!=', '<', '<=', '>', '>=']))} {draw(_term(1))}")
    cons = []
    for _ in range(draw(st.integers(0, 2))):
        if draw(st.booleans()):
            lo = draw(st.sampled_from(["", "0 ", "1 ", "2 "]))
            hi = draw(st.sampled_from([" 1", " 3"] + ([""] if lo else [])))
            cons.append(f"{lo}{{ {atom(True)} }}{hi}")
        else:
            cons.append(atom(True))
    return f"{', '.join(ante) or 'T'} -> {' ; '.join(cons) or 'F'}."


@settings(max_examples=200, deadline=None)
@given(_clause_text())
def test_generated_round_trip(text):
    prog = parse_program(text)
    again = parse_program(str(prog))
    assert again == prog
    assert str(again) == str(prog)
