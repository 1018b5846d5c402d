"""PS+: propositional schemata with cardinality atoms.

A theory is a set of data facts D and a program P of extended clauses.
``ground`` instantiates it into a propositional theory, ``solver`` searches
for models, ``completion`` translates normal logic programs into PS+.
"""

from .completion import NormalProgram, clark_completion, parse_lp, supported_models, translate
from .ground import GroundTheory, ground_texts, ground_theory
from .lang import ParseError, PSError, make_theory, parse_data, parse_program
from .propcore import check_model, compile_cnf, enumerate_models
from .solver import Solver, SolveResult, solve

__all__ = [
    "GroundTheory",
    "NormalProgram",
    "ParseError",
    "PSError",
    "SolveResult",
    "Solver",
    "check_model",
    "clark_completion",
    "compile_cnf",
    "enumerate_models",
    "ground_texts",
    "ground_theory",
    "make_theory",
    "parse_data",
    "parse_lp",
    "parse_program",
    "solve",
    "supported_models",
    "translate",
]
