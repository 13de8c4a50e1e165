# tests/conftest.py

import os

import pytest
from hypothesis import strategies as st

from src.config import CORPUS_DIR
from src.corpus import SourceProgram, load_file
from src.parser import parse
from src.syntax import (
    MUL, NEG, REAL, SUB, App, Cond, Lam, PrimApp, Proj, TupleTerm, Var, add, mk_numeral, mul,
)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def corpus_path(name: str) -> str:
    return os.path.join(ROOT, CORPUS_DIR, f"{name}.pcfr")


@pytest.fixture
def corpus():
    """Loads a shipped corpus program by name."""
    def load(name: str) -> SourceProgram:
        return load_file(corpus_path(name))
    return load


@pytest.fixture
def term():
    return parse


RELU = "\\x:R. if x then 0 else x"
SILLY_ID = "\\x:R. if x then (if -x then 0 else x) else x"
EQ_PROJ = "\\x:R. \\y:R. if x - y then (if y - x then x else y) else y"


# --- random terms ---

NAMES = ["x1", "x2", "x3"]

small_reals = st.integers(min_value=-3, max_value=3).map(float) | st.sampled_from([0.5, -0.5, 1.5, 0.25])
numerals = small_reals.map(mk_numeral)


def _let(name: str, bound, body):
    return App(Lam(name, REAL, body), bound)


def _pair_proj(index: int, left, right):
    return Proj(index, 2, TupleTerm((left, right)))


def simple_terms(names, max_leaves: int = 12):
    """Ground-typed simple terms over the given variables: constants, +, -, *, neg, lets and pairs."""
    leaves = numerals | st.sampled_from([Var(n) for n in names]) if names else numerals
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            st.builds(add, sub, sub),
            st.builds(mul, sub, sub),
            st.builds(lambda a, b: PrimApp(SUB, (a, b)), sub, sub),
            st.builds(lambda a: PrimApp(NEG, (a,)), sub),
            st.builds(lambda bound, rest: _let("y", bound, add(Var("y"), rest)), sub, sub),
            st.builds(_pair_proj, st.sampled_from([1, 2]), sub, sub),
        ),
        max_leaves=max_leaves,
    )


@st.composite
def simple_programs(draw, max_arity: int = 3):
    """A (term, params) pair: a simple program of arity 1..max_arity using only + and * on top of constants."""
    arity = draw(st.integers(min_value=1, max_value=max_arity))
    names = NAMES[:arity]
    body = draw(st.recursive(
        numerals | st.sampled_from([Var(n) for n in names]),
        lambda sub: st.builds(add, sub, sub) | st.builds(mul, sub, sub),
        max_leaves=10,
    ))
    return body, names


def ground_terms(max_leaves: int = 10):
    """Closed terms of type R with conditionals, lets and pairs."""
    return st.recursive(
        numerals,
        lambda sub: st.one_of(
            st.builds(add, sub, sub),
            st.builds(mul, sub, sub),
            st.builds(lambda a: PrimApp(NEG, (a,)), sub),
            st.builds(Cond, sub, sub, sub),
            st.builds(lambda bound: _let("y", bound, add(Var("y"), Var("y"))), sub),
            st.builds(_pair_proj, st.sampled_from([1, 2]), sub, sub),
            st.builds(lambda a, b: App(Lam("f", REAL, PrimApp(MUL, (Var("f"), a))), b), sub, sub),
        ),
        max_leaves=max_leaves,
    )
