# tests/test_parser.py

import glob
import os

import pytest
from hypothesis import given, settings

from src.config import CORPUS_DIR
from src.errors import ParseError
from src.parser import parse, parse_type, print_term, tokenize
from src.syntax import (
    NEG, REAL, UNIT, App, Arrow, Cond, Lam, PrimApp, PrimSymbol, Product, Proj, TupleTerm, Var, VecAdd, VecZero,
    alpha_eq, mk_numeral,
)
from tests.conftest import ROOT, ground_terms, simple_terms


def test_relu_surface_form():
    relu = parse("\\x:R. if x then 0 else x")
    assert relu == Lam("x", REAL, Cond(Var("x"), mk_numeral(0), Var("x")))


def test_projection_and_tuples():
    assert parse("proj 2 2 <x, y>") == Proj(2, 2, TupleTerm((Var("x"), Var("y"))))
    assert parse("proj 1 1 x") == Var("x")
    assert parse("<x>") == Var("x")
    assert parse("<>") == TupleTerm(())


def test_operator_precedence_and_associativity():
    assert parse("a - b - c") == parse("(a - b) - c")
    assert parse("a + b * c") == parse("a + (b * c)")
    assert parse("f x y") == App(App(Var("f"), Var("x")), Var("y"))
    assert parse("-f x") == PrimApp(NEG, (App(Var("f"), Var("x")),))
    assert parse("-2") == mk_numeral(-2.0)
    assert parse("- -2") == PrimApp(NEG, (mk_numeral(-2.0),))


def test_primitive_calls_need_the_parenthesis_attached():
    assert parse("sin(x)") == PrimApp(PrimSymbol("sin", 1), (Var("x"),))
    assert parse("f (x)") == App(Var("f"), Var("x"))


def test_vector_sugar_syntax():
    assert parse("vzero[3]") == VecZero(3)
    assert parse("vadd[2](a, b)") == VecAdd(2, Var("a"), Var("b"))
    with pytest.raises(ParseError):
        parse("vadd[2](a)")


def test_types():
    assert parse_type("R -> R -> R") == Arrow(REAL, Arrow(REAL, REAL))
    assert parse_type("(R -> R) -> R") == Arrow(Arrow(REAL, REAL), REAL)
    assert parse_type("(R * (R -> R))") == Product((REAL, Arrow(REAL, REAL)))
    assert parse_type("1") == UNIT


def test_comments_and_literals():
    assert parse("-- a comment\n1.5e2 -- trailing") == mk_numeral(150.0)
    kinds = [t.kind for t in tokenize("sin(x) f (x)")]
    assert kinds[:2] == ["CALL", "SYMBOL"]
    assert kinds[4:6] == ["IDENT", "SYMBOL"]


@pytest.mark.parametrize("source", [
    "<1, 2",
    "\\x. x",
    "if x then 1",
    "proj 3 2 <x, y>",
    "x )",
    "1 $ 2",
])
def test_parse_errors(source):
    with pytest.raises(ParseError):
        parse(source)


def test_parse_errors_report_line_and_column():
    with pytest.raises(ParseError) as info:
        parse("\\x:R.\n  <x, 2")
    assert info.value.line == 2
    assert info.value.column == 8


def test_printing_round_trips_the_corpus():
    paths = sorted(glob.glob(os.path.join(ROOT, CORPUS_DIR, "*.pcfr")))
    assert paths
    for path in paths:
        with open(path, encoding="utf-8") as f:
            term = parse(f.read())
        assert alpha_eq(parse(print_term(term)), term), path


def test_printing_negative_numerals():
    for term in [mk_numeral(-1.5), PrimApp(NEG, (mk_numeral(2.0),)), PrimApp(NEG, (mk_numeral(-2.0),)),
                 parse("x - -1"), parse("f (-1)"), parse("-(-x)")]:
        assert alpha_eq(parse(print_term(term)), term)


@settings(max_examples=300, deadline=None)
@given(ground_terms())
def test_printing_round_trips_ground_terms(term):
    assert alpha_eq(parse(print_term(term)), term)


@settings(max_examples=300, deadline=None)
@given(simple_terms(["x1", "x2"]))
def test_printing_round_trips_simple_terms(term):
    assert alpha_eq(parse(print_term(term)), term)
