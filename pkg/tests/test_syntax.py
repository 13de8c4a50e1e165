# tests/test_syntax.py

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import IndexOutOfRange, NonArrowFixType, NonFiniteNumeral, SyntaxConstructionError
from src.parser import parse
from src.syntax import (
    REAL, UNIT, App, Arrow, Fix, Lam, Product, Proj, TupleTerm, Var, VecAdd, VecZero,
    add, alpha_eq, cap_fixpoints, children, expand_vector_sugar, fix_approx, free_vars, fresh_name, iota, is_ground_power,
    is_simple, mk_numeral, numeral_value, omega, product_type, program_variables, proj_term, real_power, subst,
    sum_terms, term_size, tuple_term, vec_sum,
)
from tests.conftest import simple_terms


def test_numerals_reject_non_finite_values():
    with pytest.raises(NonFiniteNumeral):
        mk_numeral(math.inf)
    with pytest.raises(NonFiniteNumeral):
        mk_numeral(math.nan)
    assert numeral_value(mk_numeral(2)) == 2.0


def test_unary_products_and_projections_collapse():
    assert product_type([REAL]) == REAL
    assert real_power(0) == UNIT
    assert real_power(3) == Product((REAL, REAL, REAL))
    assert tuple_term([Var("x")]) == Var("x")
    assert proj_term(1, 1, Var("x")) == Var("x")
    with pytest.raises(SyntaxConstructionError):
        Product((REAL,))
    with pytest.raises(SyntaxConstructionError):
        TupleTerm((Var("x"),))


def test_projection_index_is_checked():
    with pytest.raises(IndexOutOfRange):
        Proj(3, 2, Var("p"))
    with pytest.raises(IndexOutOfRange):
        proj_term(0, 2, Var("p"))


def test_ground_powers():
    assert is_ground_power(REAL) == 1
    assert is_ground_power(real_power(4)) == 4
    assert is_ground_power(UNIT) == 0
    assert is_ground_power(Arrow(REAL, REAL)) is None


def test_type_printing():
    assert str(Arrow(REAL, Arrow(REAL, REAL))) == "R -> R -> R"
    assert str(Arrow(Arrow(REAL, REAL), REAL)) == "(R -> R) -> R"
    assert str(Product((Arrow(REAL, REAL), REAL))) == "((R -> R) * R)"
    assert str(UNIT) == "1"


def test_free_variables_and_first_occurrence_order():
    term = parse("(\\x:R. x + y) (z * y)")
    assert free_vars(term) == {"y", "z"}
    assert program_variables(term) == ["y", "z"]
    assert program_variables(parse("fix f:R -> R. \\n:R. f (n + k)")) == ["k"]


def test_fresh_names_avoid_the_given_set():
    assert fresh_name("x", frozenset({"x", "x_1"})) == "x_2"
    assert fresh_name("x_1", frozenset({"x_1"})) == "x_2"


def test_substitution_avoids_capture():
    term = Lam("y", REAL, add(Var("x"), Var("y")))
    result = subst(term, "x", Var("y"))
    assert isinstance(result, Lam)
    assert result.binder != "y"
    assert alpha_eq(result, parse("\\w:R. y + w"))


def test_substitution_stops_at_shadowing_binder():
    term = parse("\\x:R. x")
    assert subst(term, "x", mk_numeral(1)) is term


def test_alpha_equivalence():
    assert alpha_eq(parse("\\x:R. \\y:R. x - y"), parse("\\a:R. \\b:R. a - b"))
    assert not alpha_eq(parse("\\x:R. \\y:R. x - y"), parse("\\a:R. \\b:R. b - a"))
    assert not alpha_eq(parse("\\x:R. x"), parse("\\x:R -> R. x"))
    assert not alpha_eq(parse("\\x:R. y"), parse("\\x:R. z"))


def test_iota_injects_at_position():
    assert alpha_eq(iota(2, 3), parse("\\x:R. <0, x, 0>"))
    assert alpha_eq(iota(1, 1), parse("\\x:R. x"))
    with pytest.raises(IndexOutOfRange):
        iota(4, 3)


def test_fixpoint_approximants():
    ty = Arrow(REAL, REAL)
    body = parse("\\n:R. f n")
    assert fix_approx("f", ty, body, 0) == omega(ty)
    assert fix_approx("f", ty, body, None) == Fix("f", ty, body)
    first = fix_approx("f", ty, body, 1)
    assert isinstance(first, App) and first.fun == Lam("f", ty, body)
    with pytest.raises(NonArrowFixType):
        omega(REAL)


def test_cap_fixpoints_leaves_only_divergent_stubs():
    term = parse("fix f:R -> R. \\n:R. (fix g:R -> R. \\m:R. g m) (f n)")
    capped = cap_fixpoints(term, 2)
    stack = [capped]
    while stack:
        node = stack.pop()
        if isinstance(node, Fix):
            assert node.body == Var(node.binder)
        stack.extend(children(node))


def test_vector_sugar_expands_componentwise():
    assert expand_vector_sugar(VecZero(2)) == TupleTerm((mk_numeral(0), mk_numeral(0)))
    assert expand_vector_sugar(VecZero(1)) == mk_numeral(0)
    expanded = expand_vector_sugar(VecAdd(2, Var("a"), Var("b")))
    assert alpha_eq(expanded, parse("<proj 1 2 a + proj 1 2 b, proj 2 2 a + proj 2 2 b>"))
    assert vec_sum(3, []) == VecZero(3)


def test_term_size_ignores_widths():
    assert term_size(VecZero(1)) == term_size(VecZero(64)) == 1
    assert term_size(VecAdd(5, Var("a"), Var("b"))) == 3
    assert term_size(sum_terms([Var("a"), Var("b"), Var("c")])) == 5
    assert sum_terms([]) == mk_numeral(0)


def test_simple_terms_have_no_conditionals_or_fixpoints():
    assert is_simple(parse("\\x:R. <x, x * 2>"))
    assert not is_simple(parse("\\x:R. if x then 0 else x"))
    assert not is_simple(parse("fix f:R -> R. f"))


SUBST_NAMES = ["x1", "x2", "y"]


@settings(max_examples=200, deadline=None)
@given(simple_terms(SUBST_NAMES), st.sampled_from(SUBST_NAMES))
def test_substituting_a_variable_for_itself_changes_nothing(term, name):
    assert alpha_eq(subst(term, name, Var(name)), term)


@settings(max_examples=200, deadline=None)
@given(simple_terms(SUBST_NAMES), st.sampled_from(SUBST_NAMES), simple_terms(SUBST_NAMES, max_leaves=4))
def test_substitution_bounds_free_variables(term, name, replacement):
    result = free_vars(subst(term, name, replacement))
    assert result <= (free_vars(term) - {name}) | free_vars(replacement)
    if name in free_vars(term):
        assert free_vars(replacement) <= result
