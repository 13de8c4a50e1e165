# tests/test_typecheck.py

import pytest
from hypothesis import HealthCheck, given, settings

from src.errors import (
    ArgumentTypeMismatch, ArityMismatch, BranchTypeMismatch, FixNotArrow, GuardNotReal, IllTyped,
    NonArrowApplication, PrimArgNotReal, ProjOnNonProduct, UnboundVariable, UnknownPrimitive,
)
from src.evaluator import Strategy, step
from src.parser import parse, parse_type
from src.syntax import REAL, Arrow, VecAdd, VecZero, Var, real_power
from src.typecheck import TypingEnv, check_program, infer, require_program
from tests.conftest import EQ_PROJ, RELU, ground_terms

EMPTY = TypingEnv()


def test_infers_arrow_and_product_types():
    assert infer(EMPTY, parse(RELU)) == Arrow(REAL, REAL)
    assert infer(EMPTY, parse(EQ_PROJ)) == parse_type("R -> R -> R")
    assert infer(TypingEnv.ground(["x"]), parse("<x, \\y:R. y>")) == parse_type("(R * (R -> R))")
    assert infer(EMPTY, parse("fix f:R -> R. \\n:R. f n")) == Arrow(REAL, REAL)
    assert infer(EMPTY, parse("<>")) == real_power(0)


def test_vector_sugar_types():
    env = TypingEnv.ground(["a", "b"])
    assert infer(env, VecZero(3)) == real_power(3)
    assert infer(env, VecAdd(1, Var("a"), Var("b"))) == REAL
    with pytest.raises(ArgumentTypeMismatch):
        infer(env, VecAdd(2, Var("a"), Var("b")))


def test_inner_binders_shadow_outer_ones():
    env = TypingEnv.ground(["x"]).extend("x", Arrow(REAL, REAL))
    assert env.lookup("x") == Arrow(REAL, REAL)
    assert infer(env, parse("x 1")) == REAL


@pytest.mark.parametrize("source, error", [
    ("y", UnboundVariable),
    ("sin(1, 2)", ArityMismatch),
    ("frobnicate(1)", UnknownPrimitive),
    ("if 0 then 1 else \\x:R. x", BranchTypeMismatch),
    ("1 2", NonArrowApplication),
    ("(\\f:R -> R. f 0) 3", ArgumentTypeMismatch),
    ("proj 1 2 3", ProjOnNonProduct),
    ("proj 1 3 <1, 2>", ProjOnNonProduct),
    ("if <1, 2> then 1 else 2", GuardNotReal),
    ("fix f:R -> R. 3", FixNotArrow),
    ("(\\f:R -> R. f) + 1", PrimArgNotReal),
])
def test_typing_errors(source, error):
    with pytest.raises(error):
        infer(EMPTY, parse(source))


def test_typing_errors_carry_source_positions():
    with pytest.raises(UnboundVariable) as info:
        infer(EMPTY, parse("\\x:R.\n  x + y"))
    assert info.value.span == (2, 7)
    assert "line 2" in str(info.value)


def test_fix_binder_must_be_an_arrow():
    with pytest.raises(FixNotArrow):
        infer(EMPTY, parse("fix f:R. f"))


def test_program_checks():
    relu_body = parse("if x then 0 else x")
    assert check_program(relu_body, 1, 1)
    assert not check_program(relu_body, 1, 2)
    assert check_program(parse("<x, y, x * y>"), 2, 3)
    assert check_program(parse("x"), 2, 1, params=["x", "y"])
    assert not check_program(parse("x + y"), 1, 1)
    assert not check_program(parse("\\x:R. x"), 0, 1)
    assert require_program(parse("<x, y>")) == 2
    with pytest.raises(IllTyped):
        require_program(parse("x"), ["x", "x"])
    with pytest.raises(IllTyped):
        require_program(parse("x + 1"), coarity=2)


def _check_subject_reduction(term):
    expected = infer(EMPTY, term)
    for strategy in Strategy:
        current = term
        for _ in range(200):
            fired = step(current, strategy)
            if fired is None:
                break
            current = fired[0]
            assert infer(EMPTY, current) == expected


@settings(max_examples=200, deadline=None)
@given(ground_terms())
def test_reduction_preserves_types(term):
    _check_subject_reduction(term)


@pytest.mark.slow
@settings(max_examples=10_000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(ground_terms())
def test_reduction_preserves_types_full_size(term):
    _check_subject_reduction(term)
