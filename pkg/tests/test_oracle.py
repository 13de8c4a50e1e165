# tests/test_oracle.py

import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import IllTyped
from src.evaluator import Program
from src.models import OracleConfig, Verdict
from src.oracle import compare_at, diff_probe, fd_gradient
from src.parser import parse
from tests.conftest import EQ_PROJ, RELU, SILLY_ID


def program(source: str, arity: int = 1) -> Program:
    params = ["x", "y"][:arity]
    return Program(parse(f"({source}) " + " ".join(params)), params)


def test_central_differences():
    grad = fd_gradient(program("\\x:R. \\y:R. x * x + 3 * y", 2), [1.0, 2.0], 1e-5)
    assert grad == pytest.approx([2.0, 3.0], rel=1e-6)
    assert fd_gradient(program("\\x:R. log(x)"), [0.0], 1e-5) is None
    with pytest.raises(ValueError):
        fd_gradient(program(RELU), [1.0], 0.0)


def test_probe_on_smooth_points():
    probe = diff_probe(program("\\x:R. sin(x)"), [0.3])
    assert probe.kind == "Differentiable"
    assert probe.grad == pytest.approx([math.cos(0.3)], rel=1e-4)


def test_probe_sees_kinks_as_non_differentiable():
    probe = diff_probe(program(RELU), [0.0])
    assert probe.kind == "NotDifferentiable"
    assert probe.axis == 1
    assert probe.left_slope == pytest.approx(0.0)
    assert probe.right_slope == pytest.approx(1.0)


def test_probe_sees_jumps_as_non_differentiable():
    probe = diff_probe(program("\\x:R. if x then 0 else 1"), [0.0])
    assert probe.kind == "NotDifferentiable"


def test_probe_reports_undefined_points():
    assert diff_probe(program("\\x:R. log(x)"), [0.0]).kind == "Undefined"
    assert diff_probe(program("\\x:R. log(x)"), [1e-6]).kind == "Undefined"


def test_probe_rejects_bad_ladders():
    with pytest.raises(ValueError):
        diff_probe(program(RELU), [1.0], h_ladder=[1e-5, 1e-4])
    with pytest.raises(ValidationError):
        OracleConfig(h_ladder=(1e-4, -1e-5))


def test_probe_needs_a_scalar_program():
    with pytest.raises(IllTyped):
        diff_probe(Program(parse("<x, x>")), [1.0])


def test_silly_id_fails_only_at_zero():
    report = compare_at(program(SILLY_ID), [0.0])
    assert report.verdict == Verdict.FAIL
    assert report.ad_forward == [0.0]
    assert report.ad_reverse == [0.0]
    assert report.fd_grad.kind == "Differentiable"
    assert report.fd_grad.grad == pytest.approx([1.0])
    assert report.max_abs_err == pytest.approx(1.0)
    for r in (0.5, -0.5):
        assert compare_at(program(SILLY_ID), [r]).verdict == Verdict.AGREE


def test_kinks_are_outside_the_domain_not_failures():
    assert compare_at(program(RELU), [0.0]).verdict == Verdict.OUTSIDE_DIFF_DOMAIN
    assert compare_at(program(RELU), [2.0]).verdict == Verdict.AGREE


def test_eq_proj_fails_on_the_diagonal_only():
    report = compare_at(program(EQ_PROJ, 2), [0.0, 1.0])
    assert report.verdict == Verdict.AGREE
    assert report.ad_forward == [0.0, 1.0]
    diagonal = compare_at(program(EQ_PROJ, 2), [1.0, 1.0])
    assert diagonal.verdict == Verdict.FAIL
    assert diagonal.ad_reverse == [1.0, 0.0]
    assert diagonal.fd_grad.grad == pytest.approx([0.0, 1.0])


def test_tolerances_decide_the_verdict():
    loose = OracleConfig(atol=2.0)
    assert compare_at(program(SILLY_ID), [0.0], loose).verdict == Verdict.AGREE


def test_report_json_uses_camel_case():
    data = compare_at(program(RELU), [1.0]).to_json_dict()
    assert set(data) >= {"point", "adForward", "adReverse", "fdGrad", "verdict", "maxAbsErr", "maxRelErr"}
    assert data["verdict"] == "Agree"
    assert data["fdGrad"]["kind"] == "Differentiable"
    assert np.allclose(data["adForward"], [1.0])
