# src/oracle.py

import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from src.ad_transform import AdMode, gradient
from src.config import DEFAULT_H_LADDER, DEFAULT_PROBE_TOL, LOG_FORMAT, LOG_LEVEL
from src.errors import IllTyped
from src.evaluator import Program, Strategy, as_program
from src.models import DiffProbe, EvalConfig, GradReport, OracleConfig, Verdict
from src.syntax import Term

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

JUMP_RATIO = 0.5  # A one-sided difference keeping this share of its size as h shrinks is a jump


class _ScalarFunction:
    """Evaluates a coarity-1 program at numpy points; None stands for an undefined value."""

    def __init__(self, program: Program, strategy: Strategy, cfg: Optional[EvalConfig]):
        if program.coarity != 1:
            raise IllTyped(f"expected a program of coarity 1, got coarity {program.coarity}")
        self.program = program
        self.strategy = strategy
        self.cfg = cfg

    def __call__(self, point: np.ndarray) -> Optional[float]:
        values = self.program([float(v) for v in point], self.strategy, self.cfg)
        if values is None:
            return None
        return values[0]


def fd_gradient(term: Union[Term, Program], r: Sequence[float], h: float,
                strategy: Strategy = Strategy.HEAD, cfg: Optional[EvalConfig] = None) -> Optional[np.ndarray]:
    """Central differences (f(r + h e_i) - f(r - h e_i)) / 2h; None if any evaluation is undefined."""
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    f = _ScalarFunction(as_program(term), Strategy.parse(strategy), cfg)
    x0 = np.asarray(r, dtype=float)
    grad = np.zeros(len(x0))
    for j in range(len(x0)):
        x = np.copy(x0)

        x[j] = x0[j] + h
        fplus = f(x)

        x[j] = x0[j] - h
        fminus = f(x)

        if fplus is None or fminus is None:
            return None
        grad[j] = (fplus - fminus) / (2 * h)
    return grad


def _is_stable(quotients: List[float], tol: float) -> bool:
    return max(quotients) - min(quotients) <= tol * max(1.0, abs(quotients[-1]))


def _is_jump(differences: List[float], tol: float) -> bool:
    """The one-sided difference at the smallest step is large and has not shrunk with h."""
    return differences[-1] > tol and differences[-1] >= JUMP_RATIO * differences[0]


def diff_probe(term: Union[Term, Program], r: Sequence[float], h_ladder: Sequence[float] = DEFAULT_H_LADDER,
               tol: float = DEFAULT_PROBE_TOL, strategy: Strategy = Strategy.HEAD,
               cfg: Optional[EvalConfig] = None) -> DiffProbe:
    """
    Classifies r by one-sided difference quotients on every axis over the h ladder.
    Differentiable when both sides stabilize and agree (the gradient is then the central
    difference at the largest step), NotDifferentiable when they stabilize to different
    slopes or one side jumps, Undefined when an evaluation is undefined, Unknown otherwise.
    """
    if not h_ladder or any(h <= 0 for h in h_ladder) or any(a <= b for a, b in zip(h_ladder, h_ladder[1:])):
        raise ValueError(f"h ladder must be strictly decreasing positives, got {list(h_ladder)}")
    f = _ScalarFunction(as_program(term), Strategy.parse(strategy), cfg)
    x0 = np.asarray(r, dtype=float)
    f0 = f(x0)
    if f0 is None:
        return DiffProbe.undefined()

    grad: List[float] = []
    unknown_axis: Optional[int] = None
    for j in range(len(x0)):
        forward, backward = [], []
        forward_diffs, backward_diffs = [], []
        for h in h_ladder:
            x = np.copy(x0)
            x[j] = x0[j] + h
            fplus = f(x)
            x[j] = x0[j] - h
            fminus = f(x)
            if fplus is None or fminus is None:
                return DiffProbe.undefined()
            forward.append((fplus - f0) / h)
            backward.append((f0 - fminus) / h)
            forward_diffs.append(abs(fplus - f0))
            backward_diffs.append(abs(f0 - fminus))

        axis = j + 1
        if _is_jump(forward_diffs, tol) or _is_jump(backward_diffs, tol):
            logging.debug(f"Jump on axis {axis} at {x0.tolist()}.")
            return DiffProbe.not_differentiable(axis, backward[-1], forward[-1])
        if _is_stable(forward, tol) and _is_stable(backward, tol):
            left, right = backward[-1], forward[-1]
            if abs(right - left) > tol * max(1.0, abs(right)):
                return DiffProbe.not_differentiable(axis, left, right)
            grad.append((forward[0] + backward[0]) / 2)
        elif unknown_axis is None:
            unknown_axis = axis

    if unknown_axis is not None:
        return DiffProbe.unknown(unknown_axis)
    return DiffProbe.differentiable(grad)


def _verdict(probe: DiffProbe, ad_vectors: List[np.ndarray], cfg: OracleConfig):
    if probe.kind in ("NotDifferentiable", "Undefined"):
        return Verdict.OUTSIDE_DIFF_DOMAIN, None, None
    if probe.kind == "Unknown" or not ad_vectors:
        return Verdict.INCONCLUSIVE, None, None
    fd = np.asarray(probe.grad, dtype=float)
    max_abs, max_rel, failed = 0.0, 0.0, False
    for ad in ad_vectors:
        error = np.abs(ad - fd)
        failed = failed or bool(np.any(error > cfg.atol + cfg.rtol * np.abs(fd)))
        max_abs = max(max_abs, float(np.max(error, initial=0.0)))
        scale = np.maximum(np.abs(fd), np.finfo(float).tiny)
        max_rel = max(max_rel, float(np.max(error / scale, initial=0.0)))
    return (Verdict.FAIL if failed else Verdict.AGREE), max_abs, max_rel


def compare_at(term: Union[Term, Program], r: Sequence[float], cfg: Optional[OracleConfig] = None) -> GradReport:
    """Runs both AD modes and the difference probe at r and decides the verdict."""
    cfg = cfg or OracleConfig()
    program = as_program(term)
    strategy = Strategy.parse(cfg.strategy)
    point = [float(v) for v in r]

    ad_forward = gradient(program, AdMode.FORWARD, point, strategy, cfg.eval_config)
    ad_reverse = gradient(program, AdMode.REVERSE, point, strategy, cfg.eval_config)
    probe = diff_probe(program, point, cfg.h_ladder, cfg.probe_tol, strategy, cfg.eval_config)

    ad_vectors = [np.asarray(v, dtype=float) for v in (ad_forward, ad_reverse) if v is not None]
    verdict, max_abs, max_rel = _verdict(probe, ad_vectors, cfg)
    logging.debug(f"compare_at {point}: {verdict.value} (probe {probe.kind}).")
    return GradReport(
        point=point,
        ad_forward=ad_forward,
        ad_reverse=ad_reverse,
        fd_grad=probe,
        verdict=verdict,
        max_abs_err=max_abs,
        max_rel_err=max_rel,
    )
