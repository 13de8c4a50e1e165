# src/trace_lab.py

"""
Branch traces, the pre-trace relation between simple terms and PCF_R terms,
the empirical stability probe and the Monte-Carlo failure scan.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import (
    BALL_REJECTION_MAX_DIM, DEFAULT_FIX_BOUND, DEFAULT_PROBES, DEFAULT_RADIUS, DEFAULT_SEED, FAIL_POINTS_CAP,
    LOG_FORMAT, LOG_LEVEL,
)
from src.errors import IllTyped, NotSimple
from src.evaluator import Event, Program, Strategy, as_program
from src.models import (
    EvalConfig, OracleConfig, PretraceResult, SampleRecord, ScanReport, StabilityVerdict, Verdict,
)
from src.oracle import compare_at
from src.primitives import DEFAULT_REGISTRY
from src.syntax import (
    App, Arrow, Cond, Fix, Lam, PrimApp, Product, Proj, Real, Term, TupleTerm, TypeExpr, Var, VecAdd, VecZero,
    REAL, alpha_eq, fix_approx, is_simple,
)

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)


# --- branch traces ---

@dataclass(frozen=True)
class BranchTrace:
    """
    The decisions taken by deterministic head reduction and how it ended.
    Two traces are equal when they took the same branches and unfoldings in the same
    order; guard values are carried for display only.
    """
    events: Tuple[Event, ...]
    outcome: str  # NormalForm | FuelExhausted | PrimDomainError | Stuck

    def to_json_dict(self) -> dict:
        events = []
        for event in self.events:
            if hasattr(event, "branch"):
                events.append({"event": "CondTaken", "branch": event.branch.value, "guardValue": event.guard_value})
            else:
                events.append({"event": "FixUnfolded", "binder": event.binder})
        return {"events": events, "outcome": self.outcome}

    def __str__(self) -> str:
        return "[" + ", ".join(str(e) for e in self.events) + f"] {self.outcome}"


def branch_trace(term: Union[Term, Program], r: Sequence[float], cfg: Optional[EvalConfig] = None,
                 params: Optional[Sequence[str]] = None) -> BranchTrace:
    program = as_program(term, params)
    cfg = (cfg or EvalConfig()).model_copy(update={"record_decisions": True})
    outcome = program.run([float(v) for v in r], Strategy.HEAD, cfg)
    return BranchTrace(tuple(outcome.decisions), outcome.kind)


# --- pre-trace relation ---

def type_pretrace(simple: TypeExpr, ty: TypeExpr) -> bool:
    """The pre-trace relation on types: R below R, arrows and products componentwise,
    and a product below A when every component is below A."""
    if isinstance(simple, Real):
        return isinstance(ty, Real)
    if isinstance(simple, Arrow):
        return isinstance(ty, Arrow) and type_pretrace(simple.domain, ty.domain) \
            and type_pretrace(simple.codomain, ty.codomain)
    if isinstance(simple, Product):
        if isinstance(ty, Product) and len(ty.components) == len(simple.components) \
                and all(type_pretrace(a, b) for a, b in zip(simple.components, ty.components)):
            return True
        return all(type_pretrace(c, ty) for c in simple.components)
    return False


@dataclass(frozen=True)
class _Assignment:
    target: str
    simple_type: TypeExpr
    target_type: TypeExpr


class _PretraceSearch:
    def __init__(self, fix_bound: int):
        self.fix_bound = fix_bound
        self.bound_hit = False

    def holds(self, xi: Dict[str, _Assignment], t: Term, m: Term) -> bool:
        if isinstance(m, Fix):
            return self._fix_rule(xi, t, m)
        if isinstance(m, Var):
            return self._variable_rule(xi, t, m)
        if isinstance(m, Cond):
            if not (isinstance(t, Proj) and t.width == 2 and isinstance(t.body, TupleTerm)
                    and len(t.body.components) == 2):
                return False
            first, second = t.body.components
            if not alpha_eq(first, second):
                return False
            branch = m.then_branch if t.index == 1 else m.else_branch
            return self.holds(xi, first, branch)
        if isinstance(m, Lam):
            if not isinstance(t, Lam) or not type_pretrace(t.binder_type, m.binder_type):
                return False
            inner = {**xi, t.binder: _Assignment(m.binder, t.binder_type, m.binder_type)}
            return self.holds(inner, t.body, m.body)
        if isinstance(m, App):
            if not isinstance(t, App) or not self.holds(xi, t.fun, m.fun):
                return False
            if self.holds(xi, t.arg, m.arg):
                return True
            if isinstance(t.arg, TupleTerm):
                return all(self.holds(xi, u, m.arg) for u in t.arg.components)
            return False
        if isinstance(m, TupleTerm):
            return isinstance(t, TupleTerm) and len(t.components) == len(m.components) \
                and all(self.holds(xi, a, b) for a, b in zip(t.components, m.components))
        if isinstance(m, Proj):
            return isinstance(t, Proj) and (t.index, t.width) == (m.index, m.width) and self.holds(xi, t.body, m.body)
        if isinstance(m, PrimApp):
            return isinstance(t, PrimApp) and t.symbol == m.symbol \
                and all(self.holds(xi, a, b) for a, b in zip(t.args, m.args))
        if isinstance(m, VecZero):
            return isinstance(t, VecZero) and t.width == m.width
        if isinstance(m, VecAdd):
            return isinstance(t, VecAdd) and t.width == m.width \
                and self.holds(xi, t.left, m.left) and self.holds(xi, t.right, m.right)
        return False

    def _variable_rule(self, xi: Dict[str, _Assignment], t: Term, m: Var) -> bool:
        # p below x, or pi_i^n p below x for a product-typed p
        width = None
        if isinstance(t, Proj) and isinstance(t.body, Var):
            width = t.width
            t = t.body
        if not isinstance(t, Var):
            return False
        assignment = xi.get(t.name)
        if assignment is None or assignment.target != m.name:
            return False
        simple_type = assignment.simple_type
        if width is not None:
            if not isinstance(simple_type, Product) or len(simple_type.components) != width:
                return False
        elif isinstance(simple_type, Product):
            # a bare product-typed p stands below no variable
            return False
        return type_pretrace(assignment.simple_type, assignment.target_type)

    def _fix_rule(self, xi: Dict[str, _Assignment], t: Term, m: Fix) -> bool:
        for n in range(1, self.fix_bound + 1):
            if self.holds(xi, t, fix_approx(m.binder, m.binder_type, m.body, n)):
                return True
        self.bound_hit = True
        return False


def pretrace_diagnose(t: Term, m: Term, fix_bound: int = DEFAULT_FIX_BOUND) -> PretraceResult:
    """Decides t below m by the syntax-directed rules; bound_hit reports a fixpoint search that gave up."""
    if not is_simple(t):
        raise NotSimple(t)
    if fix_bound < 1:
        raise ValueError(f"fix bound must be at least 1, got {fix_bound}")
    xi = {name: _Assignment(name, REAL, REAL) for name in m.free_vars}
    search = _PretraceSearch(fix_bound)
    holds = search.holds(xi, t, m)
    return PretraceResult(holds=holds, bound_hit=search.bound_hit and not holds)


def pretrace_check(t: Term, m: Term, fix_bound: int = DEFAULT_FIX_BOUND) -> bool:
    return pretrace_diagnose(t, m, fix_bound).holds


# --- stability ---

def sample_ball(rng: np.random.Generator, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    """Uniform points of the open ball by rejection in low dimension, of the box around it above that."""
    n = len(center)
    if n > BALL_REJECTION_MAX_DIM:
        return center + rng.uniform(-radius, radius, size=(count, n))
    points = []
    while len(points) < count:
        u = rng.uniform(-1.0, 1.0, size=n)
        if np.dot(u, u) < 1.0:
            points.append(center + radius * u)
    return np.array(points).reshape(count, n)


def stability_probe(term: Union[Term, Program], r: Sequence[float], radius: float = DEFAULT_RADIUS,
                    probes: int = DEFAULT_PROBES, seed: int = DEFAULT_SEED,
                    cfg: Optional[EvalConfig] = None) -> StabilityVerdict:
    """
    Compares the branch trace at r with the traces at `probes` random points of the ball
    of the given radius. Any fuel exhaustion makes the verdict Inconclusive; otherwise the
    first point whose trace differs is the witness of instability.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if probes < 2:
        raise ValueError(f"at least 2 probes are needed, got {probes}")
    program = as_program(term)
    if program.coarity != 1:
        raise IllTyped(f"stability is probed on coarity-1 programs, got coarity {program.coarity}")
    center = np.asarray(r, dtype=float)
    common = dict(center=center.tolist(), radius=radius, probes=probes)

    reference = branch_trace(program, center, cfg)
    if reference.outcome != "NormalForm":
        logging.warning(f"Center {center.tolist()} ended with {reference.outcome}; stability is inconclusive.")
        return StabilityVerdict(kind="Inconclusive", reason=f"center: {reference.outcome}", **common)

    rng = np.random.default_rng(seed)
    witness: Optional[List[float]] = None
    for point in sample_ball(rng, center, radius, probes):
        trace = branch_trace(program, point, cfg)
        if trace.outcome == "FuelExhausted":
            logging.warning(f"Probe {point.tolist()} ran out of fuel; stability is inconclusive.")
            return StabilityVerdict(kind="Inconclusive", reason=f"probe {point.tolist()}: FuelExhausted", **common)
        if witness is None and trace != reference:
            witness = point.tolist()
    if witness is not None:
        return StabilityVerdict(kind="UnstableEmpirical", witness=witness, **common)
    return StabilityVerdict(kind="StableEmpirical", **common)


# --- failure scan ---

def _scan_points(program: Program, points: np.ndarray, cfg: OracleConfig) -> List[SampleRecord]:
    strategy = Strategy.parse(cfg.strategy)
    records = []
    for point in points:
        coordinates = [float(v) for v in point]
        report = compare_at(program, coordinates, cfg)
        # a center without value always yields Undefined differences
        if report.fd_grad.kind == "Undefined" and program(coordinates, strategy, cfg.eval_config) is None:
            records.append(SampleRecord(point=coordinates, verdict="Divergent"))
            continue
        records.append(SampleRecord(
            point=coordinates,
            verdict=report.verdict.value,
            ad_forward=report.ad_forward,
            ad_reverse=report.ad_reverse,
            fd_grad=report.fd_grad.grad,
        ))
    return records


def _scan_chunk(term: Term, params: Tuple[str, ...], points: np.ndarray, cfg: OracleConfig) -> List[SampleRecord]:
    return _scan_points(Program(term, params), points, cfg)


def aggregate_scan(records: Sequence[SampleRecord], box: Sequence[Tuple[float, float]], seed: int) -> ScanReport:
    counts = {verdict: 0 for verdict in ("Divergent", *(v.value for v in Verdict))}
    fail_points = []
    for record in records:
        counts[record.verdict] += 1
        if record.verdict == Verdict.FAIL.value:
            fail_points.append(record.point)
    agree = counts[Verdict.AGREE.value]
    fail = counts[Verdict.FAIL.value]
    outside = counts[Verdict.OUTSIDE_DIFF_DOMAIN.value]
    return ScanReport(
        box=[(float(lo), float(hi)) for lo, hi in box],
        samples=len(records),
        seed=seed,
        evaluated=agree + fail + outside,
        divergent=counts["Divergent"],
        outside_diff_domain=outside,
        agree=agree,
        fail=fail,
        inconclusive=counts[Verdict.INCONCLUSIVE.value],
        fail_points=sorted(fail_points)[:FAIL_POINTS_CAP],
        fail_fraction=fail / max(1, agree + fail),
    )


def run_scan(term: Union[Term, Program], box: Sequence[Tuple[float, float]], samples: int, seed: int = DEFAULT_SEED,
             cfg: Optional[OracleConfig] = None, workers: int = 1) -> Tuple[ScanReport, List[SampleRecord]]:
    """failure_scan that also returns the per-sample records."""
    cfg = cfg or OracleConfig()
    program = as_program(term)
    if program.coarity != 1:
        raise IllTyped(f"failure scans need coarity-1 programs, got coarity {program.coarity}")
    if len(box) != program.arity:
        raise ValueError(f"box has {len(box)} axes, program has arity {program.arity}")
    if any(lo >= hi for lo, hi in box):
        raise ValueError(f"every axis needs lo < hi, got {list(box)}")
    if samples < 0:
        raise ValueError(f"sample count must be non-negative, got {samples}")

    lows = np.array([lo for lo, _ in box], dtype=float)
    highs = np.array([hi for _, hi in box], dtype=float)
    rng = np.random.default_rng(seed)
    points = rng.uniform(lows, highs, size=(samples, program.arity))
    logging.info(f"Scanning {samples} samples of {list(program.params)} over {list(box)} (seed {seed}, {workers} worker(s)).")

    if workers > 1 and program.registry is DEFAULT_REGISTRY and samples > 0:
        chunks = np.array_split(points, workers)
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_scan_chunk, program.term, program.params, chunk, cfg) for chunk in chunks]
            records = [record for future in futures for record in future.result()]
    else:
        records = _scan_points(program, points, cfg)

    report = aggregate_scan(records, box, seed)
    logging.info(
        f"Scan finished: {report.agree} agree, {report.fail} fail, {report.outside_diff_domain} outside the "
        f"differentiability domain, {report.divergent} divergent, {report.inconclusive} inconclusive."
    )
    return report, records


def failure_scan(term: Union[Term, Program], box: Sequence[Tuple[float, float]], samples: int,
                 seed: int = DEFAULT_SEED, cfg: Optional[OracleConfig] = None, workers: int = 1) -> ScanReport:
    """Seeded uniform sampling of the box with compare_at at every point."""
    report, _ = run_scan(term, box, samples, seed, cfg, workers)
    return report
