# src/ad_transform.py

"""
Forward and reverse AD as source-to-source transformations of PCF_R terms,
and the gradient programs built from them.

Forward mode pairs every real with its tangent block, D(R) = R x R^n (the block
is R when n = 1). Reverse mode pairs every real with a backpropagator,
D(R) = R x (R -> R^n). Arrows and products are transformed componentwise.
"""

import logging
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

from src.config import LOG_FORMAT, LOG_LEVEL
from src.errors import IllTyped, PrimDomainError
from src.machine import Machine, OutOfFuel, reals
from src.models import EvalConfig
from src.primitives import DEFAULT_REGISTRY, PrimRegistry
from src.evaluator import SHARED_STRATEGIES, NormalForm, Program, Strategy, as_program, decode_values, normalize
from src.syntax import (
    REAL, App, Arrow, Cond, Fix, Lam, PrimApp, Product, Proj, Real, Term, TupleTerm, TypeExpr, Var, VecAdd, VecZero,
    apply, cap_fixpoints, expand_vector_sugar, iota, lam, mk_numeral, mul, proj_term, real_power, subst, sum_terms,
    term_size, tuple_term, vec_sum,
)
from src.typecheck import TypingEnv

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)


class AdMode(str, Enum):
    FORWARD = "fwd"
    REVERSE = "rev"

    @classmethod
    def parse(cls, value: Union[str, "AdMode"]) -> "AdMode":
        if isinstance(value, AdMode):
            return value
        aliases = {"forward": cls.FORWARD, "reverse": cls.REVERSE}
        return aliases.get(value, None) or cls(value)


def _check_width(n: int) -> None:
    if n < 1:
        raise ValueError(f"the number of input directions must be at least 1, got {n}")


def ad_type(ty: TypeExpr, mode: AdMode, n: int) -> TypeExpr:
    _check_width(n)
    mode = AdMode.parse(mode)
    if isinstance(ty, Real):
        if mode is AdMode.FORWARD:
            return Product((REAL, real_power(n)))
        return Product((REAL, Arrow(REAL, real_power(n))))
    if isinstance(ty, Arrow):
        return Arrow(ad_type(ty.domain, mode, n), ad_type(ty.codomain, mode, n))
    if isinstance(ty, Product):
        return Product(tuple(ad_type(c, mode, n) for c in ty.components))
    raise TypeError(f"not a type: {ty!r}")


def ad_env(env: TypingEnv, mode: AdMode, n: int) -> TypingEnv:
    return TypingEnv((name, ad_type(ty, mode, n)) for name, ty in env)


def _primal(z: Term) -> Term:
    return Proj(1, 2, z)


def _dual(z: Term) -> Term:
    return Proj(2, 2, z)


def _prim_template(term: PrimApp, mode: AdMode, n: int, registry: PrimRegistry) -> Term:
    """
    The transform of phi(M1..Mk), emitted as the administrative redex
    (\\z1..zk. <phi(pi1 z), derivative part>) D(M1) .. D(Mk).
    """
    symbol = term.symbol
    partials = registry.partials(symbol)
    k = symbol.arity
    zs = [Var(f"z{i}") for i in range(1, k + 1)]
    primals = tuple(_primal(z) for z in zs)
    value = PrimApp(symbol, primals) if k else PrimApp(symbol)
    scales = [PrimApp(partial, primals) for partial in partials]

    if mode is AdMode.FORWARD:
        tangents = [
            sum_terms([mul(scale, proj_term(j, n, _dual(z))) for scale, z in zip(scales, zs)])
            for j in range(1, n + 1)
        ]
        body = TupleTerm((value, tuple_term(tangents)))
    else:
        a = Var("a")
        contributions = [App(_dual(z), mul(scale, a)) for scale, z in zip(scales, zs)]
        body = TupleTerm((value, Lam("a", REAL, vec_sum(n, contributions))))

    binder_type = ad_type(REAL, mode, n)
    template = lam([(z.name, binder_type) for z in zs], body)
    return apply(template, *(ad_term(arg, mode, n, registry) for arg in term.args))


def ad_term(term: Term, mode: AdMode, n: int, registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    """
    The AD transform of term. Variables, abstractions, applications, tuples,
    projections and fixpoints are mapped homomorphically; a conditional tests the
    primal part of its transformed guard.
    Raises MissingPartials for a primitive without registered derivatives.
    """
    _check_width(n)
    mode = AdMode.parse(mode)
    if isinstance(term, Var):
        return term
    if isinstance(term, PrimApp):
        return _prim_template(term, mode, n, registry)
    if isinstance(term, Lam):
        return Lam(term.binder, ad_type(term.binder_type, mode, n), ad_term(term.body, mode, n, registry))
    if isinstance(term, App):
        return App(ad_term(term.fun, mode, n, registry), ad_term(term.arg, mode, n, registry))
    if isinstance(term, TupleTerm):
        return TupleTerm(tuple(ad_term(c, mode, n, registry) for c in term.components))
    if isinstance(term, Proj):
        return Proj(term.index, term.width, ad_term(term.body, mode, n, registry))
    if isinstance(term, Cond):
        return Cond(
            _primal(ad_term(term.guard, mode, n, registry)),
            ad_term(term.then_branch, mode, n, registry),
            ad_term(term.else_branch, mode, n, registry),
        )
    if isinstance(term, Fix):
        return Fix(term.binder, ad_type(term.binder_type, mode, n), ad_term(term.body, mode, n, registry))
    if isinstance(term, (VecZero, VecAdd)):
        return ad_term(expand_vector_sugar(term), mode, n, registry)
    raise TypeError(f"not a term: {term!r}")


def fwd_term(term: Term, n: int, registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    return ad_term(term, AdMode.FORWARD, n, registry)


def rev_term(term: Term, n: int, registry: PrimRegistry = DEFAULT_REGISTRY) -> Term:
    return ad_term(term, AdMode.REVERSE, n, registry)


def _seed_term(i: int, n: int, r: Term, mode: AdMode) -> Term:
    injection = iota(i, n)
    if mode is AdMode.FORWARD:
        return TupleTerm((r, App(injection, mk_numeral(1.0))))
    return TupleTerm((r, injection))


def _seed(i: int, n: int, r: float, mode: AdMode) -> Term:
    """<r, iota_i^n 1> in forward mode, <r, iota_i^n> in reverse mode."""
    return _seed_term(i, n, mk_numeral(r), mode)


def _gradient_part(body: Term, mode: AdMode) -> Term:
    if mode is AdMode.FORWARD:
        return _dual(body)
    return App(_dual(body), mk_numeral(1.0))


def _transformed(program: Program, mode: AdMode, n: Optional[int]) -> Tuple[int, Term]:
    if program.coarity != 1:
        raise IllTyped(f"gradients need coarity 1, program has coarity {program.coarity}")
    if n is None:
        n = program.arity
    if n != program.arity:
        raise IllTyped(f"program has arity {program.arity}, gradient requested for n = {n}")
    if n == 0:
        raise IllTyped("a program without parameters has no gradient")
    return n, program.memo(("ad", mode, n), lambda: ad_term(program.term, mode, n, program.registry))


def _check_point(r: Sequence[float], n: int) -> None:
    if len(r) != n:
        raise IllTyped(f"gradient point must have {n} coordinates, got {len(r)}")


def grad_program(term: Union[Term, Program], mode: AdMode, n: Optional[int] = None,
                 params: Optional[Sequence[str]] = None) -> Callable[[Sequence[float]], Term]:
    """
    A builder mapping a point r in R^n to the closed gradient term:
    pi2 D(M){<r_i, iota_i 1>/x_i} in forward mode and (pi2 D(M){<r_i, iota_i>/x_i}) 1 in reverse mode.
    Raises IllTyped unless the term is a program of arity n and coarity 1.
    """
    mode = AdMode.parse(mode)
    program = as_program(term, params)
    n, transformed = _transformed(program, mode, n)

    def build(r: Sequence[float]) -> Term:
        _check_point(r, n)
        body = transformed
        for i, (name, value) in enumerate(zip(program.params, r), start=1):
            body = subst(body, name, _seed(i, n, float(value), mode))
        return _gradient_part(body, mode)

    return build


class _SharedGradient:
    """The gradient term compiled once: its body over the parameters, and one seed per parameter."""

    def __init__(self, program: Program, mode: AdMode, n: int, transformed: Term, fix_cap: Optional[int]):
        if fix_cap is not None:
            transformed = cap_fixpoints(transformed, fix_cap)
        self.machine = Machine(program.registry)
        self.code = self.machine.compile(_gradient_part(transformed, mode), program.params)
        self.seeds = [self.machine.compile(_seed_term(i, n, Var("r"), mode), ("r",)) for i in range(1, n + 1)]

    def __call__(self, r: Sequence[float], fuel: int) -> Optional[List[float]]:
        machine = self.machine
        machine.fuel = fuel
        seeds = [machine.run(seed, [float(value)]) for seed, value in zip(self.seeds, r)]
        return reals(machine.run(self.code, seeds))


def gradient(term: Union[Term, Program], mode: AdMode, r: Sequence[float],
             strategy: Strategy = Strategy.HEAD, cfg: Optional[EvalConfig] = None,
             params: Optional[Sequence[str]] = None) -> Optional[List[float]]:
    """The AD gradient at r, or None when the gradient term does not normalize to numerals."""
    mode = AdMode.parse(mode)
    strategy = Strategy.parse(strategy)
    cfg = cfg or EvalConfig()
    program = as_program(term, params)
    if strategy in SHARED_STRATEGIES:
        n, transformed = _transformed(program, mode, None)
        _check_point(r, n)
        shared = program.memo(
            ("ad-machine", mode, cfg.fix_cap), lambda: _SharedGradient(program, mode, n, transformed, cfg.fix_cap)
        )
        try:
            return shared(r, cfg.fuel)
        except (OutOfFuel, PrimDomainError) as e:
            logging.debug(f"{mode.value} gradient at {list(r)} has no value: {e!r}")
            return None
        except RecursionError:
            logging.debug(f"{mode.value} gradient at {list(r)} nested too deeply; reducing step by step.")
    gradient_term = grad_program(program, mode, params=params)(r)
    outcome = normalize(gradient_term, strategy, cfg, program.registry)
    if not isinstance(outcome, NormalForm):
        logging.debug(f"{mode.value} gradient at {list(r)} ended with {outcome.kind}.")
        return None
    return decode_values(outcome.term)


def jacobian_rows(term: Union[Term, Program], mode: AdMode, r: Sequence[float],
                  strategy: Strategy = Strategy.HEAD, cfg: Optional[EvalConfig] = None,
                  params: Optional[Sequence[str]] = None) -> List[Optional[List[float]]]:
    """One gradient row per output of a coarity-m program."""
    program = as_program(term, params)
    rows = []
    for i in range(1, program.coarity + 1):
        row_program = Program(proj_term(i, program.coarity, program.term), program.params, program.registry)
        rows.append(gradient(row_program, mode, r, strategy, cfg))
    return rows


def transform_size_curve(term: Term, mode: AdMode, n_range: Sequence[int],
                         registry: PrimRegistry = DEFAULT_REGISTRY) -> List[Tuple[int, int]]:
    return [(n, term_size(ad_term(term, mode, n, registry))) for n in n_range]
