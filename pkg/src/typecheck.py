# src/typecheck.py

from typing import Iterable, Iterator, Optional, Sequence, Tuple

from src.errors import (
    ArgumentTypeMismatch, ArityMismatch, BranchTypeMismatch, FixNotArrow, GuardNotReal, IllTyped,
    NonArrowApplication, PrimArgNotReal, ProjOnNonProduct, TypingError, UnboundVariable, UnknownPrimitive,
)
from src.primitives import DEFAULT_REGISTRY, PrimRegistry
from src.syntax import (
    REAL, App, Arrow, Cond, Fix, Lam, PrimApp, Product, Proj, Term, TupleTerm, TypeExpr, Var, VecAdd, VecZero,
    is_ground_power, is_simple, product_type, program_variables, real_power,
)

__all__ = ["TypingEnv", "infer", "check_program", "require_program", "is_simple"]


class TypingEnv:
    """An ordered typing context; later bindings shadow earlier ones."""

    def __init__(self, bindings: Iterable[Tuple[str, TypeExpr]] = ()):
        self._bindings: Tuple[Tuple[str, TypeExpr], ...] = tuple(bindings)

    @classmethod
    def ground(cls, names: Sequence[str]) -> "TypingEnv":
        """x1:R, ..., xn:R"""
        return cls((name, REAL) for name in names)

    def extend(self, name: str, ty: TypeExpr) -> "TypingEnv":
        return TypingEnv(self._bindings + ((name, ty),))

    def lookup(self, name: str) -> Optional[TypeExpr]:
        for bound, ty in reversed(self._bindings):
            if bound == name:
                return ty
        return None

    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self._bindings)

    def __iter__(self) -> Iterator[Tuple[str, TypeExpr]]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __repr__(self) -> str:
        return "TypingEnv(" + ", ".join(f"{n}: {t}" for n, t in self._bindings) + ")"


def infer(env: TypingEnv, term: Term, registry: PrimRegistry = DEFAULT_REGISTRY) -> TypeExpr:
    """The unique type of term under env; raises a TypingError subclass when no rule applies."""
    if isinstance(term, Var):
        ty = env.lookup(term.name)
        if ty is None:
            raise UnboundVariable(f"unbound variable '{term.name}'", term.span)
        return ty

    if isinstance(term, PrimApp):
        symbol = term.symbol
        if not symbol.is_numeral:
            entry = registry.lookup(symbol.name)
            if entry is None:
                raise UnknownPrimitive(f"unknown primitive '{symbol.name}'", term.span)
            if entry.arity != len(term.args):
                raise ArityMismatch(
                    f"'{symbol.name}' has arity {entry.arity}, applied to {len(term.args)} arguments", term.span)
        for index, arg in enumerate(term.args, start=1):
            arg_type = infer(env, arg, registry)
            if arg_type != REAL:
                raise PrimArgNotReal(
                    f"argument {index} of '{symbol.name}' has type {arg_type}, expected R", arg.span or term.span)
        return REAL

    if isinstance(term, Lam):
        return Arrow(term.binder_type, infer(env.extend(term.binder, term.binder_type), term.body, registry))

    if isinstance(term, App):
        fun_type = infer(env, term.fun, registry)
        if not isinstance(fun_type, Arrow):
            raise NonArrowApplication(f"cannot apply a term of type {fun_type}", term.span)
        arg_type = infer(env, term.arg, registry)
        if arg_type != fun_type.domain:
            raise ArgumentTypeMismatch(
                f"argument has type {arg_type}, function expects {fun_type.domain}", term.arg.span or term.span)
        return fun_type.codomain

    if isinstance(term, TupleTerm):
        return product_type([infer(env, c, registry) for c in term.components])

    if isinstance(term, Proj):
        body_type = infer(env, term.body, registry)
        if not isinstance(body_type, Product) or len(body_type.components) != term.width:
            raise ProjOnNonProduct(
                f"proj {term.index} {term.width} applied to a term of type {body_type}", term.span)
        return body_type.components[term.index - 1]

    if isinstance(term, Cond):
        guard_type = infer(env, term.guard, registry)
        if guard_type != REAL:
            raise GuardNotReal(f"conditional guard has type {guard_type}, expected R", term.guard.span or term.span)
        then_type = infer(env, term.then_branch, registry)
        else_type = infer(env, term.else_branch, registry)
        if then_type != else_type:
            raise BranchTypeMismatch(f"branches have types {then_type} and {else_type}", term.span)
        return then_type

    if isinstance(term, Fix):
        if not isinstance(term.binder_type, Arrow):
            raise FixNotArrow(f"fixpoint binder has type {term.binder_type}, expected an arrow", term.span)
        body_type = infer(env.extend(term.binder, term.binder_type), term.body, registry)
        if body_type != term.binder_type:
            raise FixNotArrow(f"fixpoint body has type {body_type}, expected {term.binder_type}", term.span)
        return term.binder_type

    if isinstance(term, VecZero):
        return real_power(term.width)

    if isinstance(term, VecAdd):
        expected = real_power(term.width)
        for side in (term.left, term.right):
            side_type = infer(env, side, registry)
            if side_type != expected:
                raise ArgumentTypeMismatch(
                    f"vector sum operand has type {side_type}, expected {expected}", side.span or term.span)
        return expected

    raise TypeError(f"not a term: {term!r}")


def program_coarity(term: Term, params: Sequence[str], registry: PrimRegistry = DEFAULT_REGISTRY) -> int:
    """m such that params:R |- term : R^m; raises IllTyped otherwise."""
    if len(set(params)) != len(params):
        raise IllTyped(f"duplicate program parameters in {list(params)}")
    try:
        ty = infer(TypingEnv.ground(params), term, registry)
    except TypingError as e:
        raise IllTyped(f"not a program over {list(params)}: {e}", cause=e) from e
    coarity = is_ground_power(ty)
    if coarity is None:
        raise IllTyped(f"program type {ty} is not of the form R^m")
    return coarity


def require_program(term: Term, params: Optional[Sequence[str]] = None, coarity: Optional[int] = None,
                    registry: PrimRegistry = DEFAULT_REGISTRY) -> int:
    """Checks that term is a program over params (default: its free variables) and returns its coarity."""
    if params is None:
        params = program_variables(term)
    m = program_coarity(term, params, registry)
    if coarity is not None and m != coarity:
        raise IllTyped(f"program has coarity {m}, expected {coarity}")
    return m


def check_program(term: Term, n: int, m: int, params: Optional[Sequence[str]] = None,
                  registry: PrimRegistry = DEFAULT_REGISTRY) -> bool:
    """
    True iff x1:R, ..., xn:R |- term : R^m.
    Without explicit params the free variables of term play the role of x1..xn;
    parameters that do not occur in the term are allowed.
    """
    if params is None:
        params = program_variables(term)
        if len(params) > n:
            return False
    elif len(params) != n:
        return False
    try:
        return program_coarity(term, params, registry) == m
    except IllTyped:
        return False
