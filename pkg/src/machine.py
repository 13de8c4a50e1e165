# src/machine.py

"""
Shared evaluation of PCF_R programs by compiling terms into Python closures.

Variables live in positional environments and arguments are passed as memoizing
thunks, so an argument is reduced at most once however often it is used. The
order in which redexes are contracted is the head order: guards before
branches, primitive arguments left to right, output components left to right.
A program therefore has a value here exactly when head reduction reaches the
same numerals, and fails on the same primitive domain errors.

Every contraction (beta, projection, primitive, conditional, fixpoint
unfolding, vector expansion) spends one unit of fuel. Sharing skips repeated
contractions, so a run never spends more than head reduction of the same term.
"""

import logging
from typing import Any, Callable, List, Optional, Sequence, Tuple

from src.config import LOG_FORMAT, LOG_LEVEL
from src.primitives import DEFAULT_REGISTRY, PrimRegistry
from src.syntax import (
    App, Cond, Fix, Lam, PrimApp, Proj, Term, TupleTerm, Var, VecAdd, VecZero, ADD, is_numeral,
)

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)

Env = Tuple[Any, ...]
Code = Callable[[Env], Any]


class OutOfFuel(Exception):
    """The fuel budget ran out before a value was reached."""


class _Ready:
    __slots__ = ("value",)

    def __init__(self, value: Any):
        self.value = value

    def force(self) -> Any:
        return self.value


class _Thunk:
    __slots__ = ("code", "env", "value")

    def __init__(self, code: Code, env: Env):
        self.code = code
        self.env = env
        self.value = None

    def force(self) -> Any:
        code = self.code
        if code is None:
            return self.value
        value = code(self.env)
        self.value, self.code, self.env = value, None, None
        return value


def _slot(scope: Tuple[str, ...], name: str) -> int:
    for index in range(len(scope) - 1, -1, -1):
        if scope[index] == name:
            return index
    raise ValueError(f"unbound variable {name!r}")


def reals(value: Any) -> Optional[List[float]]:
    """The reals of a numeral value or of a tuple of numerals, None for functions."""
    if isinstance(value, float):
        return [value]
    if isinstance(value, tuple):
        result = []
        for component in value:
            component = component.force()
            if not isinstance(component, float):
                return None
            result.append(component)
        return result
    return None


class Machine:
    """
    Compiles terms into closures over positional environments. All code compiled
    by one machine draws on the same fuel counter.
    """

    def __init__(self, registry: PrimRegistry = DEFAULT_REGISTRY):
        self.registry = registry
        self.fuel = 0
        self._add = registry.bind(ADD)

    def run(self, code: Code, bindings: Sequence[Any], fuel: Optional[int] = None) -> Any:
        """
        The value of compiled code with its scope bound to the given values
        (floats for reals). A fuel of None keeps spending the current budget.
        Raises OutOfFuel, PrimDomainError, or RecursionError for very deep runs.
        """
        if fuel is not None:
            self.fuel = fuel
        return code(tuple(_Ready(value) for value in bindings))

    def compile(self, term: Term, scope: Sequence[str] = ()) -> Code:
        return self._compile(term, tuple(scope))

    def _spend(self, amount: int = 1) -> None:
        self.fuel -= amount
        if self.fuel < 0:
            raise OutOfFuel()

    def _maker(self, term: Term, scope: Tuple[str, ...]) -> Callable[[Env], Any]:
        """Builds the suspended argument for term without reducing anything."""
        if isinstance(term, Var):
            index = _slot(scope, term.name)
            return lambda env: env[index]
        if is_numeral(term):
            ready = _Ready(term.symbol.value)
            return lambda env: ready
        code = self._compile(term, scope)
        return lambda env: _Thunk(code, env)

    def _compile(self, term: Term, scope: Tuple[str, ...]) -> Code:
        if isinstance(term, Var):
            index = _slot(scope, term.name)
            return lambda env: env[index].force()
        if isinstance(term, PrimApp):
            return self._compile_prim(term, scope)
        if isinstance(term, Lam):
            body = self._compile(term.body, scope + (term.binder,))
            return lambda env: (lambda thunk: body(env + (thunk,)))
        if isinstance(term, App):
            return self._compile_app(term, scope)
        if isinstance(term, Cond):
            return self._compile_cond(term, scope)
        if isinstance(term, TupleTerm):
            makers = [self._maker(c, scope) for c in term.components]
            return lambda env: tuple([make(env) for make in makers])
        if isinstance(term, Proj):
            return self._compile_proj(term, scope)
        if isinstance(term, Fix):
            return self._compile_fix(term, scope)
        if isinstance(term, VecZero):
            return self._compile_zero(term)
        if isinstance(term, VecAdd):
            return self._compile_vec_add(term, scope)
        raise TypeError(f"not a term: {term!r}")

    def _compile_prim(self, term: PrimApp, scope: Tuple[str, ...]) -> Code:
        if term.symbol.is_numeral:
            value = term.symbol.value
            return lambda env: value
        interpret = self.registry.bind(term.symbol)
        codes = [self._compile(arg, scope) for arg in term.args]
        spend = self._spend
        if len(codes) == 1:
            (only,) = codes

            def unary(env: Env) -> float:
                x = only(env)
                spend()
                return interpret(x)
            return unary
        if len(codes) == 2:
            left, right = codes

            def binary(env: Env) -> float:
                x = left(env)
                y = right(env)
                spend()
                return interpret(x, y)
            return binary

        def general(env: Env) -> float:
            values = [code(env) for code in codes]
            spend()
            return interpret(*values)
        return general

    def _compile_app(self, term: App, scope: Tuple[str, ...]) -> Code:
        args = []
        head: Term = term
        while isinstance(head, App):
            args.append(head.arg)
            head = head.fun
        args.reverse()
        makers = [self._maker(arg, scope) for arg in args]
        spend = self._spend

        if isinstance(head, Lam):
            # direct redexes bind their arguments without building closures
            binders = []
            body: Term = head
            while isinstance(body, Lam) and len(binders) < len(args):
                binders.append(body.binder)
                body = body.body
            direct, rest = makers[:len(binders)], makers[len(binders):]
            count = len(direct)
            body_code = self._compile(body, scope + tuple(binders))

            def redex(env: Env) -> Any:
                spend(count)
                value = body_code(env + tuple([make(env) for make in direct]))
                for make in rest:
                    spend()
                    value = value(make(env))
                return value
            return redex

        fun = self._compile(head, scope)

        def application(env: Env) -> Any:
            value = fun(env)
            for make in makers:
                spend()
                value = value(make(env))
            return value
        return application

    def _compile_cond(self, term: Cond, scope: Tuple[str, ...]) -> Code:
        guard = self._compile(term.guard, scope)
        then_branch = self._compile(term.then_branch, scope)
        else_branch = self._compile(term.else_branch, scope)
        spend = self._spend

        def cond(env: Env) -> Any:
            if guard(env) <= 0:
                spend()
                return then_branch(env)
            spend()
            return else_branch(env)
        return cond

    def _compile_proj(self, term: Proj, scope: Tuple[str, ...]) -> Code:
        body = self._compile(term.body, scope)
        index = term.index - 1
        spend = self._spend

        def proj(env: Env) -> Any:
            components = body(env)
            spend()
            return components[index].force()
        return proj

    def _compile_fix(self, term: Fix, scope: Tuple[str, ...]) -> Code:
        body = self._compile(term.body, scope + (term.binder,))
        spend = self._spend

        # fix f M -> M{\x.(fix f M) x / f}
        def fix(env: Env) -> Any:
            spend()

            def recurse(thunk: Any) -> Any:
                value = fix(env)
                spend()
                return value(thunk)
            return body(env + (_Ready(recurse),))
        return fix

    def _compile_zero(self, term: VecZero) -> Code:
        spend = self._spend
        zero: Any = 0.0 if term.width == 1 else tuple(_Ready(0.0) for _ in range(term.width))

        def vec_zero(env: Env) -> Any:
            spend()
            return zero
        return vec_zero

    def _compile_vec_add(self, term: VecAdd, scope: Tuple[str, ...]) -> Code:
        left = self._compile(term.left, scope)
        right = self._compile(term.right, scope)
        spend = self._spend
        add = self._add

        if term.width == 1:
            def scalar_sum(env: Env) -> float:
                spend()
                x = left(env)
                y = right(env)
                spend()
                return add(x, y)
            return scalar_sum

        def component(index: int) -> Code:
            def sum_at(pair: Env) -> float:
                x = pair[0].force()
                spend()
                x = x[index].force()
                y = pair[1].force()
                spend()
                y = y[index].force()
                spend()
                return add(x, y)
            return sum_at

        components = [component(i) for i in range(term.width)]

        def vector_sum(env: Env) -> Any:
            spend()
            pair = (_Thunk(left, env), _Thunk(right, env))
            return tuple([_Thunk(code, pair) for code in components])
        return vector_sum
