# src/syntax.py

"""
Abstract syntax of PCF_R: types, terms and the syntactic operations the rest of
the package is built on (capture-avoiding substitution, alpha-equivalence,
injections, fixpoint approximants, term size).

Terms are immutable frozen dataclasses and may be shared freely between
evaluations. Variables are named; substitution renames binders when needed.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from src.errors import IndexOutOfRange, NonArrowFixType, NonFiniteNumeral, Span, SyntaxConstructionError


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class Real:
    def __str__(self) -> str:
        return "R"


@dataclass(frozen=True)
class Arrow:
    domain: "TypeExpr"
    codomain: "TypeExpr"

    def __str__(self) -> str:
        left = f"({self.domain})" if isinstance(self.domain, Arrow) else str(self.domain)
        return f"{left} -> {self.codomain}"


@dataclass(frozen=True)
class Product:
    components: Tuple["TypeExpr", ...]

    def __post_init__(self):
        if len(self.components) == 1:
            raise SyntaxConstructionError("unary products are identities; build them with product_type")

    def __str__(self) -> str:
        if not self.components:
            return "1"
        return "(" + " * ".join(f"({c})" if isinstance(c, Arrow) else str(c) for c in self.components) + ")"


TypeExpr = Union[Real, Arrow, Product]

REAL = Real()
UNIT = Product(())


def product_type(components: Sequence[TypeExpr]) -> TypeExpr:
    """A1 x ... x Ak, with the unary product identified with its component."""
    components = tuple(components)
    if len(components) == 1:
        return components[0]
    return Product(components)


def real_power(n: int) -> TypeExpr:
    """R^n (R for n = 1, the unit type for n = 0)."""
    return product_type([REAL] * n)


def is_ground_power(ty: TypeExpr) -> Optional[int]:
    """Returns m when ty is R^m, None otherwise."""
    if isinstance(ty, Real):
        return 1
    if isinstance(ty, Product) and all(isinstance(c, Real) for c in ty.components):
        return len(ty.components)
    return None


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class PrimSymbol:
    """A function symbol of the given arity. Numerals are nullary symbols carrying their value."""
    name: str
    arity: int
    value: Optional[float] = None

    @property
    def is_numeral(self) -> bool:
        return self.value is not None


class TermNode:
    """Shared behaviour of all term classes."""

    @cached_property
    def free_vars(self) -> FrozenSet[str]:
        return _compute_free_vars(self)


@dataclass(frozen=True)
class Var(TermNode):
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PrimApp(TermNode):
    symbol: PrimSymbol
    args: Tuple["Term", ...] = ()
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.args) != self.symbol.arity:
            raise SyntaxConstructionError(
                f"{self.symbol.name} expects {self.symbol.arity} arguments, got {len(self.args)}")


@dataclass(frozen=True)
class Lam(TermNode):
    binder: str
    binder_type: TypeExpr
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App(TermNode):
    fun: "Term"
    arg: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TupleTerm(TermNode):
    components: Tuple["Term", ...]
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.components) == 1:
            raise SyntaxConstructionError("unary tuples are identities; build them with tuple_term")


@dataclass(frozen=True)
class Proj(TermNode):
    index: int
    width: int
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not 1 <= self.index <= self.width:
            raise IndexOutOfRange(self.index, self.width)
        if self.width == 1:
            raise SyntaxConstructionError("unary projections are identities; build them with proj_term")


@dataclass(frozen=True)
class Cond(TermNode):
    """if guard <= 0 then then_branch else else_branch."""
    guard: "Term"
    then_branch: "Term"
    else_branch: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Fix(TermNode):
    binder: str
    binder_type: TypeExpr
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class VecZero(TermNode):
    """The zero of R^width; expands to a tuple of zero numerals."""
    width: int
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class VecAdd(TermNode):
    """Componentwise sum of two R^width values; expands to a tuple of scalar sums."""
    width: int
    left: "Term"
    right: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Term = Union[Var, PrimApp, Lam, App, TupleTerm, Proj, Cond, Fix, VecZero, VecAdd]

ADD = PrimSymbol("add", 2)
SUB = PrimSymbol("sub", 2)
MUL = PrimSymbol("mul", 2)
NEG = PrimSymbol("neg", 1)


# ---------------------------------------------------------------------------
# Smart constructors

def mk_numeral(r: float) -> PrimApp:
    r = float(r)
    if not math.isfinite(r):
        raise NonFiniteNumeral(r)
    return PrimApp(PrimSymbol(repr(r), 0, r))


def is_numeral(term: "Term") -> bool:
    return isinstance(term, PrimApp) and term.symbol.value is not None


def numeral_value(term: "Term") -> float:
    if not is_numeral(term):
        raise ValueError(f"not a numeral: {term!r}")
    return term.symbol.value


def prim(name: str, *args: "Term") -> PrimApp:
    return PrimApp(PrimSymbol(name, len(args)), tuple(args))


def add(left: "Term", right: "Term") -> PrimApp:
    return PrimApp(ADD, (left, right))


def mul(left: "Term", right: "Term") -> PrimApp:
    return PrimApp(MUL, (left, right))


def sum_terms(terms: Sequence["Term"]) -> "Term":
    """n-ary sum as left-nested binary additions; the empty sum is 0."""
    if not terms:
        return mk_numeral(0.0)
    result = terms[0]
    for term in terms[1:]:
        result = add(result, term)
    return result


def tuple_term(components: Sequence["Term"]) -> "Term":
    components = tuple(components)
    if len(components) == 1:
        return components[0]
    return TupleTerm(components)


def proj_term(index: int, width: int, body: "Term") -> "Term":
    if not 1 <= index <= width:
        raise IndexOutOfRange(index, width)
    if width == 1:
        return body
    return Proj(index, width, body)


def lam(binders: Sequence[Tuple[str, TypeExpr]], body: "Term") -> "Term":
    for name, ty in reversed(list(binders)):
        body = Lam(name, ty, body)
    return body


def apply(fun: "Term", *args: "Term") -> "Term":
    for arg in args:
        fun = App(fun, arg)
    return fun


def vec_add(width: int, left: "Term", right: "Term") -> "Term":
    return VecAdd(width, left, right)


def vec_sum(width: int, terms: Sequence["Term"]) -> "Term":
    """Left-nested VecAdd of R^width values; the empty sum is VecZero."""
    if not terms:
        return VecZero(width)
    result = terms[0]
    for term in terms[1:]:
        result = VecAdd(width, result, term)
    return result


def expand_vector_sugar(term: "Term") -> "Term":
    """One expansion step of VecZero / VecAdd into plain tuples and scalar sums."""
    if isinstance(term, VecZero):
        return tuple_term([mk_numeral(0.0)] * term.width)
    if isinstance(term, VecAdd):
        n = term.width
        return tuple_term([
            add(proj_term(i, n, term.left), proj_term(i, n, term.right))
            for i in range(1, n + 1)
        ])
    raise ValueError(f"not a vector sugar node: {term!r}")


# ---------------------------------------------------------------------------
# Variables

def _compute_free_vars(term: "Term") -> FrozenSet[str]:
    if isinstance(term, Var):
        return frozenset((term.name,))
    if isinstance(term, (Lam, Fix)):
        return term.body.free_vars - {term.binder}
    if isinstance(term, VecZero):
        return frozenset()
    result: FrozenSet[str] = frozenset()
    for child in children(term):
        result = result | child.free_vars
    return result


def free_vars(term: "Term") -> FrozenSet[str]:
    return term.free_vars


def program_variables(term: "Term") -> List[str]:
    """Free variables in order of first (leftmost) occurrence."""
    seen: List[str] = []

    def walk(node, bound):
        if isinstance(node, Var):
            if node.name not in bound and node.name not in seen:
                seen.append(node.name)
        elif isinstance(node, (Lam, Fix)):
            walk(node.body, bound | {node.binder})
        else:
            for child in children(node):
                walk(child, bound)

    walk(term, frozenset())
    return seen


def children(term: "Term") -> Tuple["Term", ...]:
    if isinstance(term, (Var, VecZero)):
        return ()
    if isinstance(term, PrimApp):
        return term.args
    if isinstance(term, (Lam, Fix)):
        return (term.body,)
    if isinstance(term, App):
        return (term.fun, term.arg)
    if isinstance(term, TupleTerm):
        return term.components
    if isinstance(term, Proj):
        return (term.body,)
    if isinstance(term, Cond):
        return (term.guard, term.then_branch, term.else_branch)
    if isinstance(term, VecAdd):
        return (term.left, term.right)
    raise TypeError(f"not a term: {term!r}")


def fresh_name(base: str, avoid: FrozenSet[str]) -> str:
    """First of base_1, base_2, ... not in avoid."""
    stem = base.rsplit("_", 1)[0] if base.rsplit("_", 1)[-1].isdigit() else base
    index = 1
    while f"{stem}_{index}" in avoid:
        index += 1
    return f"{stem}_{index}"


def subst(term: "Term", name: str, replacement: "Term") -> "Term":
    """Capture-avoiding substitution term{replacement/name}."""
    if name not in term.free_vars:
        return term
    if isinstance(term, Var):
        return replacement
    if isinstance(term, (Lam, Fix)):
        binder, body = term.binder, term.body
        if binder in replacement.free_vars:
            new_binder = fresh_name(binder, body.free_vars | replacement.free_vars | {name})
            body = subst(body, binder, Var(new_binder))
            binder = new_binder
        return type(term)(binder, term.binder_type, subst(body, name, replacement), term.span)
    if isinstance(term, PrimApp):
        return PrimApp(term.symbol, tuple(subst(a, name, replacement) for a in term.args), term.span)
    if isinstance(term, App):
        return App(subst(term.fun, name, replacement), subst(term.arg, name, replacement), term.span)
    if isinstance(term, TupleTerm):
        return TupleTerm(tuple(subst(c, name, replacement) for c in term.components), term.span)
    if isinstance(term, Proj):
        return Proj(term.index, term.width, subst(term.body, name, replacement), term.span)
    if isinstance(term, Cond):
        return Cond(subst(term.guard, name, replacement),
                    subst(term.then_branch, name, replacement),
                    subst(term.else_branch, name, replacement), term.span)
    if isinstance(term, VecAdd):
        return VecAdd(term.width, subst(term.left, name, replacement),
                      subst(term.right, name, replacement), term.span)
    raise TypeError(f"not a term: {term!r}")


def subst_many(term: "Term", bindings: Dict[str, "Term"]) -> "Term":
    """Sequential substitution of closed terms for several variables."""
    for name, replacement in bindings.items():
        term = subst(term, name, replacement)
    return term


def alpha_eq(left: "Term", right: "Term") -> bool:
    return _alpha_eq(left, right, {}, {}, 0)


def _alpha_eq(m, n, env_m: Dict[str, int], env_n: Dict[str, int], depth: int) -> bool:
    if type(m) is not type(n):
        return False
    if isinstance(m, Var):
        bound_m, bound_n = env_m.get(m.name), env_n.get(n.name)
        if bound_m is None and bound_n is None:
            return m.name == n.name
        return bound_m == bound_n
    if isinstance(m, (Lam, Fix)):
        if m.binder_type != n.binder_type:
            return False
        return _alpha_eq(m.body, n.body, {**env_m, m.binder: depth}, {**env_n, n.binder: depth}, depth + 1)
    if isinstance(m, PrimApp):
        if m.symbol != n.symbol:
            return False
    elif isinstance(m, Proj):
        if (m.index, m.width) != (n.index, n.width):
            return False
    elif isinstance(m, (VecZero, VecAdd)):
        if m.width != n.width:
            return False
    kids_m, kids_n = children(m), children(n)
    if len(kids_m) != len(kids_n):
        return False
    return all(_alpha_eq(a, b, env_m, env_n, depth) for a, b in zip(kids_m, kids_n))


# ---------------------------------------------------------------------------
# Derived terms

def iota(i: int, n: int) -> "Term":
    """The injection of R into R^n at position i: \\x:R. <0,..,x,..,0>."""
    if not 1 <= i <= n:
        raise IndexOutOfRange(i, n)
    x = Var("x")
    return Lam("x", REAL, tuple_term([x if j == i else mk_numeral(0.0) for j in range(1, n + 1)]))


def omega(ty: TypeExpr) -> "Term":
    """The divergent term of an arrow type: fix g. g."""
    if not isinstance(ty, Arrow):
        raise NonArrowFixType(ty)
    return Fix("g", ty, Var("g"))


def fix_approx(f: str, ty: TypeExpr, body: "Term", k: Optional[Union[int, float]]) -> "Term":
    """
    The k-th approximant of fix f:ty. body:
    0 gives Omega, k+1 gives (\\f. body)(\\x. (fix_k f body) x), None or inf gives the fixpoint itself.
    """
    if not isinstance(ty, Arrow):
        raise NonArrowFixType(ty)
    if k is None or k == math.inf:
        return Fix(f, ty, body)
    if k < 0:
        raise ValueError(f"approximant depth must be non-negative, got {k}")
    approx = omega(ty)
    x = fresh_name("x", body.free_vars | {f})
    for _ in range(int(k)):
        approx = App(Lam(f, ty, body), Lam(x, ty.domain, App(approx, Var(x))))
    return approx


def cap_fixpoints(term: "Term", k: int) -> "Term":
    """Replaces every Fix of term (innermost first) by its k-th approximant."""
    if isinstance(term, Fix):
        return fix_approx(term.binder, term.binder_type, cap_fixpoints(term.body, k), k)
    return map_children(term, lambda child: cap_fixpoints(child, k))


def map_children(term: "Term", fn) -> "Term":
    if isinstance(term, (Var, VecZero)):
        return term
    if isinstance(term, PrimApp):
        return PrimApp(term.symbol, tuple(fn(a) for a in term.args), term.span)
    if isinstance(term, Lam):
        return Lam(term.binder, term.binder_type, fn(term.body), term.span)
    if isinstance(term, Fix):
        return Fix(term.binder, term.binder_type, fn(term.body), term.span)
    if isinstance(term, App):
        return App(fn(term.fun), fn(term.arg), term.span)
    if isinstance(term, TupleTerm):
        return TupleTerm(tuple(fn(c) for c in term.components), term.span)
    if isinstance(term, Proj):
        return Proj(term.index, term.width, fn(term.body), term.span)
    if isinstance(term, Cond):
        return Cond(fn(term.guard), fn(term.then_branch), fn(term.else_branch), term.span)
    if isinstance(term, VecAdd):
        return VecAdd(term.width, fn(term.left), fn(term.right), term.span)
    raise TypeError(f"not a term: {term!r}")


def term_size(term: "Term") -> int:
    """Node count; binders, widths and type annotations are not counted separately."""
    return 1 + sum(term_size(child) for child in children(term))


def is_simple(term: "Term") -> bool:
    """True iff the term contains no conditional and no fixpoint."""
    if isinstance(term, (Cond, Fix)):
        return False
    return all(is_simple(child) for child in children(term))
