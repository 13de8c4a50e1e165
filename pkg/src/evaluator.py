# src/evaluator.py

"""
Small-step reduction of PCF_R under a choice of deterministic strategies.

Rules: beta, projection, primitive application on numerals, `ite r M N`
(then-branch iff r <= 0, so -0.0 also selects it) and fixpoint unfolding
`fix f M -> M{\\x.(fix f M) x / f}`. Every strategy reduces a conditional's
guard before choosing a branch. Divergence is only detected by running out of fuel.

Programs called for their value under `head` or `cbn` run on the shared machine of
src/machine.py, which reaches the same numerals with at most as much fuel; `run`,
traces and the other strategies always reduce step by step.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from src.config import LOG_FORMAT, LOG_LEVEL
from src.errors import IllTyped, PrimDomainError
from src.machine import Machine, OutOfFuel, reals
from src.models import EvalConfig
from src.primitives import DEFAULT_REGISTRY, PrimRegistry
from src.syntax import (
    App, Cond, Fix, Lam, PrimApp, Proj, Term, TupleTerm, Var, VecAdd, VecZero,
    cap_fixpoints, expand_vector_sugar, fresh_name, is_numeral, mk_numeral, numeral_value, program_variables, subst,
)
from src.typecheck import require_program

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)


class Strategy(str, Enum):
    HEAD = "head"  # leftmost-outermost among head contexts
    CBV = "cbv"
    CBN = "cbn"
    FULL = "full"  # leftmost-outermost among all contexts

    @classmethod
    def parse(cls, value: Union[str, "Strategy"]) -> "Strategy":
        return value if isinstance(value, Strategy) else cls(value)


# never reduce an argument before it is needed
SHARED_STRATEGIES = frozenset((Strategy.HEAD, Strategy.CBN))


class Branch(str, Enum):
    THEN = "then"
    ELSE = "else"


@dataclass(frozen=True)
class CondTaken:
    branch: Branch
    guard_value: float = field(compare=False)

    def __str__(self) -> str:
        return f"CondTaken({self.branch.value}, {self.guard_value!r})"


@dataclass(frozen=True)
class FixUnfolded:
    binder: str

    def __str__(self) -> str:
        return f"FixUnfolded({self.binder})"


Event = Union[CondTaken, FixUnfolded]
DecisionLog = List[Event]


# --- outcomes ---

@dataclass
class NormalForm:
    term: Term
    steps: int
    decisions: DecisionLog = field(default_factory=list)
    kind = "NormalForm"


@dataclass
class FuelExhausted:
    steps: int
    decisions: DecisionLog = field(default_factory=list)
    kind = "FuelExhausted"


@dataclass
class PrimDomainFailure:
    symbol: str
    args: Tuple[float, ...]
    steps: int
    decisions: DecisionLog = field(default_factory=list)
    kind = "PrimDomainError"


@dataclass
class Stuck:
    term: Term
    steps: int
    decisions: DecisionLog = field(default_factory=list)
    kind = "Stuck"


EvalOutcome = Union[NormalForm, FuelExhausted, PrimDomainFailure, Stuck]


# --- values ---

def is_value(term: Term) -> bool:
    """Call-by-value values: lambdas, numerals and tuples of values."""
    if isinstance(term, Lam) or is_numeral(term):
        return True
    if isinstance(term, TupleTerm):
        return all(is_value(c) for c in term.components)
    return False


def decode_values(term: Term) -> Optional[List[float]]:
    """The reals of a numeral or a tuple of numerals, None for anything else."""
    if is_numeral(term):
        return [numeral_value(term)]
    if isinstance(term, TupleTerm) and all(is_numeral(c) for c in term.components):
        return [numeral_value(c) for c in term.components]
    return None


# --- one step ---

class _Stepper:
    """Finds and fires the unique redex selected by a strategy."""

    def __init__(self, strategy: Strategy, registry: PrimRegistry):
        self.strategy = strategy
        self.registry = registry

    def step(self, term: Term, on_output_spine: bool = True) -> Optional[Tuple[Term, Optional[Event]]]:
        fired = self._contract(term)
        if fired is not None:
            return fired
        return self._descend(term, on_output_spine)

    def _contract(self, term: Term) -> Optional[Tuple[Term, Optional[Event]]]:
        cbv = self.strategy is Strategy.CBV
        if isinstance(term, App) and isinstance(term.fun, Lam):
            if cbv and not is_value(term.arg):
                return None
            return subst(term.fun.body, term.fun.binder, term.arg), None
        if isinstance(term, Proj) and isinstance(term.body, TupleTerm):
            if cbv and not is_value(term.body):
                return None
            return term.body.components[term.index - 1], None
        if isinstance(term, PrimApp) and not term.symbol.is_numeral and all(is_numeral(a) for a in term.args):
            value = self.registry.evaluate(term.symbol, [numeral_value(a) for a in term.args])
            return mk_numeral(value), None
        if isinstance(term, Cond) and is_numeral(term.guard):
            guard = numeral_value(term.guard)
            if guard <= 0:
                return term.then_branch, CondTaken(Branch.THEN, guard)
            return term.else_branch, CondTaken(Branch.ELSE, guard)
        if isinstance(term, Fix):
            return unfold_fix(term), FixUnfolded(term.binder)
        if isinstance(term, (VecZero, VecAdd)):
            return expand_vector_sugar(term), None
        return None

    def _descend(self, term: Term, on_output_spine: bool) -> Optional[Tuple[Term, Optional[Event]]]:
        strategy = self.strategy
        if isinstance(term, PrimApp):
            for index, arg in enumerate(term.args):
                fired = self.step(arg, False)
                if fired is not None:
                    args = term.args[:index] + (fired[0],) + term.args[index + 1:]
                    return PrimApp(term.symbol, args, term.span), fired[1]
            return None
        if isinstance(term, App):
            fired = self.step(term.fun, False)
            if fired is not None:
                return App(fired[0], term.arg, term.span), fired[1]
            if strategy in (Strategy.CBV, Strategy.FULL):
                fired = self.step(term.arg, False)
                if fired is not None:
                    return App(term.fun, fired[0], term.span), fired[1]
            return None
        if isinstance(term, TupleTerm):
            # Call-by-name only forces tuples that form the program's output.
            if strategy is Strategy.CBN and not on_output_spine:
                return None
            for index, component in enumerate(term.components):
                fired = self.step(component, on_output_spine)
                if fired is not None:
                    components = term.components[:index] + (fired[0],) + term.components[index + 1:]
                    return TupleTerm(components, term.span), fired[1]
            return None
        if isinstance(term, Proj):
            fired = self.step(term.body, False)
            if fired is not None:
                return Proj(term.index, term.width, fired[0], term.span), fired[1]
            return None
        if isinstance(term, Cond):
            fired = self.step(term.guard, False)
            if fired is not None:
                return Cond(fired[0], term.then_branch, term.else_branch, term.span), fired[1]
            if strategy is Strategy.FULL:
                fired = self.step(term.then_branch, False)
                if fired is not None:
                    return Cond(term.guard, fired[0], term.else_branch, term.span), fired[1]
                fired = self.step(term.else_branch, False)
                if fired is not None:
                    return Cond(term.guard, term.then_branch, fired[0], term.span), fired[1]
            return None
        if isinstance(term, Lam) and strategy is Strategy.FULL:
            fired = self.step(term.body, False)
            if fired is not None:
                return Lam(term.binder, term.binder_type, fired[0], term.span), fired[1]
        return None


def unfold_fix(term: Fix) -> Term:
    """fix f M -> M{\\x.(fix f M) x / f} with x fresh."""
    x = "x" if "x" not in term.free_vars else fresh_name("x", term.free_vars)
    unfolding = Lam(x, term.binder_type.domain, App(term, Var(x)))
    return subst(term.body, term.binder, unfolding)


def step(term: Term, strategy: Strategy = Strategy.HEAD,
         registry: PrimRegistry = DEFAULT_REGISTRY) -> Optional[Tuple[Term, Optional[Event]]]:
    """
    Fires the redex the strategy selects. Returns the reduct and the decision event
    (CondTaken / FixUnfolded, None for other rules), or None when no redex is selected.
    Raises PrimDomainError when a primitive is undefined at its numeral arguments.
    """
    return _Stepper(Strategy.parse(strategy), registry).step(term)


def _is_result(term: Term) -> bool:
    if isinstance(term, Lam) or is_numeral(term):
        return True
    if isinstance(term, TupleTerm):
        return all(_is_result(c) for c in term.components)
    return False


def normalize(term: Term, strategy: Strategy = Strategy.HEAD, cfg: Optional[EvalConfig] = None,
              registry: PrimRegistry = DEFAULT_REGISTRY) -> EvalOutcome:
    """Steps until no redex is left, the fuel runs out, or a primitive is undefined."""
    cfg = cfg or EvalConfig()
    if cfg.fix_cap is not None:
        term = cap_fixpoints(term, cfg.fix_cap)
    stepper = _Stepper(Strategy.parse(strategy), registry)
    decisions: DecisionLog = []
    steps = 0
    while True:
        try:
            fired = stepper.step(term)
        except PrimDomainError as e:
            logging.debug(f"Primitive domain error after {steps} steps: {e}")
            return PrimDomainFailure(e.symbol, e.args, steps, decisions)
        if fired is None:
            break
        if steps >= cfg.fuel:
            logging.debug(f"Fuel exhausted after {steps} steps.")
            return FuelExhausted(steps, decisions)
        term, event = fired
        steps += 1
        if event is not None and cfg.record_decisions:
            decisions.append(event)
    if _is_result(term):
        return NormalForm(term, steps, decisions)
    logging.debug(f"Stuck after {steps} steps.")
    return Stuck(term, steps, decisions)


# --- programs ---

class Program:
    """
    A term together with its parameter order x1..xn, checked once at construction.
    Parameters default to the free variables in order of first occurrence.
    """

    def __init__(self, term: Term, params: Optional[Sequence[str]] = None,
                 registry: PrimRegistry = DEFAULT_REGISTRY):
        self.term = term
        self.params: Tuple[str, ...] = tuple(params) if params is not None else tuple(program_variables(term))
        self.registry = registry
        self.coarity = require_program(term, self.params, registry=registry)
        self._memo: Dict[Any, Any] = {}

    @property
    def arity(self) -> int:
        return len(self.params)

    def memo(self, key: Any, build: Callable[[], Any]) -> Any:
        """Caches per-program derived data (transformed terms, for instance)."""
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    def instantiate(self, args: Sequence[float]) -> Term:
        """The closed term term{r1/x1, ..., rn/xn}."""
        if len(args) != self.arity:
            raise IllTyped(f"program expects {self.arity} arguments {list(self.params)}, got {len(args)}")
        term = self.term
        for name, value in zip(self.params, args):
            term = subst(term, name, mk_numeral(float(value)))
        return term

    def run(self, args: Sequence[float], strategy: Strategy = Strategy.HEAD,
            cfg: Optional[EvalConfig] = None) -> EvalOutcome:
        return normalize(self.instantiate(args), strategy, cfg, self.registry)

    def compiled(self, fix_cap: Optional[int] = None) -> Tuple[Machine, Callable]:
        """The program body compiled once per fixpoint cap, with the parameters as its scope."""
        def build() -> Tuple[Machine, Callable]:
            term = self.term if fix_cap is None else cap_fixpoints(self.term, fix_cap)
            machine = Machine(self.registry)
            return machine, machine.compile(term, self.params)
        return self.memo(("machine", fix_cap), build)

    def __call__(self, args: Sequence[float], strategy: Strategy = Strategy.HEAD,
                 cfg: Optional[EvalConfig] = None) -> Optional[List[float]]:
        strategy = Strategy.parse(strategy)
        cfg = cfg or EvalConfig()
        if strategy in SHARED_STRATEGIES:
            if len(args) != self.arity:
                raise IllTyped(f"program expects {self.arity} arguments {list(self.params)}, got {len(args)}")
            machine, code = self.compiled(cfg.fix_cap)
            try:
                return reals(machine.run(code, [float(a) for a in args], cfg.fuel))
            except (OutOfFuel, PrimDomainError):
                return None
            except RecursionError:
                logging.debug(f"Shared evaluation at {list(args)} nested too deeply; reducing step by step.")
        outcome = self.run(args, strategy, cfg)
        if isinstance(outcome, NormalForm):
            return decode_values(outcome.term)
        return None

    def __repr__(self) -> str:
        return f"Program(params={list(self.params)}, coarity={self.coarity})"


def as_program(term_or_program: Union[Term, Program], params: Optional[Sequence[str]] = None,
               registry: PrimRegistry = DEFAULT_REGISTRY) -> Program:
    if isinstance(term_or_program, Program):
        return term_or_program
    return Program(term_or_program, params, registry)


def eval_program(term: Union[Term, Program], args: Sequence[float], strategy: Strategy = Strategy.HEAD,
                 cfg: Optional[EvalConfig] = None, params: Optional[Sequence[str]] = None) -> Optional[List[float]]:
    """
    The denotation of a program at args: the decoded numerals of its normal form, or
    None for divergence, fuel exhaustion and primitive domain errors.
    Raises IllTyped when term is not a program of arity len(args).
    """
    program = as_program(term, params)
    return program(args, Strategy.parse(strategy), cfg)
