# src/primitives.py

import logging
import math
import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from src.config import LOG_FORMAT, LOG_LEVEL
from src.errors import MissingPartials, PrimDomainError
from src.syntax import PrimSymbol

logging.basicConfig(level=LOG_LEVEL, format=LOG_FORMAT)


@dataclass(frozen=True)
class PrimEntry:
    """
    A registered primitive: its arity, its (partial) interpretation and the names
    of its partial derivatives, one per argument.
    The analytic flag documents the admissibility contract; nothing checks it.
    """
    name: str
    arity: int
    evaluate: Callable[..., float]
    partials: Tuple[str, ...]
    analytic: bool = True

    @property
    def symbol(self) -> PrimSymbol:
        return PrimSymbol(self.name, self.arity)


_POW_FAMILY = re.compile(r"^pow_c(m?\d+)_e(m?\d+)$")
_RATIO_FAMILY = re.compile(r"^ratio_c(m?\d+)_e(m?\d+)_e(m?\d+)$")


def _decode_int(text: str) -> int:
    return -int(text[1:]) if text.startswith("m") else int(text)


def _encode_int(value: int) -> str:
    return f"m{-value}" if value < 0 else str(value)


def pow_name(coefficient: int, exponent: int) -> str:
    """Name of the unary monomial coefficient * x^exponent."""
    if coefficient == 0:
        return "zero1"
    return f"pow_c{_encode_int(coefficient)}_e{_encode_int(exponent)}"


def ratio_name(coefficient: int, exp_x: int, exp_y: int) -> str:
    """Name of the binary monomial coefficient * x^exp_x * y^exp_y."""
    if coefficient == 0:
        return "zero2"
    return f"ratio_c{_encode_int(coefficient)}_e{_encode_int(exp_x)}_e{_encode_int(exp_y)}"


def _pow_entry(name: str, coefficient: int, exponent: int) -> PrimEntry:
    return PrimEntry(
        name=name,
        arity=1,
        evaluate=lambda x: coefficient * x ** exponent,
        partials=(pow_name(coefficient * exponent, exponent - 1),),
    )


def _ratio_entry(name: str, coefficient: int, exp_x: int, exp_y: int) -> PrimEntry:
    return PrimEntry(
        name=name,
        arity=2,
        evaluate=lambda x, y: coefficient * x ** exp_x * y ** exp_y,
        partials=(
            ratio_name(coefficient * exp_x, exp_x - 1, exp_y),
            ratio_name(coefficient * exp_y, exp_x, exp_y - 1),
        ),
    )


class PrimRegistry:
    """Maps primitive names to their interpretation and derivative symbols."""

    def __init__(self, entries: Iterable[PrimEntry] = (), families: bool = True):
        self._entries: Dict[str, PrimEntry] = {}
        self.families = families
        for entry in entries:
            self.register(entry)

    def register(self, entry: PrimEntry) -> None:
        if entry.name in self._entries:
            logging.warning(f"Primitive '{entry.name}' registered twice; keeping the later entry.")
        self._entries[entry.name] = entry

    def names(self) -> List[str]:
        return sorted(self._entries)

    def entries(self) -> List[PrimEntry]:
        return [self._entries[name] for name in self.names()]

    def lookup(self, name: str) -> Optional[PrimEntry]:
        """The named entry, or the family member with this name, or None."""
        entry = self._entries.get(name)
        if entry is not None or not self.families:
            return entry
        match = _POW_FAMILY.match(name)
        if match:
            return _pow_entry(name, _decode_int(match.group(1)), _decode_int(match.group(2)))
        match = _RATIO_FAMILY.match(name)
        if match:
            return _ratio_entry(name, *(_decode_int(g) for g in match.groups()))
        return None

    def knows(self, symbol: PrimSymbol) -> bool:
        if symbol.is_numeral:
            return True
        entry = self.lookup(symbol.name)
        return entry is not None and entry.arity == symbol.arity

    def evaluate(self, symbol: PrimSymbol, args: Sequence[float]) -> float:
        """Interprets symbol at args; NaN, infinities and arithmetic errors are domain errors."""
        return self.bind(symbol)(*args)

    def bind(self, symbol: PrimSymbol) -> Callable[..., float]:
        """The checked interpretation of symbol, looked up once."""
        if symbol.is_numeral:
            value = symbol.value
            return lambda: value
        name = symbol.name
        entry = self.lookup(name)
        if entry is None:
            def unknown(*args: float) -> float:
                raise PrimDomainError(name, args)
            return unknown
        interpret = entry.evaluate

        def checked(*args: float) -> float:
            try:
                value = float(interpret(*args))
            except (ArithmeticError, ValueError, TypeError) as e:
                logging.debug(f"{name}{args} raised {e!r}")
                raise PrimDomainError(name, args) from e
            if not math.isfinite(value):
                raise PrimDomainError(name, args)
            return value
        return checked

    def partials(self, symbol: PrimSymbol) -> Tuple[PrimSymbol, ...]:
        """The symbols of the partial derivatives of symbol, one per argument."""
        if symbol.is_numeral:
            return ()
        entry = self.lookup(symbol.name)
        if entry is None or len(entry.partials) != entry.arity:
            raise MissingPartials(symbol.name)
        result = []
        for partial in entry.partials:
            derivative = self.lookup(partial)
            if derivative is None or derivative.arity != entry.arity:
                raise MissingPartials(symbol.name)
            result.append(derivative.symbol)
        return tuple(result)


def registry_check(registry: PrimRegistry) -> List[str]:
    """Returns the violations of closure under differentiation; an empty list means ok."""
    violations: List[str] = []
    for entry in registry.entries():
        if len(entry.partials) != entry.arity:
            violations.append(f"{entry.name}: partials length {len(entry.partials)} ≠ {entry.arity}")
            continue
        for index, partial in enumerate(entry.partials, start=1):
            derivative = registry.lookup(partial)
            if derivative is None:
                violations.append(f"{entry.name}: unregistered derivative '{partial}' for argument {index}")
            elif derivative.arity != entry.arity:
                violations.append(
                    f"{entry.name}: derivative '{partial}' has arity {derivative.arity}, expected {entry.arity}")
    if violations:
        logging.warning(f"Registry check found {len(violations)} violation(s).")
    return violations


def _constant(name: str, arity: int, value: float) -> PrimEntry:
    zero = "zero1" if arity == 1 else "zero2"
    return PrimEntry(name=name, arity=arity, evaluate=lambda *args: value, partials=(zero,) * arity)


def _log(x: float) -> float:
    if x <= 0:
        raise ValueError("log is defined on positive reals")
    return math.log(x)


def default_entries() -> List[PrimEntry]:
    return [
        PrimEntry("add", 2, lambda x, y: x + y, ("one2", "one2")),
        PrimEntry("sub", 2, lambda x, y: x - y, ("one2", "negone2")),
        PrimEntry("mul", 2, lambda x, y: x * y, ("snd2", "fst2")),
        PrimEntry("neg", 1, lambda x: -x, ("negone1",)),
        PrimEntry("fst2", 2, lambda x, y: x, ("one2", "zero2")),
        PrimEntry("snd2", 2, lambda x, y: y, ("zero2", "one2")),
        _constant("zero1", 1, 0.0),
        _constant("one1", 1, 1.0),
        _constant("negone1", 1, -1.0),
        _constant("zero2", 2, 0.0),
        _constant("one2", 2, 1.0),
        _constant("negone2", 2, -1.0),
        PrimEntry("sin", 1, math.sin, ("cos",)),
        PrimEntry("cos", 1, math.cos, ("negsin",)),
        PrimEntry("negsin", 1, lambda x: -math.sin(x), ("negcos",)),
        PrimEntry("negcos", 1, lambda x: -math.cos(x), ("sin",)),
        PrimEntry("exp", 1, math.exp, ("exp",)),
        PrimEntry("log", 1, _log, (pow_name(1, -1),)),
        PrimEntry("div", 2, lambda x, y: x / y, (ratio_name(1, 0, -1), ratio_name(-1, 1, -2))),
    ]


DEFAULT_REGISTRY = PrimRegistry(default_entries())
