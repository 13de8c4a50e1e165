# src/errors.py

from typing import Optional, Sequence, Tuple

Span = Tuple[int, int]  # (line, column), 1-based


class PcfError(Exception):
    """Root of every error raised by the pcfr-lab library."""


# --- term construction ---

class SyntaxConstructionError(PcfError):
    pass


class NonFiniteNumeral(SyntaxConstructionError):
    def __init__(self, value: float):
        super().__init__(f"numerals must be finite, got {value!r}")
        self.value = value


class IndexOutOfRange(SyntaxConstructionError):
    def __init__(self, index: int, width: int):
        super().__init__(f"index {index} out of range 1..{width}")
        self.index = index
        self.width = width


class NonArrowFixType(SyntaxConstructionError):
    def __init__(self, ty):
        super().__init__(f"fixpoints live at arrow types, got {ty}")
        self.ty = ty


class NotSimple(PcfError):
    def __init__(self, term):
        super().__init__("expected a simple term (no conditionals, no fixpoints)")
        self.term = term


# --- typing ---

class TypingError(PcfError):
    """A typing rule failed. `span` locates the offending node when it was parsed."""

    def __init__(self, message: str, span: Optional[Span] = None):
        if span is not None:
            message = f"{message} (line {span[0]}, column {span[1]})"
        super().__init__(message)
        self.span = span


class UnboundVariable(TypingError):
    pass


class ArityMismatch(TypingError):
    pass


class BranchTypeMismatch(TypingError):
    pass


class NonArrowApplication(TypingError):
    pass


class ArgumentTypeMismatch(TypingError):
    pass


class ProjOnNonProduct(TypingError):
    pass


class GuardNotReal(TypingError):
    pass


class FixNotArrow(TypingError):
    pass


class PrimArgNotReal(TypingError):
    pass


class UnknownPrimitive(TypingError):
    pass


class IllTyped(PcfError):
    """A program-level precondition (x1:R..xn:R |- M : R^m) does not hold."""

    def __init__(self, message: str, cause: Optional[TypingError] = None):
        super().__init__(message)
        self.cause = cause


# --- evaluation and transformation ---

class PrimDomainError(PcfError):
    def __init__(self, symbol: str, args: Sequence[float]):
        super().__init__(f"{symbol} is undefined at {tuple(args)}")
        self.symbol = symbol
        self.args = tuple(args)


class MissingPartials(PcfError):
    def __init__(self, symbol: str):
        super().__init__(f"no registered partial derivatives for {symbol}")
        self.symbol = symbol


# --- surface syntax ---

class ParseError(PcfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
