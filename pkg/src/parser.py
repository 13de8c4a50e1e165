# src/parser.py

"""
Concrete syntax of PCF_R.

    type  ::= R | 1 | type -> type | ( type * ... * type ) | ( type )
    term  ::= \\x:type. term | fix f:type. term | if term then term else term
            | term + term | term - term | term * term | - term
            | term term | proj i k atom | <term, ..., term> | phi(term, ..., term)
            | vzero[n] | vadd[n](term, term) | decimal literal | identifier | ( term )

`if P then M else N` takes the then-branch when P <= 0 (so `\\x:R. if x then 0 else x`
is ReLU). A primitive application is written with no space before its parenthesis;
`f (x)` is an ordinary application. `-` directly followed by a literal is a negative
numeral. `--` starts a comment.
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from src.errors import ParseError, PcfError
from src.syntax import (
    ADD, MUL, NEG, SUB, UNIT, App, Arrow, Cond, Fix, Lam, PrimApp, PrimSymbol, Product, Proj, Real, REAL, Term,
    TupleTerm, TypeExpr, Var, VecAdd, VecZero, is_numeral, mk_numeral, numeral_value,
)

KEYWORDS = {"fix", "if", "then", "else", "proj", "vzero", "vadd"}
INFIX = {"+": ADD, "-": SUB, "*": MUL}

_TOKEN_SPEC = [
    ("COMMENT", r"--[^\n]*"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("NUMBER", r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?"),
    ("CALL", r"[A-Za-z_][A-Za-z0-9_']*(?=[(\[])"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_']*"),
    ("ARROW", r"->"),
    ("SYMBOL", r"[\\λ:.*+\-()<>,\[\]]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, IDENT, CALL, SYMBOL or EOF
    text: str
    line: int
    column: int

    @property
    def span(self) -> Tuple[int, int]:
        return (self.line, self.column)


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, position = 1, 0, 0
    while position < len(text):
        match = _TOKEN_RE.match(text, position)
        if match is None:
            raise ParseError(f"unexpected character {text[position]!r}", line, position - line_start + 1)
        kind, value = match.lastgroup, match.group()
        column = position - line_start + 1
        position = match.end()
        if kind == "NEWLINE":
            line += 1
            line_start = position
        elif kind in ("SKIP", "COMMENT"):
            continue
        elif kind == "ARROW":
            tokens.append(Token("SYMBOL", value, line, column))
        elif kind == "IDENT" and value in KEYWORDS:
            tokens.append(Token("KEYWORD", value, line, column))
        elif kind == "CALL" and value in KEYWORDS:
            tokens.append(Token("KEYWORD", value, line, column))
        else:
            tokens.append(Token(kind, value, line, column))
    tokens.append(Token("EOF", "", line, position - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.index = 0

    # --- token helpers ---

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        token = self.peek()
        self.index += 1
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token.kind in ("SYMBOL", "KEYWORD") and token.text == text

    def expect(self, text: str, context: str) -> Token:
        token = self.peek()
        if not self.at(text):
            found = "end of input" if token.kind == "EOF" else repr(token.text)
            raise ParseError(f"expected '{text}' {context}, found {found}", token.line, token.column)
        return self.advance()

    def expect_ident(self, context: str) -> Token:
        token = self.peek()
        if token.kind not in ("IDENT", "CALL"):
            found = "end of input" if token.kind == "EOF" else repr(token.text)
            raise ParseError(f"expected an identifier {context}, found {found}", token.line, token.column)
        return self.advance()

    def expect_int(self, context: str) -> int:
        token = self.peek()
        if token.kind != "NUMBER" or not token.text.isdigit():
            raise ParseError(f"expected a natural number {context}", token.line, token.column)
        self.advance()
        return int(token.text)

    def error(self, message: str) -> ParseError:
        token = self.peek()
        return ParseError(message, token.line, token.column)

    def finish(self) -> None:
        token = self.peek()
        if token.kind != "EOF":
            raise ParseError(f"unexpected {token.text!r} after the end of the term", token.line, token.column)

    # --- types ---

    def parse_type(self) -> TypeExpr:
        domain = self.parse_type_atom()
        if self.at("->"):
            self.advance()
            return Arrow(domain, self.parse_type())
        return domain

    def parse_type_atom(self) -> TypeExpr:
        token = self.peek()
        if token.kind == "IDENT" and token.text == "R":
            self.advance()
            return REAL
        if token.kind == "NUMBER" and token.text == "1":
            self.advance()
            return UNIT
        if self.at("("):
            self.advance()
            components = [self.parse_type()]
            while self.at("*"):
                self.advance()
                components.append(self.parse_type())
            self.expect(")", "to close a type")
            if len(components) == 1:
                return components[0]
            return Product(tuple(components))
        raise self.error("expected a type (R, 1, an arrow or a parenthesized product)")

    # --- terms ---

    def parse_term(self) -> Term:
        token = self.peek()
        if self.at("\\") or self.at("λ"):
            self.advance()
            name = self.expect_ident("after the lambda").text
            self.expect(":", "before the binder type")
            ty = self.parse_type()
            self.expect(".", "after the binder type")
            return Lam(name, ty, self.parse_term(), token.span)
        if self.at("fix"):
            self.advance()
            name = self.expect_ident("after fix").text
            self.expect(":", "before the fixpoint type")
            ty = self.parse_type()
            self.expect(".", "after the fixpoint type")
            body = self.parse_term()
            try:
                return Fix(name, ty, body, token.span)
            except PcfError as e:
                raise ParseError(str(e), token.line, token.column) from e
        if self.at("if"):
            self.advance()
            guard = self.parse_term()
            self.expect("then", "after the guard")
            then_branch = self.parse_term()
            self.expect("else", "after the then-branch")
            return Cond(guard, then_branch, self.parse_term(), token.span)
        return self.parse_additive()

    def parse_additive(self) -> Term:
        left = self.parse_multiplicative()
        while self.at("+") or self.at("-"):
            op = self.advance()
            right = self.parse_multiplicative()
            left = PrimApp(INFIX[op.text], (left, right), op.span)
        return left

    def parse_multiplicative(self) -> Term:
        left = self.parse_unary()
        while self.at("*"):
            op = self.advance()
            right = self.parse_unary()
            left = PrimApp(MUL, (left, right), op.span)
        return left

    def parse_unary(self) -> Term:
        if self.at("-"):
            op = self.advance()
            if self.peek().kind == "NUMBER":
                literal = self.advance()
                return self._numeral(literal, negate=True)
            return PrimApp(NEG, (self.parse_unary(),), op.span)
        return self.parse_application()

    def parse_application(self) -> Term:
        term = self.parse_primary()
        while self._starts_atom():
            term = App(term, self.parse_atom(), term.span)
        return term

    def parse_primary(self) -> Term:
        if self.at("proj"):
            token = self.advance()
            index = self.expect_int("as the projection index")
            width = self.expect_int("as the projection width")
            body = self.parse_atom()
            if not 1 <= index <= width:
                raise ParseError(f"projection index {index} out of range 1..{width}", token.line, token.column)
            return body if width == 1 else Proj(index, width, body, token.span)
        return self.parse_atom()

    def _starts_atom(self) -> bool:
        token = self.peek()
        if token.kind in ("NUMBER", "IDENT", "CALL"):
            return True
        return self.at("(") or self.at("<") or self.at("vzero") or self.at("vadd")

    def _numeral(self, literal: Token, negate: bool = False) -> Term:
        value = float(literal.text)
        try:
            numeral = mk_numeral(-value if negate else value)
        except PcfError as e:
            raise ParseError(str(e), literal.line, literal.column) from e
        return PrimApp(numeral.symbol, (), literal.span)

    def _width(self) -> int:
        self.expect("[", "before the vector width")
        width = self.expect_int("as the vector width")
        self.expect("]", "after the vector width")
        return width

    def _arguments(self) -> List[Term]:
        self.expect("(", "to open the argument list")
        args: List[Term] = []
        if not self.at(")"):
            args.append(self.parse_term())
            while self.at(","):
                self.advance()
                args.append(self.parse_term())
        self.expect(")", "to close the argument list")
        return args

    def parse_atom(self) -> Term:
        token = self.peek()
        if token.kind == "NUMBER":
            self.advance()
            return self._numeral(token)
        if token.kind == "IDENT":
            self.advance()
            return Var(token.text, token.span)
        if token.kind == "CALL":
            self.advance()
            args = self._arguments()
            return PrimApp(PrimSymbol(token.text, len(args)), tuple(args), token.span)
        if self.at("vzero"):
            self.advance()
            return VecZero(self._width(), token.span)
        if self.at("vadd"):
            self.advance()
            width = self._width()
            args = self._arguments()
            if len(args) != 2:
                raise ParseError(f"vadd takes 2 arguments, got {len(args)}", token.line, token.column)
            return VecAdd(width, args[0], args[1], token.span)
        if self.at("("):
            self.advance()
            term = self.parse_term()
            self.expect(")", "to close the parenthesis")
            return term
        if self.at("<"):
            self.advance()
            components: List[Term] = []
            if not self.at(">"):
                components.append(self.parse_term())
                while self.at(","):
                    self.advance()
                    components.append(self.parse_term())
            self.expect(">", "to close the tuple")
            if len(components) == 1:
                return components[0]
            return TupleTerm(tuple(components), token.span)
        found = "end of input" if token.kind == "EOF" else repr(token.text)
        raise ParseError(f"expected a term, found {found}", token.line, token.column)


def parse(text: str) -> Term:
    """Parses a term; raises ParseError with the line and column of the problem."""
    parser = _Parser(text)
    term = parser.parse_term()
    parser.finish()
    return term


def parse_type(text: str) -> TypeExpr:
    parser = _Parser(text)
    ty = parser.parse_type()
    parser.finish()
    return ty


# --- printing ---

_TERM, _ADDITIVE, _MULTIPLICATIVE, _UNARY, _APPLICATION, _ATOM = range(6)


def print_type(ty: TypeExpr) -> str:
    return str(ty)


def _level(term: Term) -> int:
    if isinstance(term, (Lam, Fix, Cond)):
        return _TERM
    if isinstance(term, PrimApp):
        if is_numeral(term):
            return _UNARY if str(numeral_value(term)).startswith("-") else _ATOM
        if term.symbol in (ADD, SUB):
            return _ADDITIVE
        if term.symbol == MUL:
            return _MULTIPLICATIVE
        if term.symbol == NEG:
            return _UNARY
        return _ATOM
    if isinstance(term, (App, Proj)):
        return _APPLICATION
    return _ATOM


def _print(term: Term, required: int) -> str:
    text = _print_bare(term)
    return f"({text})" if _level(term) < required else text


def _print_bare(term: Term) -> str:
    if isinstance(term, Var):
        return term.name
    if isinstance(term, Lam):
        return f"\\{term.binder}:{term.binder_type}. {_print(term.body, _TERM)}"
    if isinstance(term, Fix):
        return f"fix {term.binder}:{term.binder_type}. {_print(term.body, _TERM)}"
    if isinstance(term, Cond):
        return (f"if {_print(term.guard, _TERM)} then {_print(term.then_branch, _TERM)} "
                f"else {_print(term.else_branch, _TERM)}")
    if isinstance(term, App):
        return f"{_print(term.fun, _APPLICATION)} {_print(term.arg, _ATOM)}"
    if isinstance(term, Proj):
        return f"proj {term.index} {term.width} {_print(term.body, _ATOM)}"
    if isinstance(term, TupleTerm):
        return "<" + ", ".join(_print(c, _TERM) for c in term.components) + ">"
    if isinstance(term, VecZero):
        return f"vzero[{term.width}]"
    if isinstance(term, VecAdd):
        return f"vadd[{term.width}]({_print(term.left, _TERM)}, {_print(term.right, _TERM)})"
    if isinstance(term, PrimApp):
        if is_numeral(term):
            return repr(numeral_value(term))
        symbol = term.symbol
        if symbol in (ADD, SUB):
            op = "+" if symbol == ADD else "-"
            return f"{_print(term.args[0], _ADDITIVE)} {op} {_print(term.args[1], _MULTIPLICATIVE)}"
        if symbol == MUL:
            return f"{_print(term.args[0], _MULTIPLICATIVE)} * {_print(term.args[1], _UNARY)}"
        if symbol == NEG:
            operand = term.args[0]
            if is_numeral(operand):
                return f"-({_print_bare(operand)})"
            text = _print(operand, _UNARY)
            return f"- {text}" if text.startswith("-") else f"-{text}"
        return f"{symbol.name}(" + ", ".join(_print(a, _TERM) for a in term.args) + ")"
    raise TypeError(f"not a term: {term!r}")


def print_term(term: Term) -> str:
    """Renders term so that parse(print_term(term)) is alpha-equivalent to it."""
    return _print(term, _TERM)
