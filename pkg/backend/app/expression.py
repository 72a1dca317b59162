"""Textual radial potentials g(S): tokenizer, recursive-descent parser, AST.

Grammar
-------
    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := NUMBER | "S" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := "exp" | "log" | "sqrt" | "sin" | "cos"

``pow(a, b)`` is accepted as a spelling of ``a ^ b`` and parses to the same node.
``^`` is right-associative and binds looser than unary minus, so ``-S^2`` is
``(-S)^2``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

from .errors import PotentialSyntaxError, UnknownIdentifier

VARIABLE = "S"
FUNCTIONS = frozenset({"exp", "log", "sqrt", "sin", "cos"})
CONSTANTS = frozenset({"pi", "e"})

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)

_ATOM_EXPECTED = "number, S, pi, e, function call or '('"


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = VARIABLE


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]


@dataclass(frozen=True)
class PotentialExpr:
    """Parsed radial potential; ``text`` is the source it was parsed from."""

    root: Node
    text: str = field(default="", compare=False)

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise PotentialSyntaxError(f"unexpected character {text[pos]!r}", position=pos, expected="a token")
        kind = match.lastgroup or ""
        if kind != "ws":
            tokens.append(_Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def _accept(self, *ops: str) -> _Token | None:
        token = self.current
        if token.kind == "op" and token.text in ops:
            self.index += 1
            return token
        return None

    def _expect(self, op: str) -> None:
        if self._accept(op) is None:
            raise self._error(f"'{op}'")

    def _error(self, expected: str) -> PotentialSyntaxError:
        token = self.current
        found = "end of input" if token.kind == "end" else repr(token.text)
        return PotentialSyntaxError(f"unexpected {found}", position=token.position, expected=expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.current.kind != "end":
            raise self._error("operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while (token := self._accept("+", "-")) is not None:
            node = BinOp(token.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while (token := self._accept("*", "/")) is not None:
            node = BinOp(token.text, node, self.factor())
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self._accept("^") is not None:
            return BinOp("^", base, self.factor())
        return base

    def unary(self) -> Node:
        if self._accept("-") is not None:
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            if not math.isfinite(value):
                raise PotentialSyntaxError("number out of range", position=token.position, expected="a finite literal")
            return Num(value)
        if token.kind == "name":
            self._advance()
            if token.text == VARIABLE:
                return Var()
            if token.text in CONSTANTS:
                return Const(token.text)
            if token.text in FUNCTIONS:
                self._expect("(")
                arg = self.expr()
                self._expect(")")
                return Call(token.text, arg)
            if token.text == "pow":
                self._expect("(")
                base = self.expr()
                self._expect(",")
                exponent = self.expr()
                self._expect(")")
                return BinOp("^", base, exponent)
            raise UnknownIdentifier(token.text, position=token.position)
        if self._accept("(") is not None:
            node = self.expr()
            self._expect(")")
            return node
        raise self._error(_ATOM_EXPECTED)


@lru_cache(maxsize=256)
def parse_potential(text: str) -> PotentialExpr:
    """Parse ``text`` into a :class:`PotentialExpr`.

    Raises PotentialSyntaxError (with position and expected token) or
    UnknownIdentifier for names other than S, pi, e and the supported functions.
    """
    if not text or not text.strip():
        raise PotentialSyntaxError("empty potential", position=0, expected=_ATOM_EXPECTED)
    return PotentialExpr(_Parser(text).parse(), text)


def _serialize_node(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return VARIABLE
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Neg):
        return f"(-{_serialize_node(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_serialize_node(node.left)} {node.op} {_serialize_node(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({_serialize_node(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def serialize(expr: PotentialExpr) -> str:
    """Canonical, fully parenthesised text; ``parse_potential(serialize(e)) == e``."""
    return _serialize_node(expr.root)

