"""Arithmetic expression parser for one-variable profile formulas.

Grammar (loosest to tightest binding): ``+ -`` < ``* /`` < unary ``-`` <
``^`` (right associative). Whitespace is insignificant. Exactly one free
variable is allowed, named by the caller. Supported functions: exp, log,
tanh, cosh, sinh, sqrt.
"""

from __future__ import annotations

from dataclasses import dataclass

FUNCTIONS = ("exp", "log", "tanh", "cosh", "sinh", "sqrt")

# precedence levels used by both the parser and the printer
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


class ExprError(ValueError):
    """Base class for expression problems."""


class ParseError(ExprError):
    """Syntax or identifier error, reported with a character position."""

    def __init__(self, message: str, text: str, pos: int):
        self.text = text
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text[:pos]}<here>{text[pos:]}")


class EvalError(ExprError):
    """Runtime evaluation failure, carrying the offending sub-expression."""

    def __init__(self, message: str, node: "Node", argument: float):
        self.node = node
        self.argument = argument
        super().__init__(f"{message} in '{to_text(node)}' (argument value {argument!r})")


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: float


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class Bin(Node):
    op: str  # one of + - * / ^
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    fn: str
    arg: Node


@dataclass(frozen=True)
class _Token:
    kind: str  # num | ident | op | end
    value: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ParseError(f"malformed number '{lit}'", text, i) from None
            tokens.append(_Token("num", lit, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ident", text[i:j], i))
            i = j
            continue
        if c in "+-*/^()":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {c!r}", text, i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, varname: str):
        self.text = text
        self.varname = varname
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.value != op:
            raise ParseError(f"expected '{op}'", self.text, tok.pos)
        self.advance()

    def parse(self) -> Node:
        node = self.sum_()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected trailing input '{tok.value}'", self.text, tok.pos)
        return node

    def sum_(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().value in "+-":
            op = self.advance().value
            node = Bin(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().value in "*/":
            op = self.advance().value
            node = Bin(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.value == "^":
            self.advance()
            # exponent may start with a unary minus; recursion keeps ^ right-associative
            return Bin("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "num":
            return Const(float(tok.value))
        if tok.kind == "ident":
            if tok.value in FUNCTIONS:
                self.expect_op("(")
                arg = self.sum_()
                self.expect_op(")")
                return Call(tok.value, arg)
            if tok.value == self.varname:
                return Var(tok.value)
            raise ParseError(f"unknown identifier '{tok.value}'", self.text, tok.pos)
        if tok.kind == "op" and tok.value == "(":
            node = self.sum_()
            self.expect_op(")")
            return node
        if tok.kind == "end":
            raise ParseError("unexpected end of input", self.text, tok.pos)
        raise ParseError(f"unexpected {tok.value!r}", self.text, tok.pos)


def parse_expression(text: str, varname: str) -> Node:
    """Parse `text` into an AST over the single free variable `varname`."""
    return _Parser(text, varname).parse()


def _level(node: Node) -> int:
    if isinstance(node, (Const, Var, Call)):
        return _ATOM
    if isinstance(node, Neg):
        return _NEG
    assert isinstance(node, Bin)
    return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[node.op]


def _wrap(node: Node, minlevel: int) -> str:
    s = to_text(node)
    return f"({s})" if _level(node) < minlevel else s


def to_text(node: Node) -> str:
    """Render a tree back to source text; parsing the result reproduces the tree."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, Neg):
        return "-" + _wrap(node.arg, _NEG)
    assert isinstance(node, Bin)
    if node.op in "+-":
        return f"{_wrap(node.left, _ADD)} {node.op} {_wrap(node.right, _ADD + 1)}"
    if node.op in "*/":
        return f"{_wrap(node.left, _MUL)}{node.op}{_wrap(node.right, _MUL + 1)}"
    # power: base must be atomic, exponent may be a unary chain
    return f"{_wrap(node.left, _ATOM)}^{_wrap(node.right, _NEG)}"
