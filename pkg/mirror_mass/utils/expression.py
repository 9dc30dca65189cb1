# mirror_mass/utils/expression.py

"""
Profile expressions: `eta = <expr>` or `alpha = <expr>` in the proper time `tau`.

Grammar (whitespace insensitive):

    spec    := ("eta" | "alpha") "=" sum
    sum     := sum ("+" | "-") product | product
    product := product ("*" | "/") unary | unary
    unary   := "-" unary | power
    power   := atom "^" unary | atom              (right associative)
    atom    := NUMBER | "tau" | "pi" | FUNC "(" sum ")" | "(" sum ")"

Functions: sin cos tanh exp ln sqrt abs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple, Union

import numpy as np
from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
    VisitError,
)

from mirror_mass.errors import (
    ArityError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)
from mirror_mass.utils import taylor
from mirror_mass.utils.taylor import Jet, JetDomainError

PROFILE_GRAMMAR = r"""
    start: KIND "=" sum

    ?sum: product
        | sum "+" product   -> add
        | sum "-" product   -> sub

    ?product: unary
        | product "*" unary -> mul
        | product "/" unary -> div

    ?unary: power
        | "-" unary         -> neg

    ?power: atom
        | atom "^" unary    -> pow

    ?atom: NUMBER           -> number
         | NAME             -> name
         | NAME "(" [args] ")" -> call
         | "(" sum ")"

    args: sum ("," sum)*

    KIND: "eta" | "alpha"
    NAME: /[A-Za-z_][A-Za-z0-9_]*/
    %import common.NUMBER
    %import common.WS
    %ignore WS
"""

_FUNCTIONS: Dict[str, Callable[[Jet], Jet]] = {
    "sin": taylor.sin,
    "cos": taylor.cos,
    "tanh": taylor.tanh,
    "exp": taylor.exp,
    "ln": taylor.log,
    "sqrt": taylor.sqrt,
    "abs": taylor.absolute,
}
_CONSTANTS: Dict[str, float] = {"pi": math.pi}
_VARIABLE = "tau"
_OPERATORS = ("+", "-", "*", "/", "^")

# Display names for grammar terminals in error messages.
_TERMINAL_TEXT = {
    "LPAR": "(",
    "RPAR": ")",
    "PLUS": "+",
    "MINUS": "-",
    "STAR": "*",
    "SLASH": "/",
    "CIRCUMFLEX": "^",
    "EQUAL": "=",
    "COMMA": ",",
    "NUMBER": "number",
    "NAME": "identifier",
    "KIND": "eta|alpha",
    "$END": "end of input",
}


# ----------------------------
# AST
# ----------------------------
@dataclass(frozen=True)
class Number:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Variable:
    name: str = _VARIABLE
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Constant:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"
    offset: int = field(default=0, compare=False)


Expr = Union[Number, Variable, Constant, Neg, BinOp, Call]


@dataclass(frozen=True)
class ProfileSpec:
    kind: str  # "eta" or "alpha"
    expr: Expr

    def __post_init__(self) -> None:
        if self.kind not in ("eta", "alpha"):
            raise ValueError("kind must be 'eta' or 'alpha'")


# ----------------------------
# Parsing
# ----------------------------
class _AstBuilder(Transformer):
    def __init__(self, source: str):
        super().__init__()
        self._source = source

    def _offset(self, meta) -> int:
        pos = getattr(meta, "start_pos", 0) or 0
        return len(self._source[:pos].encode("utf-8"))

    def _token_offset(self, tok: Token) -> int:
        return len(self._source[: tok.start_pos or 0].encode("utf-8"))

    @v_args(meta=True)
    def start(self, meta, children):
        kind, expr = children
        return ProfileSpec(kind=str(kind), expr=expr)

    @v_args(meta=True)
    def add(self, meta, children):
        return BinOp("+", children[0], children[1], offset=self._offset(meta))

    @v_args(meta=True)
    def sub(self, meta, children):
        return BinOp("-", children[0], children[1], offset=self._offset(meta))

    @v_args(meta=True)
    def mul(self, meta, children):
        return BinOp("*", children[0], children[1], offset=self._offset(meta))

    @v_args(meta=True)
    def div(self, meta, children):
        return BinOp("/", children[0], children[1], offset=self._offset(meta))

    @v_args(meta=True)
    def pow(self, meta, children):
        return BinOp("^", children[0], children[1], offset=self._offset(meta))

    @v_args(meta=True)
    def neg(self, meta, children):
        return Neg(children[0], offset=self._offset(meta))

    def number(self, children):
        (tok,) = children
        return Number(float(tok), offset=self._token_offset(tok))

    def name(self, children):
        (tok,) = children
        ident = str(tok)
        if ident == _VARIABLE:
            return Variable(offset=self._token_offset(tok))
        if ident in _CONSTANTS:
            return Constant(ident, offset=self._token_offset(tok))
        if ident in _FUNCTIONS:
            raise ArityError(
                f"function '{ident}' must be called with 1 argument",
                offset=self._token_offset(tok),
            )
        raise UnknownIdentifierError(
            f"unknown identifier '{ident}'", offset=self._token_offset(tok)
        )

    def args(self, children):
        return list(children)

    def call(self, children):
        tok, args = children
        ident = str(tok)
        offset = self._token_offset(tok)
        if ident not in _FUNCTIONS:
            raise UnknownIdentifierError(f"unknown function '{ident}'", offset=offset)
        args = args or []
        if len(args) != 1:
            raise ArityError(
                f"function '{ident}' takes 1 argument, got {len(args)}", offset=offset
            )
        return Call(ident, args[0], offset=offset)


_PARSER = Lark(
    PROFILE_GRAMMAR,
    parser="lalr",
    lexer="contextual",
    propagate_positions=True,
    maybe_placeholders=True,
)


def _display(terminal: str) -> str:
    if terminal in _TERMINAL_TEXT:
        return _TERMINAL_TEXT[terminal]
    try:
        pattern = _PARSER.get_terminal(terminal).pattern
        if pattern.type == "str":
            return pattern.value
    except KeyError:
        pass
    return terminal


def _expected(names) -> Tuple[str, ...]:
    return tuple(sorted({_display(n) for n in names}))


def parse(source: str) -> ProfileSpec:
    """
    Parse a profile definition into a ProfileSpec.
    Raises ExpressionSyntaxError / UnknownIdentifierError / ArityError with the
    byte offset of the offending input.
    """
    if not isinstance(source, str):
        raise ExpressionSyntaxError("profile source must be a string", offset=0)
    end = len(source.encode("utf-8"))
    try:
        tree = _PARSER.parse(source)
    except UnexpectedToken as exc:
        expected = getattr(exc, "accepts", None) or exc.expected
        if exc.token.type == "$END":
            offset = end
        else:
            offset = len(source[: exc.token.start_pos or 0].encode("utf-8"))
        raise ExpressionSyntaxError(
            f"unexpected {_display(exc.token.type)}",
            offset=offset,
            expected=_expected(expected),
        ) from None
    except UnexpectedCharacters as exc:
        offset = len(source[: exc.pos_in_stream].encode("utf-8"))
        raise ExpressionSyntaxError(
            f"unexpected character {source[exc.pos_in_stream]!r}",
            offset=offset,
            expected=_expected(exc.allowed or ()),
        ) from None
    except UnexpectedEOF as exc:
        raise ExpressionSyntaxError(
            "unexpected end of input", offset=end, expected=_expected(exc.expected)
        ) from None
    except UnexpectedInput as exc:  # pragma: no cover - other lark input errors
        raise ExpressionSyntaxError(str(exc), offset=end) from None

    try:
        return _AstBuilder(source).transform(tree)
    except VisitError as exc:
        raise exc.orig_exc from None


# ----------------------------
# Canonical printing
# ----------------------------
def to_source(node: Union[ProfileSpec, Expr]) -> str:
    """Fully parenthesized source that parses back to an equal AST."""
    if isinstance(node, ProfileSpec):
        return f"{node.kind} = {to_source(node.expr)}"
    if isinstance(node, Number):
        return repr(float(node.value))
    if isinstance(node, Variable):
        return _VARIABLE
    if isinstance(node, Constant):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ----------------------------
# Evaluation
# ----------------------------
def _eval(node: Expr, t: Jet) -> Jet:
    shape = t.c.shape[1:]
    if isinstance(node, Number):
        return Jet.constant(node.value, t.order, shape)
    if isinstance(node, Variable):
        return t
    if isinstance(node, Constant):
        return Jet.constant(_CONSTANTS[node.name], t.order, shape)
    try:
        if isinstance(node, Neg):
            return -_eval(node.operand, t)
        if isinstance(node, BinOp):
            left = _eval(node.left, t)
            right = _eval(node.right, t)
            if node.op == "+":
                return left + right
            if node.op == "-":
                return left - right
            if node.op == "*":
                return left * right
            if node.op == "/":
                return left / right
            return taylor.power(left, right)
        if isinstance(node, Call):
            return _FUNCTIONS[node.func](_eval(node.arg, t))
    except JetDomainError as exc:
        raise EvaluationDomainError(str(exc), offset=node.offset) from None
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_jet(node: Union[ProfileSpec, Expr], tau, order: int) -> Jet:
    expr = node.expr if isinstance(node, ProfileSpec) else node
    t = Jet.variable(np.asarray(tau, dtype=float), order)
    with np.errstate(all="ignore"):
        return _eval(expr, t)


def evaluate_with_derivatives(node: Union[ProfileSpec, Expr], tau, order: int = 0):
    """
    Returns [f, f', ..., f^(order)] at tau (scalar or array; derivatives along
    the first axis). Exact for polynomials.
    """
    if not 0 <= order <= 4:
        raise ValueError("order must be in [0, 4]")
    out = evaluate_jet(node, tau, order).derivatives()
    if not np.all(np.isfinite(out)):
        expr = node.expr if isinstance(node, ProfileSpec) else node
        raise EvaluationDomainError(
            "expression is not finite at the requested point", offset=expr.offset
        )
    return out
