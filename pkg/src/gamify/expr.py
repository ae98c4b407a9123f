"""Arithmetic-logic expression language for rule conditions, modifiers, and
customization predicates.

The language covers numeric literals, ``true``/``false``, ``Date("YYYY-MM-DD")``
literals, identifiers bound by a :class:`Scope`, unary ``!``/``-``, arithmetic
``+ - * /``, comparisons ``< <= > >= == !=``, and logical ``&``/``|`` (with
``&&``/``||`` accepted as aliases).  Precedence, tightest first::

    unary  >  * /  >  + -  >  comparisons  >  &  >  |

Values are 64-bit floats, booleans, and calendar dates (compared as epoch
days).  Dates support comparison and equality only; date arithmetic is a
:class:`TypeMismatch`.

Absent identifiers follow fail-closed condition semantics: absence propagates
through arithmetic, and the smallest enclosing comparison evaluates to false.
A numeric result that is still absent at the top level raises
:class:`AbsentOperand` so callers never silently zero a reward.

Logical operators do not short-circuit: both operands are always evaluated, so
evaluation errors surface regardless of the other side.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .errors import (
    AbsentOperand,
    DivisionByZero,
    ExprSyntaxError,
    TypeMismatch,
    UnknownIdentifier,
)


class _Absent:
    """Singleton marking an identifier with no value.  Distinct from 0/false."""

    _instance: Optional["_Absent"] = None

    def __new__(cls) -> "_Absent":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ABSENT"


ABSENT = _Absent()

#: Runtime value of an expression (or ABSENT while propagating).
Value = Union[float, bool, _dt.date, _Absent]

#: A scope is any mapping from identifier to value; missing keys are absent.
Scope = Mapping[str, Value]


# --- abstract syntax ----------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class DateLit:
    value: _dt.date


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * / < <= > >= == != & |
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Bool, DateLit, Ident, Unary, Binary]


# --- lexer ----------------------------------------------------------------------

_TWO_CHAR_OPS = {"<=", ">=", "==", "!=", "&&", "||"}
_ONE_CHAR_OPS = set("+-*/<>!&|()")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "str", "ident", "op", "eof"
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                if j >= n or not source[j].isdigit():
                    raise ExprSyntaxError("malformed number", i)
                while j < n and source[j].isdigit():
                    j += 1
            tokens.append(_Token("num", source[i:j], i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], i))
            i = j
            continue
        if c == '"':
            j = i + 1
            while j < n and source[j] != '"':
                j += 1
            if j >= n:
                raise ExprSyntaxError("unterminated string", i)
            tokens.append(_Token("str", source[i + 1 : j], i))
            i = j + 1
            continue
        if source[i : i + 2] in _TWO_CHAR_OPS:
            text = source[i : i + 2]
            tokens.append(_Token("op", "&" if text == "&&" else "|" if text == "||" else text, i))
            i += 2
            continue
        if c in _ONE_CHAR_OPS:
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        raise ExprSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(_Token("eof", "", n))
    return tokens


# --- parser ---------------------------------------------------------------------

_COMPARISON_OPS = {"<", "<=", ">", ">=", "==", "!="}


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect_op(self, text: str) -> _Token:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            raise ExprSyntaxError(f"expected {text!r}", tok.pos)
        return self.advance()

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        node = self.parse_and()
        while self.peek().kind == "op" and self.peek().text == "|":
            self.advance()
            node = Binary("|", node, self.parse_and())
        return node

    def parse_and(self) -> Expr:
        node = self.parse_comparison()
        while self.peek().kind == "op" and self.peek().text == "&":
            self.advance()
            node = Binary("&", node, self.parse_comparison())
        return node

    def parse_comparison(self) -> Expr:
        node = self.parse_additive()
        tok = self.peek()
        if tok.kind == "op" and tok.text in _COMPARISON_OPS:
            self.advance()
            node = Binary(tok.text, node, self.parse_additive())
        return node

    def parse_additive(self) -> Expr:
        node = self.parse_multiplicative()
        while self.peek().kind == "op" and self.peek().text in ("+", "-"):
            op = self.advance().text
            node = Binary(op, node, self.parse_multiplicative())
        return node

    def parse_multiplicative(self) -> Expr:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            op = self.advance().text
            node = Binary(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("!", "-"):
            self.advance()
            return Unary(tok.text, self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.advance()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "true":
                return Bool(True)
            if tok.text == "false":
                return Bool(False)
            if tok.text == "Date" and self.peek().kind == "op" and self.peek().text == "(":
                return self.parse_date_literal()
            return Ident(tok.text)
        if tok.kind == "op" and tok.text == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError("expected a value", tok.pos)

    def parse_date_literal(self) -> Expr:
        self.expect_op("(")
        tok = self.advance()
        if tok.kind != "str":
            raise ExprSyntaxError('Date(...) takes a quoted "YYYY-MM-DD" string', tok.pos)
        try:
            value = _dt.date.fromisoformat(tok.text)
        except ValueError:
            raise ExprSyntaxError(f"invalid date {tok.text!r}", tok.pos) from None
        self.expect_op(")")
        return DateLit(value)


def parse(source: str, scope_signature: Optional[Iterable[str]] = None) -> Expr:
    """Parse ``source`` into an AST.

    When ``scope_signature`` is given, every identifier must be a member of it;
    an unknown name raises :class:`UnknownIdentifier`.
    """
    parser = _Parser(_tokenize(source))
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise ExprSyntaxError(f"unexpected {trailing.text!r}", trailing.pos)
    if scope_signature is not None:
        legal = set(scope_signature)
        for name in sorted(free_identifiers(node)):
            if name not in legal:
                raise UnknownIdentifier(name)
    return node


# --- evaluation -------------------------------------------------------------------

def _is_number(v: Value) -> bool:
    return isinstance(v, float) and not isinstance(v, bool)


def _lookup(name: str, scope: Scope) -> Value:
    value = scope.get(name, ABSENT)
    if value is ABSENT or value is None:
        return ABSENT
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, _dt.date):
        return value
    raise TypeMismatch(f"identifier {name} bound to unsupported value {value!r}")


def _evaluate(e: Expr, scope: Scope) -> Value:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Bool):
        return e.value
    if isinstance(e, DateLit):
        return e.value
    if isinstance(e, Ident):
        return _lookup(e.name, scope)
    if isinstance(e, Unary):
        v = _evaluate(e.operand, scope)
        if v is ABSENT:
            return ABSENT
        if e.op == "-":
            if not _is_number(v):
                raise TypeMismatch("unary - needs a number")
            return -v
        if not isinstance(v, bool):
            raise TypeMismatch("! needs a boolean")
        return not v
    assert isinstance(e, Binary)
    left = _evaluate(e.left, scope)
    right = _evaluate(e.right, scope)
    op = e.op
    if op in ("+", "-", "*", "/"):
        if left is ABSENT or right is ABSENT:
            return ABSENT
        if not (_is_number(left) and _is_number(right)):
            raise TypeMismatch(f"{op} needs numbers")
        if op == "+":
            return left + right
        if op == "-":
            return left - right
        if op == "*":
            return left * right
        if right == 0.0:
            raise DivisionByZero("division by zero")
        return left / right
    if op in _COMPARISON_OPS:
        # Absence collapses the smallest enclosing comparison to false.
        if left is ABSENT or right is ABSENT:
            return False
        if op in ("==", "!="):
            if type(left) is not type(right):
                raise TypeMismatch(f"{op} needs operands of one type")
            return (left == right) if op == "==" else (left != right)
        ordered = (_is_number(left) and _is_number(right)) or (
            isinstance(left, _dt.date) and isinstance(right, _dt.date)
        )
        if not ordered:
            raise TypeMismatch(f"{op} needs two numbers or two dates")
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right
    # & / |
    if left is ABSENT:
        left = False
    if right is ABSENT:
        right = False
    if not (isinstance(left, bool) and isinstance(right, bool)):
        raise TypeMismatch(f"{op} needs booleans")
    return (left and right) if op == "&" else (left or right)


def eval_bool(e: Expr, scope: Scope) -> bool:
    """Evaluate a boolean expression; absent subterms fail closed to false."""
    v = _evaluate(e, scope)
    if v is ABSENT:
        return False
    if not isinstance(v, bool):
        raise TypeMismatch("expression is not boolean")
    return v


def eval_number(e: Expr, scope: Scope) -> float:
    """Evaluate a numeric expression; an absent operand fails loud."""
    v = _evaluate(e, scope)
    if v is ABSENT:
        raise AbsentOperand("expression references an absent attribute")
    if not _is_number(v):
        raise TypeMismatch("expression is not numeric")
    return v


def free_identifiers(e: Expr) -> set[str]:
    """Exact set of identifier names appearing in ``e``."""
    if isinstance(e, Ident):
        return {e.name}
    if isinstance(e, Unary):
        return free_identifiers(e.operand)
    if isinstance(e, Binary):
        return free_identifiers(e.left) | free_identifiers(e.right)
    return set()


# --- static typing -----------------------------------------------------------------

NUMBER = "number"
BOOLEAN = "boolean"
DATE = "date"


def infer_type(e: Expr, identifier_types: Mapping[str, str]) -> str:
    """Infer the type of ``e`` given declared identifier types.

    ``identifier_types`` maps each legal identifier to ``NUMBER`` or ``DATE``
    (the DSL binds no boolean identifiers).  Raises :class:`UnknownIdentifier`
    or :class:`TypeMismatch`.
    """
    if isinstance(e, Num):
        return NUMBER
    if isinstance(e, Bool):
        return BOOLEAN
    if isinstance(e, DateLit):
        return DATE
    if isinstance(e, Ident):
        if e.name not in identifier_types:
            raise UnknownIdentifier(e.name)
        return identifier_types[e.name]
    if isinstance(e, Unary):
        t = infer_type(e.operand, identifier_types)
        if e.op == "-":
            if t != NUMBER:
                raise TypeMismatch("unary - needs a number")
            return NUMBER
        if t != BOOLEAN:
            raise TypeMismatch("! needs a boolean")
        return BOOLEAN
    assert isinstance(e, Binary)
    lt = infer_type(e.left, identifier_types)
    rt = infer_type(e.right, identifier_types)
    op = e.op
    if op in ("+", "-", "*", "/"):
        if lt != NUMBER or rt != NUMBER:
            raise TypeMismatch(f"{op} needs numbers")
        return NUMBER
    if op in ("==", "!="):
        if lt != rt:
            raise TypeMismatch(f"{op} needs operands of one type")
        return BOOLEAN
    if op in _COMPARISON_OPS:
        if not (lt == rt and lt in (NUMBER, DATE)):
            raise TypeMismatch(f"{op} needs two numbers or two dates")
        return BOOLEAN
    if lt != BOOLEAN or rt != BOOLEAN:
        raise TypeMismatch(f"{op} needs booleans")
    return BOOLEAN


# --- printer -------------------------------------------------------------------------

_PRECEDENCE = {
    "|": 1,
    "&": 2,
    "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
_UNARY_PRECEDENCE = 6


def _format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    text = repr(value)
    if "e" not in text and "E" not in text:
        return text
    # The lexer has no exponent notation; expand to plain decimal.
    for digits in range(1, 400):
        text = format(value, f".{digits}f")
        if float(text) == value:
            break
    text = text.rstrip("0")
    return text + "0" if text.endswith(".") else text


def to_source(e: Expr) -> str:
    """Render the canonical textual form; ``parse(to_source(x)) == x``."""
    return _print(e, 0)


def _print(e: Expr, parent_level: int) -> str:
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Bool):
        return "true" if e.value else "false"
    if isinstance(e, DateLit):
        return f'Date("{e.value.isoformat()}")'
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Unary):
        inner = _print(e.operand, _UNARY_PRECEDENCE)
        text = f"{e.op}{inner}"
        return f"({text})" if parent_level > _UNARY_PRECEDENCE else text
    assert isinstance(e, Binary)
    level = _PRECEDENCE[e.op]
    # Left-associative chains keep the left child at the same level; the right
    # child parenthesizes at equal level.  Comparisons are non-associative, so
    # equal-level children parenthesize on both sides.
    left_min = level + 1 if level == 3 else level
    left = _print(e.left, left_min)
    right = _print(e.right, level + 1)
    text = f"{left} {e.op} {right}"
    return f"({text})" if parent_level > level else text
