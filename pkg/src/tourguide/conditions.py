"""Transition-condition mini-language.

Grammar (whitespace insignificant outside arguments)::

    expr    = or
    or      = and { "|" and }
    and     = unary { "&" unary }
    unary   = [ "!" ] primary
    primary = call | "default" | "(" expr ")"
    call    = ident "(" [ arg { "," arg } ] ")"

Built-in predicates and their arities:

    keyword(set_name)           - a word of the named keyword set occurred
    label(LABEL)                - a token carrying LABEL occurred
    sentiment(polarity)         - utterance polarity equals the argument
    example(intent[,threshold]) - nearest example intent matched
    profile(key[,value])        - profile slot is set (and equals value)
    is_question()               - utterance looks like a question

``default`` is the unconditional catch-all and may only appear as a whole
expression, never nested inside operators.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

ConditionExpr = Union["Or", "And", "Not", "Call", "Default"]

FUNCTION_ARITIES: dict[str, tuple[int, int]] = {
    "keyword": (1, 1),
    "label": (1, 1),
    "sentiment": (1, 1),
    "example": (1, 2),
    "profile": (1, 2),
    "is_question": (0, 0),
}


class ConditionError(ValueError):
    """Base class for condition-source errors; carries a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class ConditionSyntaxError(ConditionError):
    pass


class UnknownFunctionError(ConditionError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown function '{name}'", offset)
        self.name = name


class ArityError(ConditionError):
    def __init__(self, name: str, got: int, offset: int):
        lo, hi = FUNCTION_ARITIES[name]
        want = str(lo) if lo == hi else f"{lo}..{hi}"
        super().__init__(f"'{name}' takes {want} argument(s), got {got}", offset)
        self.name = name
        self.got = got


@dataclass(frozen=True)
class Or:
    children: tuple[ConditionExpr, ...]


@dataclass(frozen=True)
class And:
    children: tuple[ConditionExpr, ...]


@dataclass(frozen=True)
class Not:
    child: ConditionExpr


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Default:
    pass


# Argument tokens may be any run free of structural characters, so slot
# values in any script (e.g. Japanese) work unquoted.
_ARG_RE = re.compile(r"[^\s()|&!,]+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.pos = 0  # code-point index

    def byte_offset(self, pos: int | None = None) -> int:
        p = self.pos if pos is None else pos
        return len(self.src[:p].encode("utf-8"))

    def error(self, message: str, pos: int | None = None) -> ConditionSyntaxError:
        return ConditionSyntaxError(message, self.byte_offset(pos))

    def skip_ws(self) -> None:
        while self.pos < len(self.src) and self.src[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        return self.src[self.pos] if self.pos < len(self.src) else ""

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise self.error(f"expected '{ch}'")
        self.pos += 1

    def parse(self) -> ConditionExpr:
        self.skip_ws()
        if self.pos == len(self.src):
            raise self.error("empty condition")
        expr = self.parse_or(top=True)
        self.skip_ws()
        if self.pos != len(self.src):
            raise self.error("unexpected trailing input")
        return expr

    def parse_or(self, top: bool = False) -> ConditionExpr:
        children = [self.parse_and(top=top)]
        while True:
            self.skip_ws()
            if self.peek() == "|":
                self.pos += 1
                children.append(self.parse_and())
            else:
                break
        return children[0] if len(children) == 1 else Or(tuple(children))

    def parse_and(self, top: bool = False) -> ConditionExpr:
        children = [self.parse_unary(top=top)]
        while True:
            self.skip_ws()
            if self.peek() == "&":
                self.pos += 1
                children.append(self.parse_unary())
            else:
                break
        return children[0] if len(children) == 1 else And(tuple(children))

    def parse_unary(self, top: bool = False) -> ConditionExpr:
        self.skip_ws()
        if self.peek() == "!":
            self.pos += 1
            return Not(self.parse_unary())
        return self.parse_primary(top=top)

    def parse_primary(self, top: bool) -> ConditionExpr:
        self.skip_ws()
        if self.peek() == "(":
            self.pos += 1
            expr = self.parse_or()
            self.skip_ws()
            self.expect(")")
            return expr

        start = self.pos
        m = _IDENT_RE.match(self.src, self.pos)
        if not m:
            raise self.error("expected predicate, 'default', or '('")
        name = m.group(0)
        self.pos = m.end()
        self.skip_ws()

        if name == "default":
            if self.peek() == "(":
                raise self.error("'default' takes no arguments", start)
            if not top or not self._at_end_after_default():
                raise self.error("'default' must stand alone", start)
            return Default()

        if self.peek() != "(":
            raise self.error("expected '(' after predicate name")
        self.pos += 1
        args = self.parse_args()
        self.expect(")")

        if name not in FUNCTION_ARITIES:
            raise UnknownFunctionError(name, self.byte_offset(start))
        lo, hi = FUNCTION_ARITIES[name]
        if not (lo <= len(args) <= hi):
            raise ArityError(name, len(args), self.byte_offset(start))
        return Call(name, tuple(args))

    def _at_end_after_default(self) -> bool:
        rest = self.src[self.pos:]
        return rest.strip() == ""

    def parse_args(self) -> list[str]:
        args: list[str] = []
        self.skip_ws()
        if self.peek() == ")":
            return args
        while True:
            self.skip_ws()
            m = _ARG_RE.match(self.src, self.pos)
            if not m:
                raise self.error("expected argument")
            args.append(m.group(0))
            self.pos = m.end()
            self.skip_ws()
            if self.peek() == ",":
                self.pos += 1
                continue
            return args


def parse_condition(src: str) -> ConditionExpr:
    """Parse condition source into an expression tree.

    Raises ConditionSyntaxError / UnknownFunctionError / ArityError, each
    carrying the byte offset of the offending token.
    """
    return _Parser(src).parse()


def print_condition(expr: ConditionExpr) -> str:
    """Render an expression back to parseable source (inverse of parse)."""
    return _print(expr, parent=None)


def _print(expr: ConditionExpr, parent: str | None) -> str:
    if isinstance(expr, Default):
        return "default"
    if isinstance(expr, Call):
        return f"{expr.func}({','.join(expr.args)})"
    if isinstance(expr, Not):
        inner = _print(expr.child, parent="not")
        if isinstance(expr.child, (Call, Default)):
            return f"!{inner}"
        return f"!({inner})"
    if isinstance(expr, And):
        body = " & ".join(_print(c, parent="and") for c in expr.children)
        # parens under "and" keep nested And nodes from flattening on reparse
        return f"({body})" if parent in ("not", "and") else body
    if isinstance(expr, Or):
        body = " | ".join(_print(c, parent="or") for c in expr.children)
        return f"({body})" if parent in ("not", "and", "or") else body
    raise TypeError(f"not a condition expression: {expr!r}")


def contains_default(expr: ConditionExpr) -> bool:
    if isinstance(expr, Default):
        return True
    if isinstance(expr, (Or, And)):
        return any(contains_default(c) for c in expr.children)
    if isinstance(expr, Not):
        return contains_default(expr.child)
    return False
