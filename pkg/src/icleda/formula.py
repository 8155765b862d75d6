"""Boolean formulas: parsing, printing, evaluation and negation normal form.

Grammar (whitespace ignored)::

    expr  := or
    or    := and ('|' and)*
    and   := unary ('&' unary)*
    unary := '!' unary | atom
    atom  := ident | '0' | '1' | '(' expr ')'

Chains such as ``a & b & c`` parse to a single n-ary node; parenthesised
sub-expressions are kept as separate children.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Mapping, Tuple, Union

__all__ = [
    "Var", "Not", "And", "Or", "Const", "Formula", "FormulaSyntaxError",
    "parse_formula", "to_text", "evaluate", "negate_to_nnf", "to_nnf",
    "is_nnf", "collect_variables", "assignments", "random_formula",
]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: Tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: Tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Const:
    value: bool


Formula = Union[Var, Not, And, Or, Const]
Assignment = Mapping[str, bool]


class FormulaSyntaxError(ValueError):
    """Raised on malformed formula text; ``position`` is a 1-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|([01])|([!&|()]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos + 1)
        if m.group(1):
            tokens.append(("ident", m.group(1), m.start(1) + 1))
        elif m.group(2):
            tokens.append(("const", m.group(2), m.start(2) + 1))
        else:
            tokens.append((m.group(3), m.group(3), m.start(3) + 1))
        pos = m.end()
    tokens.append(("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            found = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise FormulaSyntaxError(f"expected {kind!r}, found {found}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> Formula:
        parts = [self.conj()]
        while self.peek()[0] == "|":
            self.i += 1
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.peek()[0] == "&":
            self.i += 1
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        if self.peek()[0] == "!":
            self.i += 1
            return Not(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        kind, value, pos = self.peek()
        if kind == "ident":
            self.i += 1
            return Var(value)
        if kind == "const":
            self.i += 1
            return Const(value == "1")
        if kind == "(":
            self.i += 1
            inner = self.expr()
            self.take(")")
            return inner
        found = "end of input" if kind == "eof" else repr(value)
        raise FormulaSyntaxError(f"expected a variable, constant or '(', found {found}", pos)


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a formula tree.

    >>> parse_formula("!a & b")
    And(children=(Not(child=Var(name='a')), Var(name='b')))
    """
    if not text.strip():
        raise FormulaSyntaxError("empty formula", 1)
    p = _Parser(text)
    ast = p.expr()
    p.take("eof")
    return ast


def _prec(ast: Formula) -> int:
    if isinstance(ast, Or):
        return 1
    if isinstance(ast, And):
        return 2
    return 3


def to_text(ast: Formula) -> str:
    """Canonical printer; ``parse_formula(to_text(f)) == f`` for every tree."""
    if isinstance(ast, Var):
        return ast.name
    if isinstance(ast, Const):
        return "1" if ast.value else "0"
    if isinstance(ast, Not):
        inner = to_text(ast.child)
        return "!" + (inner if _prec(ast.child) == 3 else f"({inner})")
    op = " | " if isinstance(ast, Or) else " & "
    parts = []
    for child in ast.children:
        s = to_text(child)
        # same-kind children need parens or the parser would flatten them
        if _prec(child) <= _prec(ast):
            s = f"({s})"
        parts.append(s)
    return op.join(parts)


def evaluate(ast: Formula, a: Assignment) -> bool:
    if isinstance(ast, Var):
        try:
            return bool(a[ast.name])
        except KeyError:
            raise ValueError(f"unassigned variable {ast.name!r}") from None
    if isinstance(ast, Const):
        return ast.value
    if isinstance(ast, Not):
        return not evaluate(ast.child, a)
    if isinstance(ast, And):
        return all(evaluate(c, a) for c in ast.children)
    return any(evaluate(c, a) for c in ast.children)


def _nnf(ast: Formula, negate: bool) -> Formula:
    if isinstance(ast, Var):
        return Not(ast) if negate else ast
    if isinstance(ast, Const):
        return Const(ast.value != negate)
    if isinstance(ast, Not):
        return _nnf(ast.child, not negate)
    children = tuple(_nnf(c, negate) for c in ast.children)
    if isinstance(ast, And):
        return Or(children) if negate else And(children)
    return And(children) if negate else Or(children)


def negate_to_nnf(ast: Formula) -> Formula:
    """Negation normal form of ``!ast`` by De Morgan push-down.

    Double negations cancel and ``Not`` only survives directly above a
    ``Var``. No other simplification is attempted.
    """
    return _nnf(ast, True)


def to_nnf(ast: Formula) -> Formula:
    return _nnf(ast, False)


def is_nnf(ast: Formula) -> bool:
    if isinstance(ast, Not):
        return isinstance(ast.child, Var)
    if isinstance(ast, (And, Or)):
        return all(is_nnf(c) for c in ast.children)
    return True


def collect_variables(ast: Formula) -> List[str]:
    seen: Dict[str, None] = {}

    def walk(node):
        if isinstance(node, Var):
            seen.setdefault(node.name, None)
        elif isinstance(node, Not):
            walk(node.child)
        elif isinstance(node, (And, Or)):
            for c in node.children:
                walk(c)

    walk(ast)
    return list(seen)


def assignments(variables: List[str]) -> Iterator[Dict[str, bool]]:
    """All 2**n assignments, first variable most significant."""
    for bits in product((False, True), repeat=len(variables)):
        yield dict(zip(variables, bits))


def random_formula(rng: random.Random, n_vars: int, max_depth: int,
                   const_prob: float = 0.0) -> Formula:
    """Random formula over ``x1..x{n_vars}`` of depth at most ``max_depth``."""
    names = [f"x{i}" for i in range(1, n_vars + 1)]

    def leaf():
        if rng.random() < const_prob:
            return Const(rng.random() < 0.5)
        v = Var(rng.choice(names))
        return Not(v) if rng.random() < 0.4 else v

    def build(depth):
        if depth <= 1 or rng.random() < 0.25:
            return leaf()
        r = rng.random()
        if r < 0.12:
            return Not(build(depth - 1))
        k = 2 if rng.random() < 0.75 else 3
        kids = tuple(build(depth - 1) for _ in range(k))
        return And(kids) if r < 0.56 else Or(kids)

    return build(max_depth)
