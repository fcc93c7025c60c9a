"""Formulas of the interpretability language: AST, parser, printer, substitution.

Concrete syntax (ASCII on output, Unicode aliases accepted on input)::

    T  F  ~A  []A  <>A  A & B  A | B  A |> B  A -> B

Binding strength, strongest first: ``~ [] <>``, then ``& |`` (left
associative), then ``|>`` (non-associative), then ``->`` (right associative).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Formula", "Bottom", "Top", "Var", "Neg", "And", "Or", "Imp", "Box", "Dia", "Rhd",
    "TOP", "BOTTOM", "ParseError", "OverlapError",
    "parse", "to_text", "substitute", "replace_all", "variables", "var_key",
    "conj", "flatten_and", "subformulas", "size", "depth",
]


class Formula:
    """Base class of all formula nodes. Nodes are immutable and compare structurally."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    def __repr__(self) -> str:
        return "Bottom()"


@dataclass(frozen=True, repr=False)
class Top(Formula):
    def __repr__(self) -> str:
        return "Top()"


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def __post_init__(self) -> None:
        if not _IDENT.fullmatch(self.name):
            raise ValueError(f"bad variable name {self.name!r}")

    @property
    def base(self) -> str:
        return self.name[0]

    @property
    def index(self) -> int | None:
        return int(self.name[1:]) if len(self.name) > 1 else None


@dataclass(frozen=True)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Rhd(Formula):
    left: Formula
    right: Formula


TOP = Top()
BOTTOM = Bottom()

_IDENT = re.compile(r"[a-z][0-9]*")
_UNARY = (Neg, Box, Dia)
_BINARY = (And, Or, Imp, Rhd)


def var_key(v: Var) -> tuple[str, int]:
    """Sort key for variables: base letter, then index (unindexed first)."""
    idx = v.index
    return (v.base, -1 if idx is None else idx)


def conj(*parts: Formula) -> Formula:
    """Left-associated conjunction of ``parts`` in the given order."""
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


# ---------------------------------------------------------------------------
# traversal helpers

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, _UNARY):
        return (f.body,)
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    return ()


def rebuild(f: Formula, kids: Sequence[Formula]) -> Formula:
    if isinstance(f, _UNARY):
        return type(f)(kids[0])
    if isinstance(f, _BINARY):
        return type(f)(kids[0], kids[1])
    return f


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order walk over all subformula occurrences."""
    for k in children(f):
        yield from subformulas(k)
    yield f


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def depth(f: Formula) -> int:
    ks = children(f)
    return 1 + max((depth(k) for k in ks), default=0)


def variables(f: Formula) -> frozenset[Var]:
    return frozenset(g for g in subformulas(f) if isinstance(g, Var))


def _map(f: Formula, fn: Callable[[Formula], Formula | None]) -> Formula:
    hit = fn(f)
    if hit is not None:
        return hit
    ks = children(f)
    if not ks:
        return f
    new = tuple(_map(k, fn) for k in ks)
    if all(a is b for a, b in zip(ks, new)):
        return f
    return rebuild(f, new)


def substitute(f: Formula, mapping: Mapping[Var | str, Formula]) -> Formula:
    """Simultaneously replace variables; inserted formulas are not re-scanned."""
    table = {(Var(k) if isinstance(k, str) else k): v for k, v in mapping.items()}
    if not table:
        return f
    return _map(f, lambda g: table.get(g) if isinstance(g, Var) else None)


class OverlapError(ValueError):
    pass


def replace_all(f: Formula, pairs: Iterable[tuple[Formula, Formula]]) -> Formula:
    """Replace every occurrence of each pattern by its partner, simultaneously.

    Matching is by structural equality. Raises :class:`OverlapError` when an
    occurrence of one pattern lies inside an occurrence of another.
    """
    pairs = list(pairs)
    if not pairs:
        return f
    table: dict[Formula, Formula] = {}
    for pat, rep in pairs:
        if pat in table and table[pat] != rep:
            raise OverlapError(f"pattern {to_text(pat)} listed twice with different replacements")
        table[pat] = rep

    def check(g: Formula, inside: Formula | None) -> None:
        here = g in table
        if here and inside is not None:
            raise OverlapError(f"patterns overlap: {to_text(g)} occurs inside {to_text(inside)}")
        for k in children(g):
            check(k, g if here else inside)

    check(f, None)
    return _map(f, table.get)


def flatten_and(f: Formula) -> Formula:
    """Re-associate every maximal conjunction chain to the left, keeping operand order."""
    def operands(g: Formula) -> list[Formula]:
        if isinstance(g, And):
            return operands(g.left) + operands(g.right)
        return [flatten_and(g)]

    if isinstance(f, And):
        return conj(*operands(f))
    ks = children(f)
    return rebuild(f, [flatten_and(k) for k in ks]) if ks else f


# ---------------------------------------------------------------------------
# printing

# levels: 0 implication, 1 rhd, 2 and/or, 3 unary/atoms
_LEVEL = {Imp: 0, Rhd: 1, And: 2, Or: 2}
_OPS = {Imp: "->", Rhd: "|>", And: "&", Or: "|"}
_PREFIX = {Neg: "~", Box: "[]", Dia: "<>"}


def _level(f: Formula) -> int:
    return _LEVEL.get(type(f), 3)


def to_text(f: Formula) -> str:
    """Print ``f`` with the fewest parentheses that re-parse to the same tree."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bottom):
        return "F"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, _UNARY):
        inner = to_text(f.body)
        if _level(f.body) < 3:
            inner = f"({inner})"
        return _PREFIX[type(f)] + inner
    lvl = _level(f)
    left, right = to_text(f.left), to_text(f.right)
    if isinstance(f, Imp):
        wrap_l, wrap_r = _level(f.left) <= 0, _level(f.right) < 0
    elif isinstance(f, Rhd):
        wrap_l, wrap_r = _level(f.left) <= 1, _level(f.right) <= 1
    else:
        wrap_l, wrap_r = _level(f.left) < lvl, _level(f.right) <= lvl
    if wrap_l:
        left = f"({left})"
    if wrap_r:
        right = f"({right})"
    return f"{left} {_OPS[type(f)]} {right}"


# ---------------------------------------------------------------------------
# parsing

class ParseError(ValueError):
    def __init__(self, msg: str, pos: int, text: str):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos
        self.text = text


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op>->|\|>|<>|\[\]|[~&|()TF¬∧∨→□◇▷⊤⊥])
  | (?P<ident>[a-z][0-9]*)
""", re.VERBOSE)

_ALIASES = {"¬": "~", "∧": "&", "∨": "|", "→": "->", "□": "[]", "◇": "<>",
            "▷": "|>", "⊤": "T", "⊥": "F"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind == "op":
            out.append(("op", _ALIASES.get(m.group(), m.group()), pos))
        elif kind == "ident":
            out.append(("ident", m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            self.fail(f"expected {value!r}")
        self.i += 1
        return tok

    def fail(self, msg: str) -> None:
        kind, val, pos = self.peek()
        got = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"{msg}, got {got}", pos, self.text)

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok[0] == "op" and tok[1] == value

    def imp(self) -> Formula:
        left = self.rhd()
        if self.at("->"):
            self.take()
            return Imp(left, self.imp())
        return left

    def rhd(self) -> Formula:
        left = self.andor()
        if self.at("|>"):
            self.take()
            out = Rhd(left, self.andor())
            if self.at("|>"):
                self.fail("'|>' is non-associative; parenthesize the chain")
            return out
        return left

    def andor(self) -> Formula:
        left = self.unary()
        while self.at("&") or self.at("|"):
            op = self.take()[1]
            right = self.unary()
            left = And(left, right) if op == "&" else Or(left, right)
        return left

    def unary(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "op" and val in ("~", "[]", "<>"):
            self.take()
            body = self.unary()
            return {"~": Neg, "[]": Box, "<>": Dia}[val](body)
        return self.atom()

    def atom(self) -> Formula:
        kind, val, _ = self.peek()
        if kind == "ident":
            self.take()
            return Var(val)
        if kind == "op" and val == "T":
            self.take()
            return TOP
        if kind == "op" and val == "F":
            self.take()
            return BOTTOM
        if kind == "op" and val == "(":
            self.take()
            inner = self.imp()
            self.take(")")
            return inner
        self.fail("expected a formula")
        raise AssertionError  # unreachable


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.imp()
    if p.peek()[0] != "end":
        p.fail("unexpected trailing input")
    return f
