"""Generators for the slim hierarchy, the broad series and the named principles."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .formula import (
    TOP, And, Box, Dia, Formula, Imp, Neg, Rhd, Var, conj, parse, replace_all,
)

__all__ = [
    "SchemaId", "slim", "slim_xyz", "slim_tilde", "broad_u", "broad", "fixed",
    "FIXED_NAMES", "IL_AXIOMS", "XYZ_MINUS_ONE", "A_MINUS_ONE",
    "reversal_map", "generate", "parse_schema_id",
]


def _v(base: str, i: int | None = None) -> Var:
    return Var(base if i is None else f"{base}{i}")


def a(i): return _v("a", i)
def b(i): return _v("b", i)
def c(i): return _v("c", i)
def e(i): return _v("e", i)


def _not_rhd_not(x: Formula, y: Formula) -> Formula:
    return Neg(Rhd(x, Neg(y)))


# ---------------------------------------------------------------------------
# slim hierarchy

def slim_step_pairs(n: int, odd: bool) -> list[tuple[Formula, Formula]]:
    """Replacement pairs taking R_{2n} to R_{2n+1} (odd) or R_{2n+1} to R_{2n+2}."""
    if odd:
        return [
            (_not_rhd_not(a(n), c(n)),
             And(_not_rhd_not(a(n), c(n)), Rhd(e(n + 1), Dia(a(n + 1))))),
            (And(b(n), Box(c(n))),
             And(And(b(n), Box(c(n))), Rhd(e(n + 1), a(n + 1)))),
        ]
    return [
        (b(n), And(b(n), Rhd(a(n + 1), b(n + 1)))),
        (Dia(a(n + 1)), _not_rhd_not(a(n + 1), c(n + 1))),
        (Rhd(e(n + 1), a(n + 1)),
         And(Rhd(e(n + 1), a(n + 1)), Rhd(e(n + 1), And(b(n + 1), Box(c(n + 1)))))),
    ]


@lru_cache(maxsize=None)
def slim(n: int) -> Formula:
    """The n-th principle of the slim hierarchy over atoms a_i, b_i, c_i, e_i."""
    if n < 0:
        raise ValueError("slim index must be >= 0")
    if n == 0:
        return Imp(Rhd(a(0), b(0)), Rhd(_not_rhd_not(a(0), c(0)), And(b(0), Box(c(0)))))
    half, odd_step = divmod(n - 1, 2)
    return replace_all(slim(n - 1), slim_step_pairs(half, odd=not odd_step))


A_MINUS_ONE = TOP
XYZ_MINUS_ONE = (TOP, TOP, TOP)


@lru_cache(maxsize=None)
def slim_xyz(n: int) -> tuple[Formula, Formula, Formula]:
    if n == -1:
        return XYZ_MINUS_ONE
    if n < -1:
        raise ValueError("slim_xyz index must be >= -1")
    if n == 0:
        # negated C, matching the displayed R~_0
        return Rhd(a(0), b(0)), _not_rhd_not(a(0), c(0)), And(b(0), Box(c(0)))
    x, y, z = slim_xyz(n - 1)
    return (
        Rhd(a(n), And(b(n), x)),
        And(_not_rhd_not(a(n), c(n)), Rhd(e(n), y)),
        conj(b(n), x, Box(c(n)), Rhd(e(n), a(n - 1)), Rhd(e(n), z)),
    )


def slim_tilde(n: int) -> Formula:
    x, y, z = slim_xyz(n)
    return Imp(x, Rhd(y, z))


def reversal_map(k: int) -> dict[Var, Var]:
    """Index reversal a_i -> a_{k-i} (also b, c) and e_i -> e_{k+1-i}."""
    m: dict[Var, Var] = {}
    for i in range(k + 1):
        for base in "abc":
            m[_v(base, i)] = _v(base, k - i)
    for i in range(1, k + 1):
        m[e(i)] = e(k + 1 - i)
    return m


# ---------------------------------------------------------------------------
# broad series

def _d(i: int) -> Var:
    return _v("d", i)


@lru_cache(maxsize=None)
def broad_u(n: int) -> Formula:
    if n < 1:
        raise ValueError("broad_u is defined for n >= 1")
    if n == 1:
        return Dia(_not_rhd_not(_d(1), Var("c")))
    return Dia(And(Rhd(_d(n - 1), _d(n)), broad_u(n - 1)))


def broad(n: int) -> Formula:
    if n < 0:
        raise ValueError("broad index must be >= 0")
    A, B, C = Var("a"), Var("b"), Var("c")
    if n == 0:
        ante = _not_rhd_not(A, C)
    else:
        ante = And(broad_u(n), Rhd(_d(n), A))
    return Imp(Rhd(A, B), Rhd(ante, And(B, Box(C))))


# ---------------------------------------------------------------------------
# named principles

_FIXED_TEXT = {
    "L1": "[](p -> q) -> []p -> []q",
    "L2": "[]p -> [][]p",
    "L3": "[]([]p -> p) -> []p",
    "J1": "[](p -> q) -> p |> q",
    "J2": "(p |> q) & (q |> r) -> p |> r",
    "J3": "(p |> r) & (q |> r) -> p | q |> r",
    "J4": "p |> q -> <>p -> <>q",
    "J5": "<>p |> p",
    "P": "p |> q -> [](p |> q)",
    "M": "p |> q -> p & []r |> q & []r",
    "W": "a |> b -> a |> b & []~a",
    "Wstar": "a |> b -> b & []c |> b & []c & []~a",
    "P0": "a |> <>b -> [](a |> b)",
    "Rprin": "a |> b -> ~(a |> ~c) |> b & []c",
    "Combined": "a |> b -> (c |> a) & <>~(c |> ~d) & (e |> <>f) |> b & []d & (e |> f)",
    "PDia": "a |> <>b -> [](a |> <>b)",
    "RDia": "a |> b -> ~(a |> <>c) |> b & []~c",
}

FIXED_NAMES = tuple(_FIXED_TEXT)
IL_AXIOMS = ("L1", "L2", "L3", "J1", "J2", "J3", "J4", "J5")


@lru_cache(maxsize=None)
def fixed(name: str) -> Formula:
    try:
        return parse(_FIXED_TEXT[name])
    except KeyError:
        raise ValueError(f"unknown principle {name!r}; known: {', '.join(FIXED_NAMES)}") from None


# ---------------------------------------------------------------------------
# schema identifiers

_FAMILIES = {
    "slim": slim,
    "slim-x": lambda n: slim_xyz(n)[0],
    "slim-y": lambda n: slim_xyz(n)[1],
    "slim-z": lambda n: slim_xyz(n)[2],
    "slim-tilde": slim_tilde,
    "broad-u": broad_u,
    "broad": broad,
}


@dataclass(frozen=True)
class SchemaId:
    family: str  # one of _FAMILIES or "fixed"
    n: int | None = None
    name: str | None = None

    def __post_init__(self) -> None:
        if self.family == "fixed":
            if self.name not in _FIXED_TEXT:
                raise ValueError(f"unknown principle {self.name!r}")
        elif self.family in _FAMILIES:
            if self.n is None or self.n < (1 if self.family == "broad-u" else 0):
                raise ValueError(f"bad index {self.n!r} for {self.family}")
        else:
            raise ValueError(f"unknown schema family {self.family!r}")

    def __str__(self) -> str:
        return f"fixed {self.name}" if self.family == "fixed" else f"{self.family} {self.n}"


def parse_schema_id(parts: list[str]) -> SchemaId:
    if len(parts) != 2:
        raise ValueError("schema id is FAMILY N or 'fixed' NAME")
    fam, arg = parts
    if fam == "fixed":
        return SchemaId("fixed", name=arg)
    try:
        n = int(arg)
    except ValueError:
        raise ValueError(f"index must be an integer, got {arg!r}") from None
    return SchemaId(fam, n=n)


def generate(sid: SchemaId) -> Formula:
    if sid.family == "fixed":
        return fixed(sid.name)
    return _FAMILIES[sid.family](sid.n)
