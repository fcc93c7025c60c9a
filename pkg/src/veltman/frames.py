"""Finite Veltman frames.

Worlds are ``0..n-1``. ``R`` is a set of ordered pairs; ``S[x]`` is the set of
pairs making up the relation ``S_x`` on ``x``'s R-successors. Besides the pair
sets every frame carries bitmask views (``up[x]``, ``ssucc[x][y]``) that the
evaluators use.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Mapping

__all__ = [
    "Frame", "FrameDefect", "DefectKind", "FrameFormatError",
    "validate", "make_frame", "parse_frame", "serialize_frame",
    "enumerate_frames", "enumerate_upto", "count_frames", "posets", "chain_length",
    "frame_hash",
]

Pair = tuple[int, int]


class DefectKind(enum.Enum):
    RCycle = "RCycle"
    RNotTransitive = "RNotTransitive"
    SOutOfDomain = "SOutOfDomain"
    SNotReflexive = "SNotReflexive"
    SNotTransitive = "SNotTransitive"
    SMissingR = "SMissingR"


@dataclass(frozen=True)
class FrameDefect:
    kind: DefectKind
    witness: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.kind.value} at {self.witness}"


@dataclass(frozen=True, eq=True)
class Frame:
    n: int
    R: frozenset[Pair]
    S: tuple[frozenset[Pair], ...]
    names: tuple[str, ...] | None = field(default=None, compare=False)

    @cached_property
    def up(self) -> tuple[int, ...]:
        out = [0] * self.n
        for x, y in self.R:
            out[x] |= 1 << y
        return tuple(out)

    @cached_property
    def ssucc(self) -> tuple[tuple[int, ...], ...]:
        """``ssucc[x][y]``: bitmask of worlds z with y S_x z."""
        rows = []
        for x in range(self.n):
            row = [0] * self.n
            for y, z in self.S[x]:
                row[y] |= 1 << z
            rows.append(tuple(row))
        return tuple(rows)

    def r(self, x: int, y: int) -> bool:
        return bool(self.up[x] >> y & 1)

    def s(self, x: int, y: int, z: int) -> bool:
        return bool(self.ssucc[x][y] >> z & 1)

    def successors(self, x: int) -> list[int]:
        m = self.up[x]
        return [y for y in range(self.n) if m >> y & 1]

    def s_successors(self, x: int, y: int) -> list[int]:
        m = self.ssucc[x][y]
        return [z for z in range(self.n) if m >> z & 1]

    def __str__(self) -> str:
        return serialize_frame(self)


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


# ---------------------------------------------------------------------------
# validation

def validate(n: int, R: Iterable[Pair], S: Mapping[int, Iterable[Pair]] | None = None,
             names: tuple[str, ...] | None = None) -> Frame | list[FrameDefect]:
    """Check the Veltman frame conditions, returning a Frame or every defect found."""
    R = frozenset((int(x), int(y)) for x, y in R)
    S = S or {}
    Sx = tuple(frozenset((int(y), int(z)) for y, z in S.get(x, ())) for x in range(n))
    defects: list[FrameDefect] = []
    for x, y in sorted(R):
        if not (0 <= x < n and 0 <= y < n):
            raise ValueError(f"R pair {(x, y)} outside 0..{n - 1}")
    for x in S:
        if not 0 <= x < n:
            raise ValueError(f"S given for world {x} outside 0..{n - 1}")

    up = [frozenset(y for (x2, y) in R if x2 == x) for x in range(n)]
    cycle = _find_cycle(n, up)
    if cycle is not None:
        defects.append(FrameDefect(DefectKind.RCycle, cycle))
    for x, y in sorted(R):
        for z in sorted(up[y]):
            if z not in up[x]:
                defects.append(FrameDefect(DefectKind.RNotTransitive, (x, y, z)))
    for x in range(n):
        dom = up[x]
        rel = Sx[x]
        for y, z in sorted(rel):
            if y not in dom or z not in dom:
                defects.append(FrameDefect(DefectKind.SOutOfDomain, (x, y, z)))
        for y in sorted(dom):
            if (y, y) not in rel:
                defects.append(FrameDefect(DefectKind.SNotReflexive, (x, y)))
        succ: dict[int, set[int]] = {}
        for y, z in rel:
            succ.setdefault(y, set()).add(z)
        for y, z in sorted(rel):
            for t in sorted(succ.get(z, ())):
                if (y, t) not in rel:
                    defects.append(FrameDefect(DefectKind.SNotTransitive, (x, y, z, t)))
        for y in sorted(dom):
            for z in sorted(up[y] & dom):
                if (y, z) not in rel:
                    defects.append(FrameDefect(DefectKind.SMissingR, (x, y, z)))
    if defects:
        return defects
    return Frame(n, R, Sx, names)


def _find_cycle(n: int, up: list[frozenset[int]]) -> tuple[int, ...] | None:
    color = [0] * n
    stack: list[int] = []

    def dfs(x: int) -> tuple[int, ...] | None:
        color[x] = 1
        stack.append(x)
        for y in sorted(up[x]):
            if color[y] == 1:
                return tuple(stack[stack.index(y):]) + (y,)
            if color[y] == 0:
                found = dfs(y)
                if found:
                    return found
        stack.pop()
        color[x] = 2
        return None

    for x in range(n):
        if color[x] == 0:
            found = dfs(x)
            if found:
                return found
    return None


def make_frame(n: int, R: Iterable[Pair], S: Mapping[int, Iterable[Pair]] | None = None,
               names: tuple[str, ...] | None = None) -> Frame:
    """Like :func:`validate` but raises ``ValueError`` listing the defects."""
    out = validate(n, R, S, names)
    if isinstance(out, list):
        raise ValueError("invalid Veltman frame: " + "; ".join(map(str, out)))
    return out


# ---------------------------------------------------------------------------
# text format

class FrameFormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(f"line {line}: {msg}" if line is not None else msg)
        self.line = line


_PAIR_R = re.compile(r"(\d+)>(\d+)$")
_PAIR_S = re.compile(r"(\d+)~(\d+)$")


def parse_frame_lines(lines: Iterable[tuple[int, str]]) -> Frame:
    """Parse numbered lines of frame text; other line kinds are rejected."""
    n = None
    names = None
    R: list[Pair] = []
    S: dict[int, set[Pair]] = {}
    for lineno, raw in lines:
        line = raw.strip()
        if line.startswith("# names:"):
            names = tuple(line[len("# names:"):].split())
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "worlds":
            if n is not None:
                raise FrameFormatError("duplicate 'worlds' line", lineno)
            try:
                n = int(rest)
            except ValueError:
                raise FrameFormatError(f"bad world count {rest!r}", lineno) from None
            if n < 1:
                raise FrameFormatError("world count must be >= 1", lineno)
        elif head == "R":
            if n is None:
                raise FrameFormatError("'R' before 'worlds'", lineno)
            for tok in rest.split():
                m = _PAIR_R.match(tok)
                if not m:
                    raise FrameFormatError(f"bad R pair {tok!r}", lineno)
                R.append(_in_range((int(m[1]), int(m[2])), n, lineno))
        elif head == "S":
            if n is None:
                raise FrameFormatError("'S' before 'worlds'", lineno)
            world, colon, pairs = rest.partition(":")
            if not colon:
                raise FrameFormatError("S line needs 'x:'", lineno)
            try:
                x = int(world)
            except ValueError:
                raise FrameFormatError(f"bad world {world!r}", lineno) from None
            _in_range((x, x), n, lineno)
            if x in S:
                raise FrameFormatError(f"duplicate S line for world {x}", lineno)
            S[x] = set()
            for tok in pairs.split():
                m = _PAIR_S.match(tok)
                if not m:
                    raise FrameFormatError(f"bad S pair {tok!r}", lineno)
                S[x].add(_in_range((int(m[1]), int(m[2])), n, lineno))
        else:
            raise FrameFormatError(f"unknown line kind {head!r}", lineno)
    if n is None:
        raise FrameFormatError("missing 'worlds' line")
    up = [{y for (x2, y) in R if x2 == x} for x in range(n)]
    full = {x: S.get(x, set()) | {(y, y) for y in up[x]} for x in range(n)}
    out = validate(n, R, full, names)
    if isinstance(out, list):
        raise FrameFormatError("invalid Veltman frame: " + "; ".join(map(str, out)))
    return out


def _in_range(p: Pair, n: int, lineno: int) -> Pair:
    if not (0 <= p[0] < n and 0 <= p[1] < n):
        raise FrameFormatError(f"world out of range in {p}", lineno)
    return p


def parse_frame(text: str) -> Frame:
    return parse_frame_lines(enumerate(text.splitlines(), 1))


def serialize_frame(frame: Frame) -> str:
    lines = []
    if frame.names:
        lines.append("# names: " + " ".join(frame.names))
    lines.append(f"worlds {frame.n}")
    lines.append(" ".join(["R"] + [f"{x}>{y}" for x, y in sorted(frame.R)]))
    for x in range(frame.n):
        if frame.S[x]:
            lines.append(f"S {x}: " + " ".join(f"{y}~{z}" for y, z in sorted(frame.S[x])))
    return "\n".join(lines) + "\n"


def frame_hash(frame: Frame) -> str:
    body = serialize_frame(Frame(frame.n, frame.R, frame.S))
    return hashlib.sha256(body.encode()).hexdigest()[:12]


# ---------------------------------------------------------------------------
# enumeration

def _natural_posets(n: int) -> Iterator[tuple[int, ...]]:
    """Strict orders with every R-edge i->j having i < j, as tuples of up-masks.

    Each element k picks its set of R-predecessors among 0..k-1; the set must
    be closed under taking further predecessors.
    """
    def extend(k: int, down: list[int]) -> Iterator[list[int]]:
        # down[i]: predecessors of i
        if k == n:
            yield down
            return
        for pred in range(1 << k):
            if all(down[i] & ~pred == 0 for i in _bits(pred)):
                yield from extend(k + 1, down + [pred])

    for down in extend(0, []):
        up = [0] * n
        for j, pm in enumerate(down):
            for i in _bits(pm):
                up[i] |= 1 << j
        yield tuple(up)


def _permute_up(up: tuple[int, ...], perm: tuple[int, ...]) -> tuple[int, ...]:
    """Relabel world i as perm[i]."""
    n = len(up)
    out = [0] * n
    for i in range(n):
        m = 0
        for j in _bits(up[i]):
            m |= 1 << perm[j]
        out[perm[i]] = m
    return tuple(out)


def _signature(up: tuple[int, ...]) -> list[tuple[int, int, int]]:
    n = len(up)
    indeg = [sum(up[j] >> i & 1 for j in range(n)) for i in range(n)]
    height = [0] * n
    for i in sorted(range(n), key=lambda i: bin(up[i]).count("1")):
        height[i] = 1 + max((height[j] for j in _bits(up[i])), default=-1)
    return [(indeg[i], -height[i], -bin(up[i]).count("1")) for i in range(n)]


def _sig_perms(up: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """Relabelings that sort worlds by an isomorphism-invariant signature."""
    sig = _signature(up)
    classes: dict[tuple, list[int]] = {}
    for i, s in enumerate(sig):
        classes.setdefault(s, []).append(i)
    groups = [classes[k] for k in sorted(classes)]
    slots = []
    start = 0
    for g in groups:
        slots.append(list(range(start, start + len(g))))
        start += len(g)
    for choice in itertools.product(*(itertools.permutations(s) for s in slots)):
        perm = [0] * len(up)
        for g, targets in zip(groups, choice):
            for src, dst in zip(g, targets):
                perm[src] = dst
        yield tuple(perm)


@lru_cache(maxsize=None)
def posets(n: int) -> tuple[tuple[int, ...], ...]:
    """One representative strict order per isomorphism class, in canonical form."""
    seen = set()
    reps = []
    for up in _natural_posets(n):
        canon = min(_permute_up(up, p) for p in _sig_perms(up))
        if canon not in seen:
            seen.add(canon)
            reps.append(canon)
    reps.sort()
    return tuple(reps)


@lru_cache(maxsize=None)
def labeled_posets(n: int) -> tuple[tuple[int, ...], ...]:
    out = set()
    for rep in posets(n):
        for perm in itertools.permutations(range(n)):
            out.add(_permute_up(rep, perm))
    return tuple(sorted(out))


def _automorphisms(up: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [p for p in _sig_perms(up) if _permute_up(up, p) == up]


@lru_cache(maxsize=4096)
def _s_choices(up_x: int, up: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """All S_x for a world with successor mask ``up_x``, as row masks indexed by world.

    Each choice is a reflexive transitive relation on the successors that
    contains R restricted to them.
    """
    dom = list(_bits(up_x))
    n = len(up)
    base = [0] * n
    for y in dom:
        base[y] = (1 << y) | (up[y] & up_x)
    free = [(y, z) for y in dom for z in dom if y != z and not base[y] >> z & 1]
    out: list[tuple[int, ...]] = []

    def close(rows: list[int], y: int, z: int) -> list[int]:
        # add y->z and everything transitivity then demands
        rows = rows[:]
        src = [t for t in dom if t == y or rows[t] >> y & 1]
        tgt = rows[z]
        for t in src:
            rows[t] |= tgt
        return rows

    def walk(i: int, rows: list[int], excluded: list[int]) -> None:
        if i == len(free):
            out.append(tuple(rows))
            return
        y, z = free[i]
        if rows[y] >> z & 1:
            walk(i + 1, rows, excluded)
            return
        excluded[y] |= 1 << z
        walk(i + 1, rows, excluded)
        excluded[y] &= ~(1 << z)
        grown = close(rows, y, z)
        if all(grown[t] & excluded[t] == 0 for t in dom):
            walk(i + 1, grown, excluded)

    walk(0, base, [0] * n)
    return tuple(sorted(out))


def _frame_from_masks(up: tuple[int, ...], srows: tuple[tuple[int, ...], ...]) -> Frame:
    n = len(up)
    R = frozenset((x, y) for x in range(n) for y in _bits(up[x]))
    S = tuple(frozenset((y, z) for y in range(n) for z in _bits(srows[x][y])) for x in range(n))
    f = Frame(n, R, S)
    # prime the cached views from the masks we already have
    f.__dict__["up"] = up
    f.__dict__["ssucc"] = srows
    return f


def _frames_over(up: tuple[int, ...], autos: list[tuple[int, ...]] | None) -> Iterator[Frame]:
    n = len(up)
    per_world = [_s_choices(up[x], up) for x in range(n)]
    for srows in itertools.product(*per_world):
        if autos is not None and not _is_canonical_s(srows, autos):
            continue
        yield _frame_from_masks(up, srows)


def _is_canonical_s(srows: tuple[tuple[int, ...], ...], autos: list[tuple[int, ...]]) -> bool:
    n = len(srows)
    for p in autos:
        img = [None] * n
        for x in range(n):
            img[p[x]] = _permute_rows(srows[x], p)
        if tuple(img) < srows:
            return False
    return True


def _permute_rows(rows: tuple[int, ...], p: tuple[int, ...]) -> tuple[int, ...]:
    out = [0] * len(rows)
    for y, m in enumerate(rows):
        if m:
            v = 0
            for z in _bits(m):
                v |= 1 << p[z]
            out[p[y]] = v
    return tuple(out)


def chain_length(up: tuple[int, ...]) -> int:
    """Number of edges on the longest R-chain."""
    memo: dict[int, int] = {}

    def longest(x: int) -> int:
        if x not in memo:
            memo[x] = max((1 + longest(y) for y in _bits(up[x])), default=0)
        return memo[x]

    return max((longest(x) for x in range(len(up))), default=0)


def enumerate_frames(n: int, dedup: bool = True, min_chain: int = 0) -> Iterator[Frame]:
    """Yield every Veltman frame on worlds 0..n-1, deterministically.

    With ``dedup`` one frame per isomorphism class is produced: R runs over
    canonical representatives of the strict orders and, for each, only S
    assignments that are least in their orbit under the automorphisms of R
    are kept. ``min_chain`` skips orders whose longest chain is shorter.
    """
    if n < 1:
        raise ValueError("need at least one world")
    orders = posets(n) if dedup else labeled_posets(n)
    for up in orders:
        if min_chain and chain_length(up) < min_chain:
            continue
        autos = None
        if dedup:
            autos = [p for p in _automorphisms(up) if p != tuple(range(n))]
        yield from _frames_over(up, autos)


def enumerate_upto(max_n: int, dedup: bool = True, min_n: int = 1,
                   min_chain: int = 0) -> Iterator[Frame]:
    for n in range(min_n, max_n + 1):
        yield from enumerate_frames(n, dedup, min_chain)


def count_frames(n: int, dedup: bool = False) -> int:
    return sum(1 for _ in enumerate_frames(n, dedup))
