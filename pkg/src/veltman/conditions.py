"""First-order frame conditions for the slim and broad series, P and M.

Besides deciding the conditions, this module turns a failure of a condition
into a concrete valuation refuting the matching principle, following the
valuations written down in the correspondence proofs. Every such valuation is
re-checked with :func:`veltman.semantics.force` before it is handed out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .formula import Formula, Var
from .frames import Frame
from .schemata import broad, slim_tilde
from .semantics import compile_formula, evaluate_batch, force, format_countermodel

__all__ = [
    "SlimFailure", "BroadChain", "BroadFailure", "Witness", "SeparationCertificate",
    "WitnessError",
    "g_holds", "g_failure", "slim_condition", "b_holds", "broad_condition", "pm_condition",
    "slim_witness_valuation", "broad_witness_valuation", "separation_certificate",
]


def _bits(mask: int) -> Iterator[int]:
    w = 0
    while mask:
        if mask & 1:
            yield w
        mask >>= 1
        w += 1


# ---------------------------------------------------------------------------
# slim: G_n and F_n

Step = tuple[int, "int | None"]


def g_failure(frame: Frame, n: int, x: int, y: int, z: int) -> list[Step] | None:
    """Trace of why G_n(x, y, z) fails, or None if it holds.

    Each step is ``(u, None)`` when ``z R u`` but not ``y S_x u``, or
    ``(u, v)`` when ``u S_x v`` and G_{n-1}(z, u, v) fails; in the latter case
    the trace continues one level down with ``(z, u, v)`` as the new triple.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    ss = frame.ssucc
    for u in _bits(frame.up[z]):
        if not ss[x][y] >> u & 1:
            return [(u, None)]
        if n > 0:
            for v in _bits(ss[x][u]):
                sub = g_failure(frame, n - 1, z, u, v)
                if sub is not None:
                    return [(u, v)] + sub
    return None


def g_holds(frame: Frame, n: int, x: int, y: int, z: int) -> bool:
    return g_failure(frame, n, x, y, z) is None


@dataclass(frozen=True)
class SlimFailure:
    """wRxRyS_wz with G_n(x, y, z) failing; ``trace`` as in :func:`g_failure`."""

    n: int
    w: int
    x: int
    y: int
    z: int
    trace: tuple[Step, ...]

    def claim(self) -> str:
        return f"F{self.n} fails at w={self.w} x={self.x} y={self.y} z={self.z}"

    def replays(self, frame: Frame) -> bool:
        """Check the quadruple and walk the trace down to a violated clause."""
        if not (frame.r(self.w, self.x) and frame.r(self.x, self.y)
                and frame.s(self.w, self.y, self.z)):
            return False
        x, y, z, level = self.x, self.y, self.z, self.n
        for i, (u, v) in enumerate(self.trace):
            if level < 0 or not frame.r(z, u):
                return False
            if v is None:
                return not frame.s(x, y, u) and i == len(self.trace) - 1
            if level == 0 or not frame.s(x, y, u) or not frame.s(x, u, v):
                return False
            x, y, z, level = z, u, v, level - 1
        return False


def slim_condition(frame: Frame, n: int) -> SlimFailure | None:
    """None if F_n holds, else the first failing (w, x, y, z) in lexicographic order."""
    for w in range(frame.n):
        for x in _bits(frame.up[w]):
            for y in _bits(frame.up[x]):
                for z in _bits(frame.ssucc[w][y]):
                    tr = g_failure(frame, n, x, y, z)
                    if tr is not None:
                        return SlimFailure(n, w, x, y, z, tuple(tr))
    return None


# ---------------------------------------------------------------------------
# broad: B_n and F^n

@dataclass(frozen=True)
class BroadChain:
    """``xs`` runs x_{n+1}, ..., x_0 and ``ys`` runs y_0, ..., y_{n+1}."""

    xs: tuple[int, ...]
    ys: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.xs) - 2

    def valid_in(self, frame: Frame) -> bool:
        xs, ys = self.xs, self.ys
        if len(xs) != len(ys) or len(xs) < 2:
            return False
        up_chain = xs[::-1]  # x_0, x_1, ..., x_{n+1}
        if not frame.r(up_chain[0], ys[0]):
            return False
        for i in range(len(up_chain) - 1):
            if not frame.r(up_chain[i + 1], up_chain[i]):
                return False
            if not frame.s(up_chain[i + 1], ys[i], ys[i + 1]):
                return False
        return True


@dataclass(frozen=True)
class BroadFailure:
    chain: BroadChain
    u: int

    @property
    def n(self) -> int:
        return self.chain.n

    def claim(self) -> str:
        xs = ",".join(map(str, self.chain.xs))
        ys = ",".join(map(str, self.chain.ys))
        return f"F^{self.n} fails at x={xs} y={ys} u={self.u}"


def _b_levels(frame: Frame, n: int, x0: int, y0: int) -> list[dict[tuple[int, int], tuple[int, int] | None]]:
    """Reachable (x_{j+1}, y_{j+1}) pairs for j = 0..n, each with a parent pair."""
    if not frame.r(x0, y0):
        return [{} for _ in range(n + 1)]
    preds = [[p for p in range(frame.n) if frame.up[p] >> q & 1] for q in range(frame.n)]
    level: dict[tuple[int, int], tuple[int, int] | None] = {}
    for x1 in preds[x0]:
        for y1 in _bits(frame.ssucc[x1][y0]):
            level[(x1, y1)] = None
    levels = [level]
    for _ in range(n):
        nxt: dict[tuple[int, int], tuple[int, int] | None] = {}
        for (x, y) in sorted(levels[-1]):
            for xp in preds[x]:
                for yp in _bits(frame.ssucc[xp][y]):
                    nxt.setdefault((xp, yp), (x, y))
        levels.append(nxt)
    return levels


def _chain_from(levels, n: int, x0: int, y0: int, x_hi: int, y_hi: int) -> BroadChain:
    xs, ys = [x_hi], [y_hi]
    pair = (x_hi, y_hi)
    for j in range(n, 0, -1):
        pair = levels[j][pair]
        xs.append(pair[0])
        ys.append(pair[1])
    xs.append(x0)
    ys.append(y0)
    return BroadChain(tuple(xs), tuple(reversed(ys)))


def b_holds(frame: Frame, n: int, x_hi: int, x0: int, y0: int, y_hi: int) -> BroadChain | None:
    """A chain witnessing B_n(x_hi, x0, y0, y_hi), or None."""
    levels = _b_levels(frame, n, x0, y0)
    if (x_hi, y_hi) not in levels[n]:
        return None
    return _chain_from(levels, n, x0, y0, x_hi, y_hi)


def broad_condition(frame: Frame, n: int) -> BroadFailure | None:
    """None if F^n holds, else the least failing (x_{n+1}, x0, y0, y_{n+1}, u)."""
    best = None
    for x0 in range(frame.n):
        for y0 in _bits(frame.up[x0]):
            levels = _b_levels(frame, n, x0, y0)
            cone = frame.ssucc[x0][y0]
            for (x_hi, y_hi) in levels[n]:
                bad = frame.up[y_hi] & ~cone
                if bad:
                    u = next(_bits(bad))
                    key = (x_hi, x0, y0, y_hi, u)
                    if best is None or key < best[0]:
                        best = (key, levels)
    if best is None:
        return None
    (x_hi, x0, y0, y_hi, u), levels = best
    return BroadFailure(_chain_from(levels, n, x0, y0, x_hi, y_hi), u)


# ---------------------------------------------------------------------------
# P and M

def pm_condition(frame: Frame, which: str) -> tuple[int, int, int, int] | None:
    """None if the condition holds, else the first (x, y, z, u) violating it.

    P: xRyRzS_xu implies zS_yu.  M: yS_xzRu implies yRu.
    """
    ss, up = frame.ssucc, frame.up
    if which == "P":
        for x in range(frame.n):
            for y in _bits(up[x]):
                for z in _bits(up[y]):
                    for u in _bits(ss[x][z]):
                        if not ss[y][z] >> u & 1:
                            return (x, y, z, u)
        return None
    if which == "M":
        for x in range(frame.n):
            for y in _bits(up[x]):
                for z in _bits(ss[x][y]):
                    for u in _bits(up[z]):
                        if not up[y] >> u & 1:
                            return (x, y, z, u)
        return None
    raise ValueError(f"which must be 'P' or 'M', got {which!r}")


# ---------------------------------------------------------------------------
# witness valuations

class WitnessError(RuntimeError):
    pass


@dataclass
class Witness:
    valuation: dict[Var, int]
    world: int
    path: str  # "proof" or "pattern-search"
    formula: Formula = field(repr=False)

    def verify(self, frame: Frame) -> bool:
        return not force(frame, self.valuation, self.world, self.formula)

    def __iter__(self):
        # lets callers unpack ``valuation, world = witness``
        return iter((self.valuation, self.world))


def _var(base: str, i: int | None = None) -> Var:
    return Var(base if i is None else f"{base}{i}")


def _slim_level_valuation(frame: Frame, k: int, x: int, y: int, z: int,
                          trace: list[Step]) -> dict[Var, int]:
    """Valuation with x |- Y_k, x R^{c_k} y, z |- X_{k-1} and z failing the rest of Z_k."""
    ss = frame.ssucc
    val = {_var("c", k): ss[x][y], _var("a", k): 1 << y}
    u, v = trace[0]
    if v is None:
        return val
    a, b = trace[1]
    if b is None:
        val.update({
            _var("e", k): 1 << u,
            _var("a", k - 1): 1 << a,
            _var("b", k - 1): 1 << a,
            _var("c", k - 1): ss[v][a],
        })
        return val
    inner = _slim_level_valuation(frame, k - 1, v, a, b, trace[2:])
    inner.update(val)
    inner.update({
        _var("e", k): 1 << u,
        _var("a", k - 1): 1 << a,
        _var("b", k - 1): 1 << b,
    })
    return inner


def slim_witness_valuation(frame: Frame, k: int, failure: SlimFailure) -> Witness:
    """Valuation and world refuting R~_k, built from a failure of F_{2k}."""
    if failure.n != 2 * k:
        raise ValueError(f"need a failure of F{2 * k}, got one of F{failure.n}")
    if not failure.replays(frame):
        raise ValueError(f"{failure.claim()} does not hold on this frame")
    target = slim_tilde(k)
    val = _slim_level_valuation(frame, k, failure.x, failure.y, failure.z, list(failure.trace))
    val[_var("b", k)] = 1 << failure.z
    wit = Witness(val, failure.w, "proof", target)
    if wit.verify(frame):
        return wit
    return _pattern_search(frame, target, failure.w)


def broad_witness_valuation(frame: Frame, n: int, failure: BroadFailure) -> Witness:
    """Valuation refuting R^n at x_{n+1}, from a chain and an offending u."""
    chain = failure.chain
    if chain.n != n:
        raise ValueError(f"chain has length for n={chain.n}, expected {n}")
    x0, y0 = chain.xs[-1], chain.ys[0]
    y_hi = chain.ys[-1]
    if not chain.valid_in(frame) or not frame.r(y_hi, failure.u) or frame.s(x0, y0, failure.u):
        raise ValueError(f"{failure.claim()} does not hold on this frame")
    ys = chain.ys
    val = {
        _var("b"): 1 << ys[n + 1],
        _var("a"): 1 << ys[n],
        _var("c"): frame.ssucc[x0][y0],
    }
    for i in range(1, n + 1):
        val[_var("d", i)] = 1 << ys[i - 1]
    target = broad(n)
    wit = Witness(val, chain.xs[0], "proof", target)
    if wit.verify(frame):
        return wit
    return _pattern_search(frame, target, chain.xs[0])


def _pattern_pool(frame: Frame) -> list[int]:
    pool = {0}
    for w in range(frame.n):
        pool.add(1 << w)
        pool.add(frame.up[w])
        for y in _bits(frame.up[w]):
            pool.add(frame.ssucc[w][y])
    return sorted(pool)


def _pattern_search(frame: Frame, f: Formula, world: int, limit: int = 1 << 20) -> Witness:
    """Search valuations whose truth sets are empty, singletons, R-cones or S-cones."""
    prog, vs = compile_formula(f)
    pool = np.array(_pattern_pool(frame), dtype=np.uint64)
    k = len(vs)
    total = len(pool) ** k
    rng = np.random.Generator(np.random.Philox(key=0))
    tried = 0
    while tried < min(total, limit):
        m = min(1 << 14, min(total, limit) - tried)
        if total <= limit:
            idx = np.arange(tried, tried + m, dtype=np.int64)
            cols = [(idx // len(pool) ** i) % len(pool) for i in range(k)]
        else:
            cols = [rng.integers(0, len(pool), size=m) for _ in range(k)]
        masks = np.stack([pool[c] for c in cols], axis=1)
        res = evaluate_batch(frame, prog, masks)
        hit = np.nonzero((res >> np.uint64(world)) & np.uint64(1) == 0)[0]
        if hit.size:
            row = masks[hit[0]]
            wit = Witness({p: int(row[i]) for i, p in enumerate(vs)}, world, "pattern-search", f)
            if wit.verify(frame):
                return wit
        tried += m
    raise WitnessError(f"no refuting valuation found for {f} at world {world}")


# ---------------------------------------------------------------------------
# separation

@dataclass
class SeparationCertificate:
    frame: Frame
    n: int
    m: int
    failure: BroadFailure
    valuation: dict[Var, int]
    world: int

    def verify(self) -> bool:
        return (broad_condition(self.frame, self.n) is None
                and self.failure.chain.valid_in(self.frame)
                and not force(self.frame, self.valuation, self.world, broad(self.m)))

    def to_text(self) -> str:
        claim = f"F^{self.n} holds; " + self.failure.claim()
        return format_countermodel(self.frame, self.valuation, self.world, broad(self.m), claim)


def separation_certificate(frame: Frame, n: int, m: int) -> SeparationCertificate | None:
    """Certificate that ``frame`` validates R^n but not R^m, if it does."""
    if broad_condition(frame, n) is not None:
        return None
    fail = broad_condition(frame, m)
    if fail is None:
        return None
    wit = broad_witness_valuation(frame, m, fail)
    return SeparationCertificate(frame, n, m, fail, wit.valuation, wit.world)
