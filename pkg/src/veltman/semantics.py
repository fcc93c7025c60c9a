"""Forcing, model validity and frame validity on finite Veltman frames.

Truth sets are bitmasks over worlds. Two evaluators live here: a plain
recursive one over Python ints (:func:`truth_set`, :func:`force`) and a
vectorised one that evaluates a compiled formula on a whole batch of
valuations at once (:func:`frame_valid`). They share no code beyond the
frame's masks, and the tests play them against each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .formula import (
    And, Bottom, Box, Dia, Formula, Imp, Neg, Or, Rhd, Top, Var, parse, to_text, var_key,
    variables,
)
from .frames import Frame, FrameFormatError, parse_frame_lines, serialize_frame

__all__ = [
    "Valuation", "Exhaustive", "Sampled", "Valid", "Countermodel", "SampledClean",
    "Verdict", "BudgetExceeded", "DEFAULT_BUDGET",
    "truth_set", "force", "assuring", "model_valid", "frame_valid",
    "compile_formula", "evaluate_batch", "format_countermodel", "parse_countermodel",
]

DEFAULT_BUDGET = 28
CHUNK = 1 << 16

Valuation = Mapping[Var, int]
"""Variable -> bitmask of worlds where it is true. Missing variables are false."""


def _mask(v: Valuation, p: Var) -> int:
    return v.get(p, 0)


def truth_set(frame: Frame, v: Valuation, f: Formula, _memo: dict | None = None) -> int:
    """Bitmask of the worlds forcing ``f``."""
    memo = {} if _memo is None else _memo
    hit = memo.get(f)
    if hit is not None:
        return hit
    n, full = frame.n, (1 << frame.n) - 1
    up = frame.up
    if isinstance(f, Bottom):
        out = 0
    elif isinstance(f, Top):
        out = full
    elif isinstance(f, Var):
        out = _mask(v, f) & full
    elif isinstance(f, Neg):
        out = full & ~truth_set(frame, v, f.body, memo)
    elif isinstance(f, And):
        out = truth_set(frame, v, f.left, memo) & truth_set(frame, v, f.right, memo)
    elif isinstance(f, Or):
        out = truth_set(frame, v, f.left, memo) | truth_set(frame, v, f.right, memo)
    elif isinstance(f, Imp):
        out = (full & ~truth_set(frame, v, f.left, memo)) | truth_set(frame, v, f.right, memo)
    elif isinstance(f, Box):
        a = truth_set(frame, v, f.body, memo)
        out = sum(1 << x for x in range(n) if up[x] & ~a == 0)
    elif isinstance(f, Dia):
        a = truth_set(frame, v, f.body, memo)
        out = sum(1 << x for x in range(n) if up[x] & a)
    elif isinstance(f, Rhd):
        a = truth_set(frame, v, f.left, memo)
        b = truth_set(frame, v, f.right, memo)
        out = 0
        for x in range(n):
            row = frame.ssucc[x]
            if all(row[y] & b for y in range(n) if up[x] >> y & 1 and a >> y & 1):
                out |= 1 << x
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def force(frame: Frame, v: Valuation, w: int, f: Formula) -> bool:
    if not 0 <= w < frame.n:
        raise ValueError(f"world {w} outside frame of size {frame.n}")
    return bool(truth_set(frame, v, f) >> w & 1)


def assuring(frame: Frame, v: Valuation, c: Formula, x: int, y: int) -> bool:
    """Whether y is a c-assuring successor of x."""
    if not frame.r(x, y):
        return False
    cs = truth_set(frame, v, c)
    return bool(cs >> y & 1) and frame.ssucc[x][y] & ~cs == 0


def model_valid(frame: Frame, v: Valuation, f: Formula) -> bool:
    return truth_set(frame, v, f) == (1 << frame.n) - 1


# ---------------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class Exhaustive:
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class Sampled:
    samples: int = 10_000
    seed: int = 0


Strategy = Union[Exhaustive, Sampled]


@dataclass(frozen=True)
class Valid:
    strategy: str = "exhaustive"
    checked: int = 0


@dataclass(frozen=True)
class Countermodel:
    valuation: dict[Var, int] = field(hash=False)
    world: int
    index: int | None = None  # position in the search order that produced it

    def truth_sets(self) -> dict[str, list[int]]:
        return {p.name: [w for w in range(64) if m >> w & 1]
                for p, m in sorted(self.valuation.items(), key=lambda kv: var_key(kv[0]))}


@dataclass(frozen=True)
class SampledClean:
    samples: int
    seed: int


Verdict = Union[Valid, Countermodel, SampledClean]


class BudgetExceeded(ValueError):
    pass


# ---------------------------------------------------------------------------
# batch evaluator

def compile_formula(f: Formula) -> tuple[list[tuple], list[Var]]:
    """Flatten ``f`` into a post-order program over shared subformulas.

    Returns ``(program, vars)``; each instruction is ``(op, *operand_slots)``
    and the last instruction computes ``f``.
    """
    vs = sorted(variables(f), key=var_key)
    index = {p: i for i, p in enumerate(vs)}
    slots: dict[Formula, int] = {}
    prog: list[tuple] = []

    def emit(g: Formula) -> int:
        if g in slots:
            return slots[g]
        if isinstance(g, Var):
            ins = ("var", index[g])
        elif isinstance(g, (Top, Bottom)):
            ins = (type(g).__name__.lower(),)
        elif isinstance(g, (Neg, Box, Dia)):
            ins = (type(g).__name__.lower(), emit(g.body))
        else:
            ins = (type(g).__name__.lower(), emit(g.left), emit(g.right))
        prog.append(ins)
        slots[g] = len(prog) - 1
        return slots[g]

    emit(f)
    return prog, vs


def _dtype(n: int):
    if n > 63:
        raise ValueError("batch evaluator supports at most 63 worlds")
    return np.uint64


def evaluate_batch(frame: Frame, prog: list[tuple], masks: np.ndarray) -> np.ndarray:
    """Truth sets of the compiled formula for each row of ``masks`` (batch x vars)."""
    n = frame.n
    dt = _dtype(n)
    full = dt((1 << n) - 1)
    zero = dt(0)
    batch = masks.shape[0]
    up = [dt(m) for m in frame.up]
    ss = [[dt(m) for m in row] for row in frame.ssucc]
    pairs = [(x, [y for y in range(n) if frame.up[x] >> y & 1]) for x in range(n)]
    vals: list[np.ndarray] = []
    for ins in prog:
        op = ins[0]
        if op == "var":
            out = masks[:, ins[1]] & full
        elif op == "top":
            out = np.full(batch, full, dtype=dt)
        elif op == "bottom":
            out = np.zeros(batch, dtype=dt)
        elif op == "neg":
            out = vals[ins[1]] ^ full
        elif op == "and":
            out = vals[ins[1]] & vals[ins[2]]
        elif op == "or":
            out = vals[ins[1]] | vals[ins[2]]
        elif op == "imp":
            out = (vals[ins[1]] ^ full) | vals[ins[2]]
        elif op in ("box", "dia"):
            a = vals[ins[1]]
            out = np.zeros(batch, dtype=dt)
            for x in range(n):
                if op == "box":
                    ok = (a & up[x]) == up[x]
                else:
                    ok = (a & up[x]) != zero
                out |= ok.astype(dt) << dt(x)
        elif op == "rhd":
            a, b = vals[ins[1]], vals[ins[2]]
            out = np.zeros(batch, dtype=dt)
            for x, ys in pairs:
                ok = np.ones(batch, dtype=bool)
                for y in ys:
                    a_here = (a >> dt(y)) & dt(1)
                    ok &= (a_here == zero) | ((b & ss[x][y]) != zero)
                out |= ok.astype(dt) << dt(x)
        else:
            raise ValueError(f"bad instruction {ins!r}")
        vals.append(out)
    return vals[-1]


def _exhaustive_masks(start: int, stop: int, n: int, k: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    cols = [(idx >> np.uint64(i * n)) & full for i in range(k)]
    if not cols:
        return np.zeros((stop - start, 0), dtype=np.uint64)
    return np.stack(cols, axis=1)


def _first_failure(res: np.ndarray, full: int) -> int | None:
    bad = np.nonzero(res != np.uint64(full))[0]
    return int(bad[0]) if bad.size else None


def _lowest_zero(mask: int, n: int) -> int:
    for w in range(n):
        if not mask >> w & 1:
            return w
    raise ValueError("no failing world")


def frame_valid(frame: Frame, f: Formula, strategy: Strategy | None = None) -> Verdict:
    """Decide (or sample) validity of ``f`` on ``frame``.

    Only the variables of ``f`` are valuated. The exhaustive search visits
    valuations in increasing index order, where variable i (in sorted order)
    owns bits ``i*n .. i*n+n-1``; the first failure found is therefore the
    least countermodel.
    """
    strategy = strategy or Exhaustive()
    prog, vs = compile_formula(f)
    n, k = frame.n, len(vs)
    full = (1 << n) - 1
    if isinstance(strategy, Exhaustive):
        bits = n * k
        if bits > strategy.budget:
            raise BudgetExceeded(
                f"exhaustive check needs 2^{bits} valuations ({n} worlds x {k} variables); "
                f"budget is 2^{strategy.budget}")
        total = 1 << bits
        for start in range(0, total, CHUNK):
            stop = min(total, start + CHUNK)
            masks = _exhaustive_masks(start, stop, n, k)
            res = evaluate_batch(frame, prog, masks)
            bad = _first_failure(res, full)
            if bad is not None:
                row = masks[bad]
                val = {p: int(row[i]) for i, p in enumerate(vs)}
                return Countermodel(val, _lowest_zero(int(res[bad]), n), start + bad)
        return Valid("exhaustive", total)
    if isinstance(strategy, Sampled):
        rng = np.random.Generator(np.random.Philox(key=strategy.seed))
        done = 0
        while done < strategy.samples:
            m = min(CHUNK, strategy.samples - done)
            masks = rng.integers(0, full + 1, size=(m, k), dtype=np.uint64, endpoint=False) \
                if k else np.zeros((m, 0), dtype=np.uint64)
            res = evaluate_batch(frame, prog, masks)
            bad = _first_failure(res, full)
            if bad is not None:
                row = masks[bad]
                val = {p: int(row[i]) for i, p in enumerate(vs)}
                return Countermodel(val, _lowest_zero(int(res[bad]), n), done + bad)
            done += m
        return SampledClean(strategy.samples, strategy.seed)
    raise TypeError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# countermodel text

def format_valuation(v: Valuation) -> list[str]:
    lines = []
    for p in sorted(v, key=var_key):
        ws = [str(w) for w in range(64) if v[p] >> w & 1]
        lines.append(" ".join([f"V {p.name}:"] + ws))
    return lines


def format_countermodel(frame: Frame, v: Valuation, world: int, formula: Formula | None = None,
                        claim: str | None = None) -> str:
    """Frame text followed by ``V`` lines and the failing world (``at W``)."""
    head = []
    if claim:
        head.append(f"claim {claim}")
    if formula is not None:
        head.append(f"formula {to_text(formula)}")
    body = serialize_frame(frame).splitlines()
    return "\n".join(head + body + format_valuation(v) + [f"at {world}"]) + "\n"


@dataclass
class CountermodelFile:
    frame: Frame
    valuation: dict[Var, int]
    world: int
    formula: Formula | None = None
    claim: str | None = None


def parse_countermodel(text: str) -> CountermodelFile:
    frame_lines = []
    val: dict[Var, int] = {}
    world = None
    formula = claim = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        head, _, rest = line.partition(" ")
        if head == "claim":
            claim = rest
        elif head == "formula":
            formula = parse(rest)
        elif head == "V":
            name, colon, ws = rest.partition(":")
            if not colon:
                raise FrameFormatError("V line needs 'var:'", lineno)
            try:
                val[Var(name.strip())] = sum(1 << int(w) for w in ws.split())
            except ValueError as exc:
                raise FrameFormatError(str(exc), lineno) from None
        elif head == "at":
            try:
                world = int(rest)
            except ValueError:
                raise FrameFormatError(f"bad world {rest!r}", lineno) from None
        else:
            frame_lines.append((lineno, raw))
    if world is None:
        raise FrameFormatError("missing 'at' line")
    frame = parse_frame_lines(frame_lines)
    for p, m in val.items():
        if m >> frame.n:
            raise FrameFormatError(f"valuation of {p.name} names a world outside the frame")
    if world >= frame.n:
        raise FrameFormatError(f"failing world {world} outside the frame")
    return CountermodelFile(frame, val, world, formula, claim)
