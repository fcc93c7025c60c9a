"""Experiment sweeps behind the ``correspond``, ``separate`` and ``hierarchy`` commands.

A sweep walks enumerated frames, decides a frame condition and confronts it
with the semantics. Anything that contradicts a correspondence theorem is a
*mismatch*; reports carry the offending frames so a mismatch can be replayed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable

from . import __version__
from .conditions import (
    broad_condition, broad_witness_valuation, g_holds, pm_condition, separation_certificate,
    slim_condition, slim_witness_valuation, SeparationCertificate, WitnessError,
)
from .formula import Formula, flatten_and, substitute
from .frames import Frame, enumerate_frames, enumerate_upto, frame_hash, serialize_frame
from .schemata import broad, fixed, reversal_map, slim, slim_tilde
from .semantics import (
    Countermodel, Exhaustive, Sampled, Valid, compile_formula, format_countermodel,
    frame_valid,
)

FAMILIES = ("slim", "broad", "P", "M")


@dataclass
class Row:
    frame: str  # hash
    size: int
    condition: str  # "holds" / "fails"
    principle: str  # "valid", "sampled-clean", "refuted", ...
    witness: str | None = None
    note: str = ""


@dataclass
class Report:
    experiment: str
    config: dict
    rows: list[Row] = field(default_factory=list)
    certificates: dict[str, str] = field(default_factory=dict)
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> dict[str, int]:
        out: dict[str, int] = {"frames": len(self.rows)}
        for r in self.rows:
            out[f"condition-{r.condition}"] = out.get(f"condition-{r.condition}", 0) + 1
            out[f"principle-{r.principle}"] = out.get(f"principle-{r.principle}", 0) + 1
        out["witnesses"] = sum(1 for r in self.rows if r.witness)
        out["mismatches"] = len(self.mismatches)
        return out

    def finish(self) -> "Report":
        self.rows.sort(key=lambda r: (r.frame, r.condition, r.principle))
        self.mismatches.sort()
        return self

    def to_text(self, verbose: bool = False) -> str:
        cfg = " ".join(f"{k}={v}" for k, v in sorted(self.config.items()))
        lines = [f"experiment {self.experiment}", f"config {cfg}"]
        if verbose:
            for r in self.rows:
                wit = f" witness={r.witness}" if r.witness else ""
                note = f" ({r.note})" if r.note else ""
                lines.append(f"row {r.frame} n={r.size} condition={r.condition} "
                             f"principle={r.principle}{wit}{note}")
        for k, v in sorted(self.summary().items()):
            lines.append(f"{k} {v}")
        for m in self.mismatches:
            lines.append("MISMATCH " + m.splitlines()[0])
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        body = {
            "experiment": self.experiment,
            "config": self.config,
            "summary": self.summary(),
            "rows": [asdict(r) for r in self.rows],
            "certificates": self.certificates,
            "mismatches": self.mismatches,
        }
        return json.dumps(body, indent=2, sort_keys=True) + "\n"


def _strategy_name(strategy) -> str:
    if isinstance(strategy, Sampled):
        return f"sampled(n={strategy.samples},seed={strategy.seed})"
    if isinstance(strategy, Exhaustive):
        return f"exhaustive(budget={strategy.budget})"
    return "auto"


def _choose(frame: Frame, f: Formula, strategy):
    """``None`` means exhaustive when within budget, else 10,000 samples from seed 0."""
    if strategy is not None:
        return strategy
    k = len(compile_formula(f)[1])
    if frame.n * k <= Exhaustive().budget:
        return Exhaustive()
    return Sampled()


def _family(family: str, n: int | None):
    """(condition, principle, witness builder or None) for a family."""
    if family == "slim":
        return (lambda fr: slim_condition(fr, 2 * n), slim_tilde(n),
                lambda fr, fail: slim_witness_valuation(fr, n, fail))
    if family == "broad":
        return (lambda fr: broad_condition(fr, n), broad(n),
                lambda fr, fail: broad_witness_valuation(fr, n, fail))
    if family in ("P", "M"):
        return (lambda fr: pm_condition(fr, family), fixed(family), None)
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")


def _claim(family: str, fail) -> str:
    if family in ("P", "M"):
        x, y, z, u = fail
        return f"{family} fails at x={x} y={y} z={z} u={u}"
    return fail.claim()


def correspond(family: str, n: int | None, size: int, strategy=None, dedup: bool = True,
               progress: Callable[[int], None] | None = None) -> Report:
    """Check the frame correspondence for one principle on all frames up to ``size``."""
    cond, principle, build = _family(family, n)
    exp = f"correspond-{family}" + (f"-{n}" if n is not None else "")
    rep = Report(exp, {"size": size, "strategy": _strategy_name(strategy), "dedup": dedup,
                       "version": __version__, "principle": str(principle)})
    for i, frame in enumerate(enumerate_upto(size, dedup)):
        if progress:
            progress(i)
        h = frame_hash(frame)
        fail = cond(frame)
        strat = _choose(frame, principle, strategy)
        if fail is None:
            verdict = frame_valid(frame, principle, strat)
            if isinstance(verdict, Countermodel):
                rep.rows.append(Row(h, frame.n, "holds", "refuted"))
                rep.mismatches.append(
                    f"{h}: condition holds but principle refuted\n"
                    + format_countermodel(frame, verdict.valuation, verdict.world, principle))
            else:
                tag = "valid" if isinstance(verdict, Valid) else "sampled-clean"
                rep.rows.append(Row(h, frame.n, "holds", tag))
            continue
        claim = _claim(family, fail)
        if build is not None:
            try:
                wit = build(frame, fail)
            except WitnessError as exc:
                rep.rows.append(Row(h, frame.n, "fails", "unrefuted", note=str(exc)))
                rep.mismatches.append(f"{h}: {claim} but no refutation found\n"
                                      + serialize_frame(frame))
                continue
            ref = f"{h}-{family}{n}"
            rep.certificates[ref] = format_countermodel(frame, wit.valuation, wit.world,
                                                        principle, claim)
            note = "" if wit.path == "proof" else wit.path
            if isinstance(strat, Exhaustive):
                # independent second opinion from the exhaustive search
                if isinstance(frame_valid(frame, principle, strat), Valid):
                    rep.mismatches.append(f"{h}: {claim} yet exhaustively valid\n"
                                          + serialize_frame(frame))
            rep.rows.append(Row(h, frame.n, "fails", "refuted", ref, note))
            continue
        verdict = frame_valid(frame, principle, strat)
        if isinstance(verdict, Countermodel):
            ref = f"{h}-{family}"
            rep.certificates[ref] = format_countermodel(frame, verdict.valuation, verdict.world,
                                                        principle, claim)
            rep.rows.append(Row(h, frame.n, "fails", "refuted", ref))
        elif isinstance(verdict, Valid):
            rep.rows.append(Row(h, frame.n, "fails", "valid"))
            rep.mismatches.append(f"{h}: {claim} yet exhaustively valid\n"
                                  + serialize_frame(frame))
        else:
            rep.rows.append(Row(h, frame.n, "fails", "sampled-clean", note="no countermodel sampled"))
    return rep.finish()


def separate(n: int, m: int, max_size: int = 7) -> tuple[SeparationCertificate | None, int]:
    """Smallest frame (in enumeration order) validating R^n but not R^m.

    Returns the certificate (or None) and the number of frames examined.
    Orders without an R-chain of m+2 edges cannot refute F^m and are skipped.
    """
    if n == m:
        raise ValueError("n and m must differ")
    if n < 0 or m < 0:
        raise ValueError("indices must be >= 0")
    seen = 0
    for size in range(1, max_size + 1):
        for frame in enumerate_frames(size, dedup=True, min_chain=m + 2):
            seen += 1
            cert = separation_certificate(frame, n, m)
            if cert is not None:
                if not cert.verify():
                    raise WitnessError("separation certificate failed re-verification")
                return cert, seen
    return None, seen


def hierarchy(max_n: int, size: int, dedup: bool = True) -> Report:
    """Check F_{n+1} => F_n and G_{n+1} => G_n; on frames of <= 3 worlds also R_1 => R_0."""
    rep = Report(f"hierarchy-{max_n}", {"size": size, "max": max_n, "dedup": dedup,
                                          "version": __version__})
    for frame in enumerate_upto(size, dedup):
        h = frame_hash(frame)
        holds = [slim_condition(frame, k) is None for k in range(max_n + 1)]
        for k in range(max_n):
            if holds[k + 1] and not holds[k]:
                rep.mismatches.append(f"{h}: F{k + 1} holds but F{k} fails\n"
                                      + serialize_frame(frame))
        for x in range(frame.n):
            for y in range(frame.n):
                for z in range(frame.n):
                    g = [g_holds(frame, k, x, y, z) for k in range(max_n + 1)]
                    for k in range(max_n):
                        if g[k + 1] and not g[k]:
                            rep.mismatches.append(
                                f"{h}: G{k + 1}({x},{y},{z}) holds but G{k} fails\n"
                                + serialize_frame(frame))
        note = ""
        if frame.n <= 3:
            v1 = isinstance(frame_valid(frame, slim(1)), Valid)
            v0 = isinstance(frame_valid(frame, slim(0)), Valid)
            note = f"R1={'valid' if v1 else 'refuted'} R0={'valid' if v0 else 'refuted'}"
            if v1 and not v0:
                rep.mismatches.append(f"{h}: R1 valid but R0 refuted\n" + serialize_frame(frame))
        profile = "".join("1" if b else "0" for b in holds)
        rep.rows.append(Row(h, frame.n, f"F0..F{max_n}={profile}",
                            "checked" if note else "unchecked", note=note))
    return rep.finish()


def renaming_identity(max_k: int) -> list[tuple[int, bool]]:
    """For k <= max_k: does R_{2k} equal R~_k with indices reversed, up to conjunction grouping?"""
    out = []
    for k in range(max_k + 1):
        renamed = substitute(slim_tilde(k), reversal_map(k))
        out.append((k, flatten_and(renamed) == flatten_and(slim(2 * k))))
    return out
