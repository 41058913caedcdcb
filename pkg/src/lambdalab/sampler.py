"""Singular Boltzmann samplers with size-window rejection.

Four term families: plain, m-open, closed (= 0-open) and h-shallow (closed
with every index value at most h).  The generator for the bounded families
walks an openness-budget ladder: in state m it may emit an index below m, an
application (both children stay in state m) or an abstraction (the child
moves to state m + 1).  Branch probabilities are ratios of the ladder values
L_m(z), so conditioned on its size the output is uniform over the family.

By default z sits exactly at the family's dominant singularity, where the
expected size is infinite; the size window plus rejection turns that into a
practical generator for sizes in the tens of thousands.
"""

from __future__ import annotations

import hashlib
import math
import random
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

from . import asymptotics
from .measures import ParameterReport, measure
from .terms import Abs, App, Index, Term

__all__ = [
    "FAMILIES",
    "BranchingTables",
    "CalibrationError",
    "SampleRecord",
    "SamplerConfig",
    "SamplingError",
    "calibrate",
    "family_singularity",
    "sample",
    "sample_batch",
    "worker_seed",
]

FAMILIES = ("plain", "m_open", "closed", "h_shallow")


class CalibrationError(RuntimeError):
    """Branching probabilities failed to normalize, or a ladder value is gone.

    Either one means the evaluation point or the ladder recursion is wrong;
    neither can be fixed by retrying.
    """


class SamplingError(RuntimeError):
    """No sample landed in the size window within the attempt budget."""


@dataclass(frozen=True)
class SamplerConfig:
    family: str = "plain"
    m: int = 0  # openness budget when family == "m_open"
    h: int = 30  # index-value ceiling when family == "h_shallow"
    z: Optional[float] = None  # None = the family's own singularity
    size_window: Tuple[int, int] = (20000, 50000)
    seed: int = 0
    max_attempts: int = 1_000_000
    ladder_depth: int = 64


@dataclass(frozen=True)
class BranchingTables:
    """Immutable per-state branch tables; safe to share across workers.

    ``rows[m]`` holds cumulative branch boundaries for ladder state m in the
    order abstraction, application, index 0, ..., index m-1.  States at or
    beyond ``len(rows)`` either clamp to the last row (``saturated``, the
    h-shallow case, where deep levels all obey the same equation) or fall
    back to the plain-term probabilities in ``plain_cut`` with a geometric
    index value — the substitution is off from the true ladder by O(z^depth).
    """

    family: str
    z: float
    singularity: float
    start_state: int
    rows: Tuple[Tuple[float, ...], ...]
    saturated: bool
    plain_cut: Tuple[float, float]
    log_z: float


@dataclass(frozen=True)
class SampleRecord:
    """One accepted draw: the term, its parameter report, and provenance."""

    term: Term
    report: ParameterReport
    size: int
    attempts: int
    worker: int
    index: int


def family_singularity(config: SamplerConfig) -> float:
    """Dominant singularity of the configured family's generating function."""
    if config.family == "h_shallow":
        return asymptotics.h_shallow_singularity(config.h)
    # plain, m-open and closed terms all share the plain singularity
    return asymptotics.compute_rho()


def _plain_value(z: float) -> float:
    """L(z) for plain terms, radicand in the factored form that survives z=ρ."""
    rad = (1 - 3 * z - z * z - z ** 3) / (1 - z)
    if rad < -1e-9:
        raise CalibrationError(f"z={z!r} lies beyond the plain singularity")
    return (1 - z - math.sqrt(max(rad, 0.0))) / (2 * z)


def _ladder_values(z: float, depth: int) -> List[float]:
    """L_m(z) for m = 0..depth, closing the recursion with L_depth = L∞(z)."""
    vals = [0.0] * (depth + 1)
    vals[depth] = _plain_value(z)
    for m in range(depth - 1, -1, -1):
        supply = z * (1 - z ** m) / (1 - z)
        q = 1 - 4 * z * (z * vals[m + 1] + supply)
        if q <= 0:
            raise CalibrationError(f"ladder level {m} has no real value at z={z!r}")
        vals[m] = (1 - math.sqrt(q)) / (2 * z)
    return vals


def _shallow_values(z: float, h: int) -> List[float]:
    """L_d(z) for the h-shallow levels d = 0..h+1.

    Level h+1 is saturated — every deeper level satisfies the same equation —
    so it is solved self-referentially first and the rest descend from it.
    """
    rad = (1 - z) ** 2 - 4 * z * z * (1 - z ** (h + 1)) / (1 - z)
    if rad < -1e-9:
        raise CalibrationError(f"z={z!r} lies beyond the h-shallow singularity")
    vals = [0.0] * (h + 2)
    vals[h + 1] = (1 - z - math.sqrt(max(rad, 0.0))) / (2 * z)
    for d in range(h, -1, -1):
        supply = z * (1 - z ** d) / (1 - z)
        q = 1 - 4 * z * (z * vals[d + 1] + supply)
        if q <= 0:
            raise CalibrationError(f"shallow level {d} has no real value at z={z!r}")
        vals[d] = (1 - math.sqrt(q)) / (2 * z)
    return vals


def _row(z: float, own: float, child: float, width: int) -> Tuple[float, ...]:
    """Cumulative boundaries [λ, @, index 0, ..., index width-1] for one state."""
    probs = [z * child / own, z * own]
    probs.extend(z ** (j + 1) / own for j in range(width))
    total = math.fsum(probs)
    if abs(total - 1) > 1e-12:
        raise CalibrationError(f"state probabilities sum to {total!r}, not 1")
    out: List[float] = []
    acc = 0.0
    for p in probs:
        acc += p
        out.append(acc / total)
    out[-1] = 1.0  # after renormalizing, close the row so bisect cannot fall off
    return tuple(out)


def calibrate(config: SamplerConfig) -> BranchingTables:
    """Branch tables for the configured family at its evaluation point.

    Plain terms at z use P(λ) = z, P(@) = zL(z), P(index) = z/((1-z)L(z)) with
    geometrically distributed index values; those three sum to 1 exactly by
    the defining equation of L.  Ladder states use the analogous ratios of
    consecutive ladder values.  Any state whose probabilities miss 1 by more
    than 1e-12 raises CalibrationError.
    """
    if config.family not in FAMILIES:
        raise ValueError(f"unknown family {config.family!r}")
    if config.family == "m_open" and config.m < 0:
        raise ValueError("openness budget m must be >= 0")
    if config.family == "h_shallow" and config.h < 0:
        raise ValueError("shallowness bound h must be >= 0")
    lo, hi = config.size_window
    if not 0 < lo <= hi:
        raise ValueError("size window must satisfy 0 < lo <= hi")
    if config.ladder_depth < 1:
        raise ValueError("ladder depth must be >= 1")
    if config.max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")

    sing = family_singularity(config)
    z = sing if config.z is None else float(config.z)
    if not 0 < z <= sing + 1e-12:
        # past the singularity the branching probabilities cannot normalize
        raise CalibrationError(f"z must lie in (0, {sing}]; got {z!r}")
    z = min(z, sing)

    if config.family == "plain":
        rows: Tuple[Tuple[float, ...], ...] = ()
        saturated = False
        start = 0
        value = _plain_value(z)
    elif config.family == "h_shallow":
        vals = _shallow_values(z, config.h)
        top = config.h + 1
        rows = tuple(
            _row(z, vals[s], vals[min(s + 1, top)], s) for s in range(top + 1)
        )
        saturated = True
        start = 0
        value = vals[top]
    else:  # m_open or closed
        depth = config.ladder_depth
        vals = _ladder_values(z, depth)
        rows = tuple(_row(z, vals[m], vals[m + 1], m) for m in range(depth))
        saturated = False
        start = config.m if config.family == "m_open" else 0
        value = vals[depth]

    if saturated:
        # deep states clamp to the saturated row; the plain fallback is unused
        plain_cut = (rows[-1][0], rows[-1][1])
    else:
        p_lambda = z
        p_app = z * value
        p_index = z / ((1 - z) * value)
        total = math.fsum((p_lambda, p_app, p_index))
        if abs(total - 1) > 1e-12:
            raise CalibrationError(f"plain probabilities sum to {total!r}, not 1")
        plain_cut = (p_lambda / total, (p_lambda + p_app) / total)

    return BranchingTables(
        family=config.family,
        z=z,
        singularity=sing,
        start_state=start,
        rows=rows,
        saturated=saturated,
        plain_cut=plain_cut,
        log_z=math.log(z),
    )


def _build(decisions: List[int]) -> Term:
    """Rebuild the term from its prefix decision stream (-1 = λ, -2 = @)."""
    out: List[Term] = []
    push = out.append
    pop = out.pop
    for d in reversed(decisions):
        if d >= 0:
            push(Index(d))
        elif d == -1:
            push(Abs(pop()))
        else:
            push(App(pop(), pop()))
    if len(out) != 1:
        raise SamplingError("decision stream did not close into a single term")
    return out[0]


def _draw(
    tables: BranchingTables,
    rng: random.Random,
    lo: int,
    hi: int,
    max_attempts: int,
) -> Tuple[Term, int, int]:
    """One accepted (term, size, attempts) triple, or SamplingError.

    An attempt aborts as soon as its running size passes the window top; any
    term it kills would have been rejected anyway, so the conditional law of
    the accepted output is untouched.
    """
    rows = tables.rows
    n_rows = len(rows)
    saturated = tables.saturated
    cut_lambda, cut_app = tables.plain_cut
    log_z = tables.log_z
    guarded = tables.family != "plain"
    rand = rng.random
    log = math.log

    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        size = 0
        decisions: List[int] = []
        emit = decisions.append
        stack = [tables.start_state]
        pop = stack.pop
        grow = stack.append
        ok = True
        while stack:
            m = pop()
            if m >= n_rows:
                if saturated:
                    m = n_rows - 1
                else:
                    r = rand()
                    if r < cut_lambda:
                        size += 1
                        if size > hi:
                            ok = False
                            break
                        emit(-1)
                        grow(m + 1)
                    elif r < cut_app:
                        size += 1
                        if size > hi:
                            ok = False
                            break
                        emit(-2)
                        grow(m)
                        grow(m)
                    else:
                        v = int(log(1.0 - rand()) / log_z)
                        if guarded and v >= m:
                            # beyond-depth substitution drew an index the real
                            # ladder forbids; probability O(z^depth) per draw
                            ok = False
                            break
                        size += v + 1
                        if size > hi:
                            ok = False
                            break
                        emit(v)
                    continue
            row = rows[m]
            k = bisect_right(row, rand())
            if k >= len(row):
                k = len(row) - 1
            if k == 0:
                size += 1
                if size > hi:
                    ok = False
                    break
                emit(-1)
                grow(m + 1)
            elif k == 1:
                size += 1
                if size > hi:
                    ok = False
                    break
                emit(-2)
                grow(m)
                grow(m)
            else:
                v = k - 2
                size += v + 1
                if size > hi:
                    ok = False
                    break
                emit(v)
        if ok and lo <= size:
            return _build(decisions), size, attempts
    raise SamplingError(
        f"no sample landed in [{lo}, {hi}] within {max_attempts} attempts"
    )


def sample(config: SamplerConfig) -> Term:
    """One term from the configured family with size inside the window."""
    tables = calibrate(config)
    rng = random.Random(config.seed)
    lo, hi = config.size_window
    term, _, _ = _draw(tables, rng, lo, hi, config.max_attempts)
    return term


def worker_seed(seed: int, worker: int) -> int:
    """Derived 64-bit seed for one worker: sha256(f"{seed}/{worker}")[:8]."""
    digest = hashlib.sha256(f"{seed}/{worker}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_batch(
    config: SamplerConfig, count: int, workers: int = 1
) -> Iterator[SampleRecord]:
    """Stream `count` accepted samples with their parameter reports.

    Deterministic given (seed, workers): worker i owns its own generator
    seeded by worker_seed(seed, i), handles a contiguous block of
    ceil/floor(count / workers) draws, and the stream is the concatenation of
    the workers' blocks in worker order.  Changing `workers` reshuffles the
    stream; repeating a call reproduces it exactly.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    tables = calibrate(config)
    lo, hi = config.size_window
    base, extra = divmod(count, workers)
    for w in range(workers):
        quota = base + (1 if w < extra else 0)
        rng = random.Random(worker_seed(config.seed, w))
        for i in range(quota):
            term, size, attempts = _draw(tables, rng, lo, hi, config.max_attempts)
            yield SampleRecord(
                term=term,
                report=measure(term),
                size=size,
                attempts=attempts,
                worker=w,
                index=i,
            )
