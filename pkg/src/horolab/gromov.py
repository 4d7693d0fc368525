"""Products along reparametrised rays, escaping sequences, ideal-point tests,
ray witnesses, and the visual quasi-metric."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bicombing import Bicombing, ParamGrid, reparametrize
from .core import DEFAULT_TOL, VerificationReport

_EPS = 1e-12


@dataclass(frozen=True)
class EscapingSequence:
    """Finite stand-in for a point at infinity: radii strictly increase."""

    points: tuple
    radii: tuple


def escaping_sequence(space, points: Sequence) -> EscapingSequence:
    pts = tuple(points)
    if not pts:
        raise ValueError("empty sequence")
    radii = tuple(space.distance(space.o, p) for p in pts)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    return EscapingSequence(pts, radii)


@dataclass(frozen=True)
class DirectionWitness:
    """A far point of an escaping sequence standing in for the extended ray."""

    sequence: EscapingSequence
    index: int
    cap: float

    def __post_init__(self) -> None:
        if not 0 <= self.index < len(self.sequence.points):
            raise ValueError("witness index out of range")
        if self.sequence.radii[self.index] < self.cap - _EPS:
            raise ValueError("witness point closer than the evaluation cap")


def direction_witness(seq: EscapingSequence, cap: float | None = None) -> DirectionWitness:
    idx = len(seq.points) - 1
    return DirectionWitness(seq, idx, seq.radii[idx] if cap is None else cap)


def _scan(space, gamma: Bicombing, x, y, D1: float, grid: ParamGrid, stop: float) -> float:
    """Largest grid radius t <= stop with d(rp(o,x,t), rp(o,y,t)) <= D1; stop itself is scanned."""
    n = int(math.floor(stop / grid.step + _EPS))
    if gamma.ray_profile is not None:
        ts = np.arange(n + 1, dtype=float) * grid.step
        if ts[-1] < stop - _EPS:
            ts = np.append(ts, stop)
        else:
            ts[-1] = stop
        good = np.nonzero(gamma.ray_profile(x, y, ts) <= D1)[0]
        return float(ts[good[-1]]) if good.size else 0.0
    o = space.o
    best = 0.0
    ts = [i * grid.step for i in range(n + 1)]
    if not ts or ts[-1] < stop - _EPS:
        ts.append(stop)
    else:
        ts[-1] = stop
    for t in ts:
        px = reparametrize(space, gamma, o, x, t)
        py = reparametrize(space, gamma, o, y, t)
        if space.distance(px, py) <= D1:
            best = t
    return best


def gromov_product(space, gamma: Bicombing, x, y, D1: float, grid: ParamGrid) -> float:
    """min of the two radii and the last scanned radius at which the rays stay D1-close.

    The sup over t is a grid scan from 0 through the smaller radius (appended
    exactly); when the bound never fails below it the smaller radius itself is
    returned.
    """
    rx = space.distance(space.o, x)
    ry = space.distance(space.o, y)
    m = min(rx, ry)
    if m <= 0.0:
        return 0.0
    if grid.stop < m - _EPS:
        raise ValueError(f"grid range [{grid.start}, {grid.stop}] does not cover [0, {m}]")
    return min(m, _scan(space, gamma, x, y, D1, grid, m))


def check_d2_inequality(
    space,
    gamma: Bicombing,
    triples: Sequence,
    D1: float,
    D2: float,
    grid: ParamGrid,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """(x|z) >= min{(x|y), (y|z)} / D2, allowing two grid steps of scan slack."""
    report = VerificationReport()
    slack = 2.0 * grid.step
    for x, y, z in triples:
        pxz = gromov_product(space, gamma, x, z, D1, grid)
        pxy = gromov_product(space, gamma, x, y, D1, grid)
        pyz = gromov_product(space, gamma, y, z, D1, grid)
        lhs = min(pxy, pyz) / D2 - slack
        report.record((x, y, z), lhs, pxz, tol)
    return report


def _pair_products(space, gamma, pts1, pts2, D1, grid) -> list[float]:
    return [gromov_product(space, gamma, a, b, D1, grid) for a, b in zip(pts1, pts2)]


def is_escaping(
    space,
    gamma: Bicombing,
    seq,
    thresholds: Sequence[float],
    D1: float,
    grid: ParamGrid,
) -> bool:
    """Finite surrogate for pairwise products tending to infinity.

    Accepts either an :class:`EscapingSequence` or a raw point list; raw lists
    with non-increasing radii simply fail (the constructed type forbids them).
    """
    if isinstance(seq, EscapingSequence):
        pts, radii = seq.points, seq.radii
    else:
        pts = tuple(seq)
        radii = tuple(space.distance(space.o, p) for p in pts)
    if len(pts) < 3:
        raise ValueError("need at least 3 points to probe escape")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        return False
    n = len(pts)
    # suffix_min[i] = min over pairs (a, b) with i <= a < b of the product
    suffix_min = [math.inf] * (n - 1)
    for i in range(n - 2, -1, -1):
        row = min(
            gromov_product(space, gamma, pts[i], pts[j], D1, grid) for j in range(i + 1, n)
        )
        nxt = suffix_min[i + 1] if i + 1 <= n - 2 else math.inf
        suffix_min[i] = min(row, nxt)
    best_tail = max(suffix_min)
    return all(best_tail > tau for tau in thresholds)


def same_ideal_point(
    space,
    gamma: Bicombing,
    s1,
    s2,
    thresholds: Sequence[float],
    D1: float,
    grid: ParamGrid,
) -> bool:
    """True when the paired products clear every threshold beyond some index."""
    if not is_escaping(space, gamma, s1, thresholds, D1, grid):
        raise ValueError("first sequence is not escaping")
    if not is_escaping(space, gamma, s2, thresholds, D1, grid):
        raise ValueError("second sequence is not escaping")
    pts1 = s1.points if isinstance(s1, EscapingSequence) else tuple(s1)
    pts2 = s2.points if isinstance(s2, EscapingSequence) else tuple(s2)
    n = min(len(pts1), len(pts2))
    prods = _pair_products(space, gamma, pts1[:n], pts2[:n], D1, grid)
    suffix_min = list(prods)
    for i in range(n - 2, -1, -1):
        suffix_min[i] = min(suffix_min[i], suffix_min[i + 1])
    best_tail = max(suffix_min)
    return all(best_tail > tau for tau in thresholds)


def ray_witness(space, gamma: Bicombing, seq: EscapingSequence, t: float):
    """Evaluate the farthest stored point's reparametrised ray at radius t."""
    cap = seq.radii[-1]
    if t > cap + _EPS:
        raise ValueError(f"radius {t} beyond the witness cap {cap}")
    return reparametrize(space, gamma, space.o, seq.points[-1], t)


def visual_quasimetric(space, gamma: Bicombing, x, y, epsilon: float, D1: float, grid: ParamGrid) -> float:
    """exp(-epsilon * product); a quasi-metric on directions, values in (0, 1]."""
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    return math.exp(-epsilon * gromov_product(space, gamma, x, y, D1, grid))
