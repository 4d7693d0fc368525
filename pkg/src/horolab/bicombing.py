"""Bicombings, their reparametrisation, and the quasi-geodesic/convexity checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import DEFAULT_TOL, CoarseParams, VerificationReport

_GRID_EPS = 1e-12


@dataclass(frozen=True)
class Bicombing:
    """A path selector Gamma(x, y, t) for t in [0, 1], endpoints exact up to tol.

    ``ray_profile``, when set, vectorises t -> d(rpGamma(o,x,t), rpGamma(o,y,t))
    over an array of radii t <= min(d(o,x), d(o,y)); checkers use it as a fast
    path and fall back to per-point evaluation otherwise.
    """

    map: Callable
    params: CoarseParams
    ray_profile: Callable | None = None

    def __call__(self, x, y, t: float):
        return self.map(x, y, t)


@dataclass(frozen=True)
class ParamGrid:
    """Discretises the continuous quantifiers (t, s, c) of the inequalities.

    ``stop`` may be ``math.inf`` for grids that only contribute a step size to
    radius scans; such grids cannot be materialised with :meth:`points`.
    """

    step: float = 1.0 / 64.0
    start: float = 0.0
    stop: float = 1.0

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError(f"grid step must be > 0, got {self.step}")
        if self.stop < self.start:
            raise ValueError("grid range is empty")

    def points(self) -> list[float]:
        if math.isinf(self.stop):
            raise ValueError("cannot materialise an unbounded grid")
        span = self.stop - self.start
        n = int(math.floor(span / self.step + _GRID_EPS))
        pts = [self.start + i * self.step for i in range(n + 1)]
        if pts[-1] < self.stop - _GRID_EPS * max(1.0, abs(self.stop)):
            pts.append(self.stop)
        else:
            pts[-1] = self.stop
        return pts


UNIT_GRID = ParamGrid()


def scan_grid(step: float) -> ParamGrid:
    """Grid used for radius scans: only the step matters, the range is unbounded."""
    return ParamGrid(step=step, start=0.0, stop=math.inf)


def reparametrize(space, gamma: Bicombing, x, y, t: float):
    """Evaluate the arclength reparametrisation: Gamma(x,y,t/d(x,y)) for t <= d(x,y), else y."""
    if t < 0.0:
        raise ValueError(f"reparametrisation parameter must be >= 0, got {t}")
    d = space.distance(x, y)
    if d <= 0.0 or t > d:
        return y
    return gamma(x, y, t / d)


def check_quasi_geodesic(
    space,
    gamma: Bicombing,
    pairs: Sequence,
    grid: ParamGrid,
    p: CoarseParams,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Both quasi-geodesic bounds on every pair and every unordered (t, s) grid pair.

    Lower: |t-s| d(x,y)/lam - k <= d(Gamma_t, Gamma_s); upper: <= lam |t-s| d(x,y) + k.
    """
    report = VerificationReport()
    ts = grid.points()
    for x, y in pairs:
        dxy = space.distance(x, y)
        pts = [gamma(x, y, t) for t in ts]
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                gap = abs(ts[i] - ts[j]) * dxy
                dist = space.distance(pts[i], pts[j])
                report.record((x, y, ts[i], ts[j], "lower"), gap / p.lam - p.k, dist, tol)
                report.record((x, y, ts[i], ts[j], "upper"), dist, p.lam * gap + p.k, tol)
    return report


def check_convexity_i(
    space,
    gamma: Bicombing,
    quads: Sequence,
    c_grid: ParamGrid,
    E: float,
    C: float,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Weighted convexity along combing lines.

    For each (x1, x2, y1, y2, a, b) and every c on the grid, with
    y1' = Gamma(x1,y1,a) and y2' = Gamma(x2,y2,b):
    d(Gamma(x1,y1,ca), Gamma(x2,y2,cb)) <= (1-c) E d(x1,x2) + c E d(y1',y2') + C.
    """
    report = VerificationReport()
    cs = c_grid.points()
    for x1, x2, y1, y2, a, b in quads:
        y1p = gamma(x1, y1, a)
        y2p = gamma(x2, y2, b)
        dx = space.distance(x1, x2)
        dyp = space.distance(y1p, y2p)
        for c in cs:
            lhs = space.distance(gamma(x1, y1, c * a), gamma(x2, y2, c * b))
            rhs = (1.0 - c) * E * dx + c * E * dyp + C
            report.record((x1, x2, y1, y2, a, b, c), lhs, rhs, tol)
    return report


def check_theta_ii(
    space,
    gamma: Bicombing,
    quads: Sequence,
    ts_grid: ParamGrid,
    theta: Callable[[float], float],
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """Parameter-comparison bound |t d(x1,y1) - s d(x2,y2)| <= theta(d(x1,x2) + d(Gamma_t, Gamma_s))."""
    report = VerificationReport()
    ts = ts_grid.points()
    for x1, x2, y1, y2 in quads:
        d1 = space.distance(x1, y1)
        d2 = space.distance(x2, y2)
        dx = space.distance(x1, x2)
        pts1 = [gamma(x1, y1, t) for t in ts]
        pts2 = [gamma(x2, y2, s) for s in ts]
        for i, t in enumerate(ts):
            for j, s in enumerate(ts):
                lhs = abs(t * d1 - s * d2)
                rhs = theta(dx + space.distance(pts1[i], pts2[j]))
                report.record((x1, x2, y1, y2, t, s), lhs, rhs, tol)
    return report
