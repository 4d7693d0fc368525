"""Window functions: normalized distance functions, their limits on finite
windows, base-point changes, bounded-difference classification, Busemann
values for the cone metric, and the sandwich-exclusion certificate."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

from .bicombing import Bicombing, reparametrize
from .cone import ConeMetricContext, cone_metric, floor_radius
from .core import CoarseParams, DerivedConstants
from .gromov import DirectionWitness
from .serialize import point_jsonable, point_label, write_csv
from .spaces import FiniteMetricSpace

_EPS = 1e-12

EXCLUSION_CAVEAT = (
    "one-sided: refutes the sandwich only for the sampled reference point and "
    "radius schedule, not for every bounded perturbation"
)


@dataclass(frozen=True)
class SampleWindow:
    """Finite stand-in for a ball around the base point; always contains it."""

    points: tuple
    radius: float
    rule: str
    o_index: int


def make_window(
    space,
    radius: float,
    step: float | None = None,
    rule: str = "grid",
    seed: int | None = None,
    count: int = 0,
) -> SampleWindow:
    """Deterministic grid window (default) or a seeded random one."""
    if rule == "grid":
        pts = list(space.window_points(radius, step))
        tag = f"grid:step={step}" if step is not None else "grid"
    elif rule == "random":
        rng = random.Random(seed)
        pts = []
        tries = 0
        while len(pts) < count and tries < 1000 * max(count, 1):
            tries += 1
            cand = space.sample(rng, radius)
            if space.distance(space.o, cand) <= radius:
                pts.append(cand)
        tag = f"random:seed={seed}:count={count}"
    else:
        raise ValueError(f"unknown window rule {rule!r}")
    if space.o in pts:
        o_index = pts.index(space.o)
    else:
        pts.insert(0, space.o)
        o_index = 0
    for p in pts:
        if space.distance(space.o, p) > radius + 1e-9:
            raise ValueError(f"window point {p} outside radius {radius}")
    return SampleWindow(tuple(pts), radius, tag, o_index)


@dataclass(frozen=True)
class WindowFunction:
    """A real function recorded by its values on a shared window."""

    window: SampleWindow
    values: tuple
    provenance: str

    def value_at(self, point) -> float:
        return self.values[self.window.points.index(point)]


def _shared_window(fs: Sequence[WindowFunction]) -> SampleWindow:
    w = fs[0].window
    for f in fs[1:]:
        if f.window is not w and f.window != w:
            raise ValueError("window functions live on mixed windows")
    return w


def phi_window(space, x, w: SampleWindow) -> WindowFunction:
    """phi_x = d(-, x) - d(o, x) sampled on the window."""
    base = space.distance(space.o, x)
    vals = tuple(space.distance(u, x) - base for u in w.points)
    return WindowFunction(w, vals, "phi")


def psi_window(space, gamma: Bicombing, x, w: SampleWindow, variant: str = "floor") -> WindowFunction:
    """psi_x = d_c(-, x) - d(o, x) sampled on the window (cone metric from gamma)."""
    ctx = ConeMetricContext(space, gamma, variant)
    base = space.distance(space.o, x)
    vals = tuple(cone_metric(ctx, u, x) - base for u in w.points)
    return WindowFunction(w, vals, "psi")


@dataclass(frozen=True)
class ConvergenceReport:
    max_gap: float
    pairs: int
    tol: float
    converged: bool


def limit_on_window(
    fs: Sequence[WindowFunction], tol: float = 1e-6
) -> tuple[WindowFunction, ConvergenceReport]:
    """Take the last function as the limit and report the Cauchy gap of the tail half."""
    if not fs:
        raise ValueError("empty function list")
    w = _shared_window(fs)
    tail = fs[len(fs) // 2 :]
    max_gap = 0.0
    pairs = 0
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            pairs += 1
            gap = max(abs(a - b) for a, b in zip(tail[i].values, tail[j].values))
            max_gap = max(max_gap, gap)
    limit = WindowFunction(w, fs[-1].values, "limit")
    return limit, ConvergenceReport(max_gap, pairs, tol, max_gap <= tol)


def sup_distance_on_window(f: WindowFunction, g: WindowFunction) -> float:
    _shared_window((f, g))
    return max(abs(a - b) for a, b in zip(f.values, g.values))


def rebase(f: WindowFunction, o_prime) -> WindowFunction:
    """Subtract the value at o_prime pointwise, normalising there instead of at o."""
    try:
        idx = f.window.points.index(o_prime)
    except ValueError as exc:
        raise ValueError(f"rebase point {o_prime} is not sampled in the window") from exc
    shift = f.values[idx]
    return WindowFunction(f.window, tuple(v - shift for v in f.values), f.provenance)


@dataclass(frozen=True)
class ReducedClassVerdict:
    """Growth-based verdict on whether two function families stay boundedly close."""

    verdict: str  # bounded | growing | inconclusive
    plateau: float
    slope: float
    radii: tuple
    sups: tuple
    gate: float


def default_slope_gate(p: CoarseParams, dc: DerivedConstants, r_max: float) -> float:
    """Sits between the bounded-class plateau (<= E D1 + C) and linear separation."""
    return max(1e-3, (p.E * dc.D1 + p.C) / r_max)


def classify_bounded_difference(
    fs: Sequence[WindowFunction],
    gs: Sequence[WindowFunction],
    slope_gate: float,
) -> ReducedClassVerdict:
    """Fit sup|f - g| against window radius and gate the slope.

    ``fs`` and ``gs`` are aligned stacks over at least three windows of
    strictly increasing radii.
    """
    if len(fs) != len(gs) or len(fs) < 3:
        raise ValueError("need aligned stacks over at least 3 windows")
    radii = []
    sups = []
    for f, g in zip(fs, gs):
        _shared_window((f, g))
        radii.append(f.window.radius)
        sups.append(sup_distance_on_window(f, g))
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("window radii must be strictly increasing")
    n = len(radii)
    mean_r = sum(radii) / n
    mean_s = sum(sups) / n
    denom = sum((r - mean_r) ** 2 for r in radii)
    slope = sum((r - mean_r) * (s - mean_s) for r, s in zip(radii, sups)) / denom
    if slope < slope_gate:
        verdict = "bounded"
    elif slope > slope_gate:
        verdict = "growing"
    else:
        verdict = "inconclusive"
    return ReducedClassVerdict(verdict, max(sups), slope, tuple(radii), tuple(sups), slope_gate)


def busemann_cone(space, gamma: Bicombing, direction: DirectionWitness, u) -> float:
    """-d(o,u) + d(rp(o,u,floor d(o,u)), ray(floor d(o,u))) with the witness ray."""
    ru = space.distance(space.o, u)
    m = floor_radius(ru)
    if m > direction.cap + _EPS:
        raise ValueError(f"evaluation radius {m} exceeds witness cap {direction.cap}")
    far = direction.sequence.points[direction.index]
    pu = reparametrize(space, gamma, space.o, u, m)
    pray = reparametrize(space, gamma, space.o, far, m)
    return -ru + space.distance(pu, pray)


def open_cone_limit_function(Y: FiniteMetricSpace, y: str, w: SampleWindow) -> WindowFunction:
    """The boundary function of direction y: s*x maps to -s + s d_Y(x, y)."""
    if y not in Y.labels:
        raise ValueError(f"unknown direction label {y!r}")
    vals = []
    for p in w.points:
        if p.label is None:
            vals.append(0.0)
        else:
            vals.append(-p.r + p.r * Y.d(p.label, y))
    return WindowFunction(w, tuple(vals), "opencone")


@dataclass(frozen=True)
class ExclusionCertificate:
    """Linear growth of sup(psi_y/(lam E) - xi) rules the sandwich class out."""

    certified: bool
    rows: tuple  # (R, sup, bound) per window
    caveat: str = EXCLUSION_CAVEAT


def exclusion_certificate(
    space,
    gamma: Bicombing,
    xi_stack: Sequence[WindowFunction],
    y,
    p: CoarseParams,
    tol: float = 1e-9,
) -> ExclusionCertificate:
    """Compare sup over nested windows of psi_y/(lam E) - xi with the proof's lower bound.

    Windows carry radii lam*R + k for increasing R; certification requires the
    sup to clear the bound at every sampled R.
    """
    if len(xi_stack) < 2:
        raise ValueError("need at least 2 nested windows for a growth certificate")
    lamE = p.lam * p.E
    doy = space.distance(space.o, y)
    theta0 = p.theta(0.0)
    rows = []
    certified = True
    prev_r = -math.inf
    for xi in xi_stack:
        w = xi.window
        R = (w.radius - p.k) / p.lam
        if R <= prev_r:
            raise ValueError("window radii must increase")
        prev_r = R
        psi = psi_window(space, gamma, y, w)
        sup = max(pv / lamE - xv for pv, xv in zip(psi.values, xi.values))
        bound = (
            (1.0 / lamE + 1.0) * (R / p.lam - p.k)
            - (2.0 / lamE) * doy
            - p.lam * (theta0 + 2.0)
            - 3.0 * p.k
        )
        rows.append((R, sup, bound))
        if sup < bound - tol:
            certified = False
    return ExclusionCertificate(certified, tuple(rows))


def window_function_jsonable(f: WindowFunction) -> dict:
    return {
        "radius": f.window.radius,
        "rule": f.window.rule,
        "provenance": f.provenance,
        "points": [point_jsonable(p) for p in f.window.points],
        "values": list(f.values),
    }


def write_window_csv(f: WindowFunction, path) -> None:
    rows = [[point_label(p), v] for p, v in zip(f.window.points, f.values)]
    write_csv(path, ["point", "value"], rows)
