"""Cone metrics built from a bicombing and a base point, with the two lemma checkers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .bicombing import Bicombing, reparametrize
from .core import DEFAULT_TOL, CoarseParams, VerificationReport

_INT_EPS = 1e-12


def floor_radius(r: float) -> float:
    """Mathematical floor, with radii within 1e-12 of an integer snapped first."""
    nearest = round(r)
    if abs(r - nearest) <= _INT_EPS:
        return float(nearest)
    return float(math.floor(r))


@dataclass(frozen=True)
class ConeMetricContext:
    """Space, bicombing, and the radius transform variant shared by all cone checks.

    The floor variant truncates the common radius to an integer; the geodesic
    variant keeps it exact and is only admissible when the bicombing claims
    lam = 1, k = 0.
    """

    space: object
    gamma: Bicombing
    variant: str = "floor"

    def __post_init__(self) -> None:
        if self.variant not in ("floor", "geodesic"):
            raise ValueError(f"unknown cone metric variant {self.variant!r}")
        if self.variant == "geodesic" and not self.gamma.params.is_geodesic():
            raise ValueError("geodesic variant requires a bicombing claiming lam=1, k=0")

    def _transform(self, r: float) -> float:
        if self.variant == "floor":
            return floor_radius(r)
        return r


def cone_metric(ctx: ConeMetricContext, x, y) -> float:
    """Radial difference plus the gap between the two rays at the common (transformed) radius."""
    space = ctx.space
    o = space.o
    rx = space.distance(o, x)
    ry = space.distance(o, y)
    m = ctx._transform(min(rx, ry))
    px = reparametrize(space, ctx.gamma, o, x, m)
    py = reparametrize(space, ctx.gamma, o, y, m)
    return abs(rx - ry) + space.distance(px, py)


def check_quasi_triangle(
    ctx: ConeMetricContext,
    triples: Sequence,
    p: CoarseParams,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """d_c(x, z) <= lam E d_c(x, y) + lam E d_c(y, z) + 4 lam + 2k + C on each triple."""
    report = VerificationReport()
    add = 4.0 * p.lam + 2.0 * p.k + p.C
    for x, y, z in triples:
        lhs = cone_metric(ctx, x, z)
        rhs = p.lam * p.E * (cone_metric(ctx, x, y) + cone_metric(ctx, y, z)) + add
        report.record((x, y, z), lhs, rhs, tol)
    return report


def check_lipschitz_bound(
    ctx: ConeMetricContext,
    pairs: Sequence,
    p: CoarseParams,
    tol: float = DEFAULT_TOL,
) -> VerificationReport:
    """d_c(x, y) <= (lam + 2) d(x, y) + 2 lam + 2k on each pair."""
    report = VerificationReport()
    add = 2.0 * p.lam + 2.0 * p.k
    for x, y in pairs:
        lhs = cone_metric(ctx, x, y)
        rhs = (p.lam + 2.0) * ctx.space.distance(x, y) + add
        report.record((x, y), lhs, rhs, tol)
    return report
