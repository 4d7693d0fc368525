"""Parameter tuples, derived constants, and shared verification-report plumbing."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

DEFAULT_TOL = 1e-9


def identity(t: float) -> float:
    return t


@dataclass(frozen=True)
class CoarseParams:
    """The control constants of a coarsely convex bicombing.

    ``lam`` and ``E`` are dimensionless multipliers (both at least 1);
    ``k`` and ``C`` are additive lengths (both non-negative). ``theta`` is a
    non-decreasing comparison function; monotonicity can only be probed on a
    sampled grid, see :meth:`theta_is_monotone`.
    """

    lam: float = 1.0
    k: float = 0.0
    E: float = 1.0
    C: float = 0.0
    theta: Callable[[float], float] = identity

    def __post_init__(self) -> None:
        if not self.lam >= 1.0:
            raise ValueError(f"lam must be >= 1, got {self.lam}")
        if not self.k >= 0.0:
            raise ValueError(f"k must be >= 0, got {self.k}")
        if not self.E >= 1.0:
            raise ValueError(f"E must be >= 1, got {self.E}")
        if not self.C >= 0.0:
            raise ValueError(f"C must be >= 0, got {self.C}")

    def theta_is_monotone(self, grid: Sequence[float]) -> bool:
        """Check theta(s) <= theta(t) for s <= t along a caller-supplied grid."""
        vals = [self.theta(t) for t in sorted(grid)]
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def is_geodesic(self) -> bool:
        return self.lam == 1.0 and self.k == 0.0


GEODESIC_PARAMS = CoarseParams()


@dataclass(frozen=True)
class DerivedConstants:
    """Lengths derived from a parameter tuple: closeness thresholds for ray products."""

    k1: float
    D: float
    D1: float
    D2: float


def derive_constants(p: CoarseParams) -> DerivedConstants:
    """Compute k1 = lam + k, D = 2(1+E)k1 + C, D1 = 2D + 2, D2 = E(D1 + 2k)."""
    k1 = p.lam + p.k
    D = 2.0 * (1.0 + p.E) * k1 + p.C
    D1 = 2.0 * D + 2.0
    D2 = p.E * (D1 + 2.0 * p.k)
    return DerivedConstants(k1=k1, D=D, D1=D1, D2=D2)


@dataclass(frozen=True)
class Violation:
    """One failed inequality: the convention is lhs <= rhs, slack = rhs - lhs."""

    inputs: tuple
    lhs: float
    rhs: float
    slack: float


@dataclass
class VerificationReport:
    """Outcome of an inequality sweep; passes exactly when no violation was stored."""

    checked: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def worst(self) -> Violation | None:
        if not self.violations:
            return None
        return min(self.violations, key=lambda v: v.slack)

    def record(self, inputs: tuple, lhs: float, rhs: float, tol: float) -> None:
        """Count one check of lhs <= rhs and store a witness when it fails by more than tol."""
        self.checked += 1
        if lhs > rhs + tol:
            self.violations.append(Violation(inputs, lhs, rhs, rhs - lhs))


def merge_reports(reports: Iterable[VerificationReport]) -> VerificationReport:
    """Associative merge; shard-local reports combine in any grouping."""
    out = VerificationReport()
    for r in reports:
        out.checked += r.checked
        out.violations.extend(r.violations)
    return out


def check_metric_axioms(
    space,
    sample_count: int,
    seed: int,
    tol: float = DEFAULT_TOL,
    points: Sequence | None = None,
) -> VerificationReport:
    """Sanity gate for a model space: symmetry, non-negativity, identity, triangle.

    With ``points`` given, the sweep is exhaustive over that set (all ordered
    pairs, all ordered triples); otherwise ``sample_count`` seeded triples are
    drawn from the space.
    """
    report = VerificationReport()
    if points is not None:
        pts = list(points)
        for x in pts:
            report.record(("identity", x), space.distance(x, x), 0.0, tol)
        for x, y in itertools.combinations(pts, 2):
            dxy = space.distance(x, y)
            dyx = space.distance(y, x)
            report.record(("symmetry", x, y), abs(dxy - dyx), 0.0, tol)
            report.record(("nonneg", x, y), -dxy, 0.0, tol)
            if dxy <= tol and x != y:
                report.checked += 1
                report.violations.append(Violation(("indiscernible", x, y), 0.0, dxy, dxy))
        for x, y, z in itertools.permutations(pts, 3):
            report.record(
                ("triangle", x, y, z),
                space.distance(x, z),
                space.distance(x, y) + space.distance(y, z),
                tol,
            )
        return report

    rng = random.Random(seed)
    for _ in range(sample_count):
        x = space.sample(rng)
        y = space.sample(rng)
        z = space.sample(rng)
        dxy = space.distance(x, y)
        report.record(("symmetry", x, y), abs(dxy - space.distance(y, x)), 0.0, tol)
        report.record(("nonneg", x, y), -dxy, 0.0, tol)
        report.record(("identity", x), space.distance(x, x), 0.0, tol)
        if dxy <= tol and x != y:
            report.checked += 1
            report.violations.append(Violation(("indiscernible", x, y), 0.0, dxy, dxy))
        report.record(
            ("triangle", x, y, z),
            space.distance(x, z),
            dxy + space.distance(y, z),
            tol,
        )
    return report
