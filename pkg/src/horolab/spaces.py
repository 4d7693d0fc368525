"""Concrete model spaces: lp planes, metric trees, the hyperbolic half-plane,
open cones over finite metric spaces, and a snapping wrapper that manufactures
genuine quasi-geodesic bicombings."""

from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bicombing import Bicombing
from .core import CoarseParams, GEODESIC_PARAMS

_EPS = 1e-12


def _round_half_away(x: float) -> float:
    return math.copysign(math.floor(abs(x) + 0.5), x)


class Space:
    """A metric space with a base point; geodesic models also ship a bicombing."""

    o = None
    name = "space"
    sample_radius = 10.0

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def sample(self, rng, radius: float | None = None):
        raise NotImplementedError

    def window_points(self, radius: float, step: float | None = None) -> list:
        raise NotImplementedError

    def bicombing(self) -> Bicombing:
        raise NotImplementedError(f"{self.name} does not ship a bicombing")


class LpSpace(Space):
    """R^dim under the lp norm with the affine bicombing."""

    def __init__(self, dim: int = 2, p: float = 2.0, o=None):
        if dim < 1:
            raise ValueError(f"dimension must be >= 1, got {dim}")
        if not p >= 1.0:
            raise ValueError(f"lp exponent must be >= 1, got {p} (not a norm below 1)")
        self.dim = dim
        self.p = p
        self.o = tuple(float(c) for c in o) if o is not None else (0.0,) * dim
        if len(self.o) != dim:
            raise ValueError("base point dimension mismatch")
        tag = "inf" if math.isinf(p) else f"{p:g}"
        self.name = f"l{tag}[dim={dim}]"

    def distance(self, a, b) -> float:
        if self.p == 2.0:
            return math.dist(a, b)
        if math.isinf(self.p):
            return max(abs(x - y) for x, y in zip(a, b))
        if self.p == 1.0:
            return sum(abs(x - y) for x, y in zip(a, b))
        return sum(abs(x - y) ** self.p for x, y in zip(a, b)) ** (1.0 / self.p)

    def interpolate(self, x, y, t: float):
        return tuple((1.0 - t) * a + t * b for a, b in zip(x, y))

    def bicombing(self) -> Bicombing:
        return Bicombing(self.interpolate, GEODESIC_PARAMS, ray_profile=self._ray_profile)

    def _ray_profile(self, x, y, ts):
        rx = self.distance(self.o, x)
        ry = self.distance(self.o, y)
        ts = np.asarray(ts, dtype=float)
        if rx <= 0.0 or ry <= 0.0:
            return np.zeros_like(ts)
        ux = [(a - b) / rx for a, b in zip(x, self.o)]
        uy = [(a - b) / ry for a, b in zip(y, self.o)]
        gap = self.distance(ux, uy)
        return ts * gap

    def snap(self, pnt, delta: float):
        return tuple(_round_half_away(c / delta) * delta for c in pnt)

    def max_snap_displacement(self, delta: float) -> float:
        if math.isinf(self.p):
            return delta / 2.0
        return (delta / 2.0) * self.dim ** (1.0 / self.p)

    def window_points(self, radius: float, step: float | None = None) -> list:
        step = 1.0 if step is None else step
        n = int(math.floor(radius / step + _EPS))
        axes = [[oc + i * step for i in range(-n, n + 1)] for oc in self.o]
        pts = [
            pt
            for pt in itertools.product(*axes)
            if self.distance(pt, self.o) <= radius + 1e-9
        ]
        pts.sort()
        return pts

    def sample(self, rng, radius: float | None = None):
        r = self.sample_radius if radius is None else radius
        return tuple(oc + rng.uniform(-r, r) for oc in self.o)


# --- hyperbolic upper half-plane -------------------------------------------

def _halfplane_check(p) -> None:
    if not p[1] > 0.0:
        raise ValueError(f"half-plane points need y > 0, got {p}")


@lru_cache(maxsize=16384)
def _halfplane_geo(p, q):
    """Geodesic data for the line through p, q: vertical ray or semicircle.

    Returns ("v", x0, u_p, u_q) or ("c", center, radius, u_p, u_q) where u is
    the arclength coordinate along the geodesic (u = ln y on verticals,
    u = ln tan(alpha/2) on semicircles), so |u_q - u_p| = d(p, q).
    """
    x1, y1 = p
    x2, y2 = q
    if abs(x1 - x2) <= _EPS * max(1.0, abs(x1), abs(x2)):
        return ("v", x1, math.log(y1), math.log(y2))
    c = (x2 * x2 + y2 * y2 - x1 * x1 - y1 * y1) / (2.0 * (x2 - x1))
    r = math.hypot(x1 - c, y1)
    u1 = math.log(math.tan(math.atan2(y1, x1 - c) / 2.0))
    u2 = math.log(math.tan(math.atan2(y2, x2 - c) / 2.0))
    return ("c", c, r, u1, u2)


class HyperbolicHalfPlane(Space):
    """Upper half-plane with the closed-form metric and semicircle geodesics."""

    def __init__(self, o=(0.0, 1.0)):
        self.o = (float(o[0]), float(o[1]))
        _halfplane_check(self.o)
        self.name = "halfplane"
        self.sample_radius = 6.0

    def distance(self, p, q) -> float:
        _halfplane_check(p)
        _halfplane_check(q)
        dx = p[0] - q[0]
        dy = p[1] - q[1]
        return math.acosh(1.0 + (dx * dx + dy * dy) / (2.0 * p[1] * q[1]))

    def geodesic(self, p, q, t: float):
        if t <= 0.0:
            return p
        if t >= 1.0:
            return q
        geo = _halfplane_geo(p, q)
        if geo[0] == "v":
            _, x0, u1, u2 = geo
            return (x0, math.exp((1.0 - t) * u1 + t * u2))
        _, c, r, u1, u2 = geo
        alpha = 2.0 * math.atan(math.exp((1.0 - t) * u1 + t * u2))
        return (c + r * math.cos(alpha), r * math.sin(alpha))

    def bicombing(self) -> Bicombing:
        return Bicombing(self.geodesic, GEODESIC_PARAMS, ray_profile=self._ray_profile)

    def _ray_points(self, x, ts):
        d = self.distance(self.o, x)
        frac = np.asarray(ts, dtype=float) / d
        geo = _halfplane_geo(self.o, x)
        if geo[0] == "v":
            _, x0, u1, u2 = geo
            u = u1 + frac * (u2 - u1)
            return np.full_like(u, x0), np.exp(u)
        _, c, r, u1, u2 = geo
        alpha = 2.0 * np.arctan(np.exp(u1 + frac * (u2 - u1)))
        return c + r * np.cos(alpha), r * np.sin(alpha)

    def _ray_profile(self, x, y, ts):
        xs1, ys1 = self._ray_points(x, ts)
        xs2, ys2 = self._ray_points(y, ts)
        sq = (xs1 - xs2) ** 2 + (ys1 - ys2) ** 2
        return np.arccosh(1.0 + sq / (2.0 * ys1 * ys2))

    def window_points(self, radius: float, step: float | None = None) -> list:
        # Grid in the local frame: x spaced by step*y so rows stay metrically even.
        step = 0.5 if step is None else step
        n = int(math.floor(radius / step + _EPS))
        pts = []
        for j in range(-n, n + 1):
            y = self.o[1] * math.exp(j * step)
            for i in range(-2 * n, 2 * n + 1):
                pt = (self.o[0] + i * step * y, y)
                if self.distance(pt, self.o) <= radius + 1e-9:
                    pts.append(pt)
        pts.sort()
        return pts

    def sample(self, rng, radius: float | None = None):
        r = self.sample_radius if radius is None else radius
        y = self.o[1] * math.exp(rng.uniform(-r / 2.0, r / 2.0))
        return (self.o[0] + rng.uniform(-r, r), y)


# --- finite metric trees ----------------------------------------------------

@dataclass(frozen=True, order=True)
class TreePoint:
    """A point on a tree edge: distance t from u along edge (u, v); u == v is the vertex."""

    u: str
    v: str
    t: float


class FiniteMetricTree(Space):
    """Weighted finite tree with the unique-arc geodesic bicombing."""

    def __init__(self, edges, root: str):
        self._adj: dict[str, dict[str, float]] = {}
        self._edges = []
        for u, v, w in edges:
            if u == v or w <= 0.0:
                raise ValueError(f"bad edge ({u}, {v}, {w})")
            if v < u:
                u, v = v, u
            if self._adj.get(u, {}).get(v) is not None:
                raise ValueError(f"duplicate edge ({u}, {v})")
            self._adj.setdefault(u, {})[v] = float(w)
            self._adj.setdefault(v, {})[u] = float(w)
            self._edges.append((u, v, float(w)))
        if root not in self._adj:
            raise ValueError(f"root {root!r} is not a vertex")
        if len(self._edges) != len(self._adj) - 1:
            raise ValueError("edge count does not match a tree")
        self._edges.sort()
        self.root = root
        self._vdist, self._parent = self._all_pairs()
        if any(math.isinf(d) for d in self._vdist[root].values()):
            raise ValueError("tree is not connected")
        self.o = self.vertex(root)
        self.name = f"tree[n={len(self._adj)}]"
        self.max_radius = max(self._vdist[root].values())
        self.sample_radius = self.max_radius

    def _all_pairs(self):
        dist: dict[str, dict[str, float]] = {}
        parent: dict[str, dict[str, str | None]] = {}
        for src in self._adj:
            d = {src: 0.0}
            par: dict[str, str | None] = {src: None}
            stack = [src]
            while stack:
                a = stack.pop()
                for b, w in self._adj[a].items():
                    if b not in d:
                        d[b] = d[a] + w
                        par[b] = a
                        stack.append(b)
            for v in self._adj:
                d.setdefault(v, math.inf)
            dist[src] = d
            parent[src] = par
        return dist, parent

    @classmethod
    def spider(cls, legs: int = 3, length: int = 100, weight: float = 1.0, root: str = "o"):
        """A star of unit-edge legs; distinct legs stand in for distinct directions."""
        if legs < 1 or legs > 26:
            raise ValueError("legs must be in 1..26")
        edges = []
        for i in range(legs):
            tag = chr(ord("A") + i)
            prev = root
            for j in range(1, length + 1):
                cur = f"{tag}{j}"
                edges.append((prev, cur, weight))
                prev = cur
        return cls(edges, root)

    def vertex(self, name: str) -> TreePoint:
        if name not in self._adj:
            raise ValueError(f"unknown vertex {name!r}")
        return TreePoint(name, name, 0.0)

    def point(self, u: str, v: str, t: float) -> TreePoint:
        """Canonical point at distance t from u along edge (u, v)."""
        if u == v:
            return self.vertex(u)
        w = self._adj.get(u, {}).get(v)
        if w is None:
            raise ValueError(f"unknown edge ({u}, {v})")
        if t < -1e-9 or t > w + 1e-9:
            raise ValueError(f"offset {t} outside edge of weight {w}")
        t = min(max(t, 0.0), w)
        if t <= _EPS:
            return TreePoint(u, u, 0.0)
        if t >= w - _EPS:
            return TreePoint(v, v, 0.0)
        if v < u:
            u, v, t = v, u, w - t
        return TreePoint(u, v, t)

    def vertex_distance(self, a: str, b: str) -> float:
        return self._vdist[a][b]

    def _exits(self, p: TreePoint):
        if p.u == p.v:
            return ((p.u, 0.0),)
        w = self._adj[p.u][p.v]
        return ((p.u, p.t), (p.v, w - p.t))

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        # unrolled exit enumeration; this is the hottest path of every checker
        vd = self._vdist
        if p.u == p.v:
            row = vd[p.u]
            if q.u == q.v:
                return row[q.u]
            return min(row[q.u] + q.t, row[q.v] + self._adj[q.u][q.v] - q.t)
        if q.u == q.v:
            row = vd[q.u]
            return min(row[p.u] + p.t, row[p.v] + self._adj[p.u][p.v] - p.t)
        if p.u == q.u and p.v == q.v:
            return abs(p.t - q.t)
        wp = self._adj[p.u][p.v]
        wq = self._adj[q.u][q.v]
        ra = vd[p.u]
        rb = vd[p.v]
        ct = wq - q.t
        return min(
            p.t + ra[q.u] + q.t,
            p.t + ra[q.v] + ct,
            wp - p.t + rb[q.u] + q.t,
            wp - p.t + rb[q.v] + ct,
        )

    def _vertex_path(self, a: str, b: str) -> list[str]:
        par = self._parent[a]
        path = [b]
        while path[-1] != a:
            path.append(par[path[-1]])
        path.reverse()
        return path

    def geodesic(self, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
        if t <= 0.0:
            return p
        if t >= 1.0:
            return q
        segs, cums, total = _tree_arc(self, p, q)
        if total <= 0.0:
            return q
        target = t * total
        idx = bisect.bisect_left(cums, target)
        idx = min(idx, len(segs) - 1)
        before = cums[idx - 1] if idx else 0.0
        a, b, oa, ob = segs[idx]
        local = target - before
        off = oa + local if ob >= oa else oa - local
        return self.point(a, b, off)

    def bicombing(self) -> Bicombing:
        return Bicombing(self.geodesic, GEODESIC_PARAMS, ray_profile=self._ray_profile)

    def _ray_profile(self, x, y, ts):
        # Arcs from the root share a prefix up to the branch point, then split
        # at speed 2; exact for tree metrics.
        rx = self.distance(self.o, x)
        ry = self.distance(self.o, y)
        split = 0.5 * (rx + ry - self.distance(x, y))
        return np.maximum(0.0, 2.0 * (np.asarray(ts, dtype=float) - split))

    def point_toward(self, vertex: str, r: float) -> TreePoint:
        """The point at distance r from the root along the arc to ``vertex``."""
        total = self._vdist[self.root][vertex]
        if r < 0.0 or r > total + 1e-9:
            raise ValueError(f"radius {r} beyond vertex {vertex!r} at {total}")
        path = self._vertex_path(self.root, vertex)
        acc = 0.0
        for a, b in zip(path, path[1:]):
            w = self._adj[a][b]
            if acc + w >= r - 1e-12:
                return self.point(a, b, r - acc)
            acc += w
        return self.vertex(vertex)

    def window_points(self, radius: float, step: float | None = None) -> list:
        pts = [
            self.vertex(v)
            for v in sorted(self._adj)
            if self._vdist[self.root][v] <= radius + 1e-9
        ]
        for u, v, w in self._edges:
            mid = self.point(u, v, w / 2.0)
            if mid.u != mid.v and self.distance(self.o, mid) <= radius + 1e-9:
                pts.append(mid)
        pts.sort()
        return pts

    def sample(self, rng, radius: float | None = None) -> TreePoint:
        r = self.sample_radius if radius is None else radius
        for _ in range(10000):
            u, v, w = self._edges[rng.randrange(len(self._edges))]
            pnt = self.point(u, v, rng.uniform(0.0, w))
            if self.distance(self.o, pnt) <= r:
                return pnt
        raise ValueError(f"no tree point found within radius {r}")

    def snap(self, pnt: TreePoint, delta: float) -> TreePoint:
        if pnt.u == pnt.v:
            return pnt
        w = self._adj[pnt.u][pnt.v]
        t = _round_half_away(pnt.t / delta) * delta
        return self.point(pnt.u, pnt.v, min(max(t, 0.0), w))

    def max_snap_displacement(self, delta: float) -> float:
        return delta / 2.0


@lru_cache(maxsize=4096)
def _tree_arc(tree: FiniteMetricTree, p: TreePoint, q: TreePoint):
    if p == q:
        return ((), (), 0.0)
    segs: list[tuple[str, str, float, float]] = []
    if p.u != p.v and (p.u, p.v) == (q.u, q.v):
        segs.append((p.u, p.v, p.t, q.t))
    else:
        best = None
        for e1, c1 in tree._exits(p):
            for e2, c2 in tree._exits(q):
                tot = c1 + tree._vdist[e1][e2] + c2
                if best is None or tot < best[0] - 1e-15:
                    best = (tot, e1, c1, e2, c2)
        _, e1, _, e2, _ = best
        if p.u != p.v:
            w = tree._adj[p.u][p.v]
            segs.append((p.u, p.v, p.t, 0.0 if e1 == p.u else w))
        path = tree._vertex_path(e1, e2)
        for a, b in zip(path, path[1:]):
            segs.append((a, b, 0.0, tree._adj[a][b]))
        if q.u != q.v:
            w = tree._adj[q.u][q.v]
            segs.append((q.u, q.v, 0.0 if e2 == q.u else w, q.t))
    segs = [s for s in segs if abs(s[3] - s[2]) > 0.0]
    cums = []
    acc = 0.0
    for _, _, oa, ob in segs:
        acc += abs(ob - oa)
        cums.append(acc)
    return tuple(segs), tuple(cums), acc


# --- finite metric spaces and open cones ------------------------------------

class FiniteMetricSpace:
    """Finitely many labelled directions with an exact metric of diameter <= 1."""

    def __init__(self, labels, matrix):
        self.labels = tuple(labels)
        n = len(self.labels)
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise ValueError("matrix shape does not match labels")
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._index) != n:
            raise ValueError("duplicate labels")
        self._m = [[float(x) for x in row] for row in matrix]
        for i in range(n):
            if self._m[i][i] != 0.0:
                raise ValueError("diagonal must be zero")
            for j in range(n):
                if self._m[i][j] != self._m[j][i]:
                    raise ValueError("matrix must be symmetric")
                if i != j and self._m[i][j] <= 0.0:
                    raise ValueError("off-diagonal entries must be positive")
                if self._m[i][j] > 1.0:
                    raise ValueError("diameter must be <= 1")
                for k in range(n):
                    if self._m[i][k] > self._m[i][j] + self._m[j][k]:
                        raise ValueError("triangle inequality fails")

    def d(self, a: str, b: str) -> float:
        try:
            return self._m[self._index[a]][self._index[b]]
        except KeyError as exc:
            raise ValueError(f"unknown direction label {exc.args[0]!r}") from exc

    @property
    def diameter(self) -> float:
        return max(max(row) for row in self._m)

    @classmethod
    def two_point(cls, gap: float = 1.0) -> "FiniteMetricSpace":
        return cls(("a", "b"), ((0.0, gap), (gap, 0.0)))

    @classmethod
    def path(cls, count: int, step: float) -> "FiniteMetricSpace":
        """Labels y0..y(count-1) on a line with consecutive gap ``step``."""
        labels = tuple(f"y{i}" for i in range(count))
        matrix = [[abs(i - j) * step for j in range(count)] for i in range(count)]
        return cls(labels, matrix)


@dataclass(frozen=True, order=True)
class ConePoint:
    """Radius-and-direction point of an open cone; radius 0 is the apex (label None)."""

    r: float
    label: str | None


class OpenConeSpace(Space):
    """The open cone over a finite metric space: d(tx, sy) = |t-s| + min(t,s) d_Y(x,y)."""

    def __init__(self, directions: FiniteMetricSpace):
        self.directions = directions
        self.o = ConePoint(0.0, None)
        self.name = f"cone[{len(directions.labels)}]"

    def point(self, r: float, label: str | None) -> ConePoint:
        if r < 0.0:
            raise ValueError(f"cone radius must be >= 0, got {r}")
        if r == 0.0:
            return ConePoint(0.0, None)
        if label not in self.directions._index:
            raise ValueError(f"unknown direction label {label!r}")
        return ConePoint(float(r), label)

    def distance(self, a: ConePoint, b: ConePoint) -> float:
        lo = min(a.r, b.r)
        base = abs(a.r - b.r)
        if lo > 0.0:
            base += lo * self.directions.d(a.label, b.label)
        return base

    def window_points(self, radius: float, step: float | None = None) -> list:
        step = 0.25 if step is None else step
        n = int(math.floor(radius / step + _EPS))
        pts = [self.o]
        for lab in self.directions.labels:
            for i in range(1, n + 1):
                pts.append(ConePoint(i * step, lab))
        return pts

    def grid_points(self, radius: float, step: float) -> list:
        return self.window_points(radius, step)

    def sample(self, rng, radius: float | None = None) -> ConePoint:
        r = self.sample_radius if radius is None else radius
        labels = self.directions.labels
        return self.point(rng.uniform(0.0, r), labels[rng.randrange(len(labels))])


# --- snapping wrapper ---------------------------------------------------------

def snap_bicombing(space: Space, gamma: Bicombing, delta: float) -> Bicombing:
    """Snap interior combing points to the delta-net of the space.

    Endpoints t in {0, 1} pass through untouched. The returned bicombing claims
    lam unchanged, k increased by twice the worst snap displacement, and C /
    theta relaxed by four displacements (two per compared point).
    """
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if delta == 0.0:
        return gamma
    dmax = space.max_snap_displacement(delta)
    base_theta = gamma.params.theta
    params = CoarseParams(
        lam=gamma.params.lam,
        k=gamma.params.k + 2.0 * dmax,
        E=gamma.params.E,
        C=gamma.params.C + 4.0 * dmax,
        theta=lambda t: base_theta(t) + 4.0 * dmax,
    )

    def snapped(x, y, t):
        if t <= 0.0 or t >= 1.0:
            return gamma(x, y, t)
        return space.snap(gamma(x, y, t), delta)

    return Bicombing(snapped, params)
