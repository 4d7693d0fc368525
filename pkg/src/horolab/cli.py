"""Config-driven experiment runner emitting deterministic JSON/CSV reports.

Exit codes: 0 all checks passed, 1 at least one violation (witness stored in
the report), 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import horo
from .bicombing import ParamGrid, check_convexity_i, check_quasi_geodesic, check_theta_ii, scan_grid
from .cone import ConeMetricContext, check_lipschitz_bound, check_quasi_triangle
from .core import (
    CoarseParams,
    VerificationReport,
    Violation,
    check_metric_axioms,
    derive_constants,
    merge_reports,
)
from .gromov import (
    check_d2_inequality,
    direction_witness,
    escaping_sequence,
    gromov_product,
    same_ideal_point,
    visual_quasimetric,
)
from .serialize import canonical_dumps, point_jsonable, point_label, write_csv
from .spaces import FiniteMetricSpace, FiniteMetricTree, HyperbolicHalfPlane, LpSpace, OpenConeSpace, snap_bicombing

SHARDS = 16

EXPERIMENTS = (
    "axioms",
    "gromov",
    "cone_table",
    "horoboundary",
    "open_cone_boundary",
    "reduced_vs_ideal",
)


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    raw: dict
    experiment: str
    space_spec: dict
    seed: int
    samples: int
    sample_radius: float | None
    grid_step: float
    scan_step: float
    tol: float
    claim: dict | None
    windows: list
    window_steps: list
    directions: list
    radii_schedule: list
    thresholds: list
    epsilon: float
    slope_gate: float | None
    ray_radius: float
    midpoint_check: dict | None
    workers: int = 1


@dataclass
class RunReport:
    config: dict
    constants: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    exit_status: int = 0
    wall_clock: float = 0.0  # informational; never serialised, so reruns stay byte-identical


def load_config(path, seed_override=None, workers=1) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(raw, seed_override=seed_override, workers=workers)


def parse_config(raw: dict, seed_override=None, workers=1) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment kind {exp!r}; expected one of {EXPERIMENTS}")
    space_spec = raw.get("space")
    if not isinstance(space_spec, dict) or "kind" not in space_spec:
        raise ConfigError("config needs a space object with a kind")
    windows = list(raw.get("windows", []))
    if any(b <= a for a, b in zip(windows, windows[1:])):
        raise ConfigError("window radii must be strictly increasing")
    steps = raw.get("window_steps")
    if steps is None:
        steps = [None] * len(windows)
    if len(steps) != len(windows):
        raise ConfigError("window_steps must align with windows")
    grid_step = float(raw.get("grid_step", 1.0 / 64.0))
    scan_step = float(raw.get("scan_step", 0.01))
    if grid_step <= 0 or scan_step <= 0:
        raise ConfigError("grid steps must be positive")
    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
    cfg = ExperimentConfig(
        raw=raw,
        experiment=exp,
        space_spec=space_spec,
        seed=seed,
        samples=int(raw.get("samples", 1000)),
        sample_radius=raw.get("sample_radius"),
        grid_step=grid_step,
        scan_step=scan_step,
        tol=float(raw.get("tol", 1e-9)),
        claim=raw.get("claim"),
        windows=windows,
        window_steps=steps,
        directions=list(raw.get("directions", [])),
        radii_schedule=list(raw.get("radii_schedule", [])),
        thresholds=list(raw.get("thresholds", [5.0, 10.0, 20.0])),
        epsilon=float(raw.get("epsilon", 0.1)),
        slope_gate=raw.get("slope_gate"),
        ray_radius=float(raw.get("ray_radius", 10.0)),
        midpoint_check=raw.get("midpoint_check"),
        workers=max(1, int(workers)),
    )
    return cfg


def build_space(spec: dict):
    """Return (space, bicombing-or-None) for a config space spec."""
    kind = spec.get("kind")
    if kind == "lp":
        try:
            space = LpSpace(
                dim=int(spec.get("dim", 2)),
                p=float(spec.get("p", 2.0)) if spec.get("p") != "inf" else math.inf,
                o=spec.get("base"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return space, space.bicombing()
    if kind == "halfplane":
        space = HyperbolicHalfPlane(o=tuple(spec.get("base", (0.0, 1.0))))
        return space, space.bicombing()
    if kind == "tree":
        try:
            if "spider" in spec:
                sp = spec["spider"]
                space = FiniteMetricTree.spider(
                    legs=int(sp.get("legs", 3)),
                    length=int(sp.get("length", 100)),
                    weight=float(sp.get("weight", 1.0)),
                )
            else:
                space = FiniteMetricTree(
                    [(u, v, float(w)) for u, v, w in spec["edges"]], spec["root"]
                )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad tree spec: {exc}") from exc
        return space, space.bicombing()
    if kind == "open_cone":
        try:
            if "path" in spec:
                directions = FiniteMetricSpace.path(
                    int(spec["path"]["count"]), float(spec["path"]["step"])
                )
            else:
                directions = FiniteMetricSpace(spec["labels"], spec["matrix"])
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad open cone spec: {exc}") from exc
        return OpenConeSpace(directions), None
    if kind == "snapped":
        inner_spec = spec.get("inner")
        if not isinstance(inner_spec, dict):
            raise ConfigError("snapped space needs an inner space spec")
        inner, gamma = build_space(inner_spec)
        if gamma is None:
            raise ConfigError("snapped wrapper needs an inner bicombing")
        try:
            delta = float(spec["delta"])
            return inner, snap_bicombing(inner, gamma, delta)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad snapped spec: {exc}") from exc
    raise ConfigError(f"unknown space kind {kind!r}")


def claimed_params(cfg: ExperimentConfig, gamma) -> CoarseParams:
    if cfg.claim is None:
        return gamma.params if gamma is not None else CoarseParams()
    c = cfg.claim
    offset = float(c.get("theta_offset", 0.0))
    try:
        return CoarseParams(
            lam=float(c.get("lam", 1.0)),
            k=float(c.get("k", 0.0)),
            E=float(c.get("E", 1.0)),
            C=float(c.get("C", 0.0)),
            theta=(lambda t: t + offset),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# --- deterministic sharded sampling ------------------------------------------

def _substream(seed: int, tag: str, shard: int) -> int:
    digest = hashlib.sha256(f"{seed}:{tag}:{shard}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_tuples(space, seed: int, tag: str, count: int, arity: int, radius=None):
    """count tuples drawn from SHARDS fixed substreams; worker count never changes them."""
    per = [count // SHARDS] * SHARDS
    for i in range(count % SHARDS):
        per[i] += 1
    out = []
    for shard, n in enumerate(per):
        rng = random.Random(_substream(seed, tag, shard))
        for _ in range(n):
            out.append(tuple(space.sample(rng, radius) for _ in range(arity)))
    return out


def run_sharded(check_fn, items, workers: int) -> VerificationReport:
    """Split items into fixed chunks, check them (optionally on threads), merge in order."""
    chunks = [items[i::SHARDS] for i in range(SHARDS)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(check_fn, chunks))
    else:
        reports = [check_fn(chunk) for chunk in chunks]
    return merge_reports(reports)


# --- direction families -------------------------------------------------------

def direction_points(space, spec: dict, radii):
    if "toward" in spec:
        return [space.point_toward(spec["toward"], r) for r in radii]
    if "unit" in spec:
        unit = tuple(float(c) for c in spec["unit"])
        norm = space.distance(unit, tuple(0.0 for _ in unit))
        offset = tuple(float(c) for c in spec.get("offset", (0.0,) * len(unit)))
        pts = []
        for r in radii:
            pts.append(tuple(o + oc + r * uc / norm for o, oc, uc in zip(space.o, offset, unit)))
        return pts
    raise ConfigError(f"direction spec needs 'unit' or 'toward': {spec}")


def direction_name(spec: dict, idx: int) -> str:
    # names land in CSV cells and file names, so keep them comma-free
    if "name" in spec:
        return str(spec["name"]).replace(",", ";")
    if "toward" in spec:
        return f"toward:{spec['toward']}"
    if "unit" in spec:
        unit = ";".join(f"{float(c):g}" for c in spec["unit"])
        off = spec.get("offset")
        tag = f"unit:{unit}"
        if off is not None:
            tag += "+off:" + ";".join(f"{float(c):g}" for c in off)
        return tag
    return f"dir{idx}"


def _file_tag(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "+-" else "_" for ch in name)


# --- experiment bodies ---------------------------------------------------------

def _bool_report(ok: bool, inputs: tuple, lhs: float, rhs: float) -> VerificationReport:
    rep = VerificationReport(checked=1)
    if not ok:
        rep.violations.append(Violation(inputs, lhs, rhs, rhs - lhs))
    return rep


def _run_axioms(cfg, space, gamma):
    checks = []
    checks.append(
        ("metric_axioms", check_metric_axioms(space, cfg.samples, cfg.seed, cfg.tol))
    )
    if gamma is not None:
        p = claimed_params(cfg, gamma)
        grid = ParamGrid(step=cfg.grid_step)
        pairs = sample_tuples(space, cfg.seed, "qg", cfg.samples, 2, cfg.sample_radius)
        checks.append(
            (
                "quasi_geodesic",
                run_sharded(
                    lambda chunk: check_quasi_geodesic(space, gamma, chunk, grid, p, cfg.tol),
                    pairs,
                    cfg.workers,
                ),
            )
        )
        rng = random.Random(_substream(cfg.seed, "conv-ab", 0))
        quads = [
            (x1, x2, y1, y2, rng.random(), rng.random())
            for (x1, x2, y1, y2) in sample_tuples(space, cfg.seed, "conv", cfg.samples, 4, cfg.sample_radius)
        ]
        checks.append(
            (
                "convexity_i",
                run_sharded(
                    lambda chunk: check_convexity_i(space, gamma, chunk, grid, p.E, p.C, cfg.tol),
                    quads,
                    cfg.workers,
                ),
            )
        )
        tquads = sample_tuples(space, cfg.seed, "theta", cfg.samples, 4, cfg.sample_radius)
        checks.append(
            (
                "theta_ii",
                run_sharded(
                    lambda chunk: check_theta_ii(space, gamma, chunk, grid, p.theta, cfg.tol),
                    tquads,
                    cfg.workers,
                ),
            )
        )
    return checks, {}


def _run_gromov(cfg, space, gamma):
    if gamma is None:
        raise ConfigError("gromov experiment needs a space with a bicombing")
    p = claimed_params(cfg, gamma)
    dc = derive_constants(p)
    grid = scan_grid(cfg.scan_step)
    checks = []
    rows = []
    if cfg.directions:
        pts = [direction_points(space, d, [cfg.ray_radius])[0] for d in cfg.directions]
        names = [direction_name(d, i) for i, d in enumerate(cfg.directions)]
        for i in range(len(pts)):
            for j in range(i, len(pts)):
                prod = gromov_product(space, gamma, pts[i], pts[j], dc.D1, grid)
                vis = visual_quasimetric(space, gamma, pts[i], pts[j], cfg.epsilon, dc.D1, grid)
                rows.append([names[i], names[j], prod, vis])
    triples = sample_tuples(space, cfg.seed, "d2", cfg.samples, 3, cfg.sample_radius)
    checks.append(
        (
            "d2_inequality",
            run_sharded(
                lambda chunk: check_d2_inequality(space, gamma, chunk, dc.D1, dc.D2, grid, cfg.tol),
                triples,
                cfg.workers,
            ),
        )
    )
    tables = {"product_table": (["x", "y", "product", "visual"], rows)}
    return checks, tables


def _run_cone_table(cfg, space, gamma):
    if gamma is None:
        raise ConfigError("cone_table experiment needs a space with a bicombing")
    p = claimed_params(cfg, gamma)
    variants = ["floor"]
    if gamma.params.is_geodesic():
        variants.append("geodesic")
    triples = sample_tuples(space, cfg.seed, "tri", cfg.samples, 3, cfg.sample_radius)
    pairs = sample_tuples(space, cfg.seed, "lip", cfg.samples, 2, cfg.sample_radius)
    extra = [tuple(tuple(pt) for pt in row) for row in cfg.raw.get("triples", [])]
    triples = triples + extra
    checks = []
    for variant in variants:
        ctx = ConeMetricContext(space, gamma, variant)
        checks.append(
            (
                f"quasi_triangle[{variant}]",
                run_sharded(
                    lambda chunk, c=ctx: check_quasi_triangle(c, chunk, p, cfg.tol),
                    triples,
                    cfg.workers,
                ),
            )
        )
        checks.append(
            (
                f"lipschitz[{variant}]",
                run_sharded(
                    lambda chunk, c=ctx: check_lipschitz_bound(c, chunk, p, cfg.tol),
                    pairs,
                    cfg.workers,
                ),
            )
        )
    return checks, {}


def _window_stacks(cfg, space, gamma, kind: str):
    """Per direction, per window: stacks of phi or psi functions and their limits."""
    sequences = {}
    for i, spec in enumerate(cfg.directions):
        name = direction_name(spec, i)
        pts = direction_points(space, spec, cfg.radii_schedule)
        sequences[name] = escaping_sequence(space, pts)
    windows = [
        horo.make_window(space, r, step)
        for r, step in zip(cfg.windows, cfg.window_steps)
    ]
    limits = {name: [] for name in sequences}
    for w in windows:
        for name, seq in sequences.items():
            if kind == "phi":
                stack = [horo.phi_window(space, x, w) for x in seq.points]
            else:
                stack = [horo.psi_window(space, gamma, x, w) for x in seq.points]
            lim, _ = horo.limit_on_window(stack)
            limits[name].append(lim)
    return sequences, windows, limits


def _run_horoboundary(cfg, space, gamma):
    if gamma is None:
        raise ConfigError("horoboundary experiment needs a bicombing")
    if not cfg.directions or not cfg.windows or not cfg.radii_schedule:
        raise ConfigError("horoboundary needs directions, windows, and radii_schedule")
    p = claimed_params(cfg, gamma)
    dc = derive_constants(p)
    bound = p.E * dc.D1 + p.C
    sequences, windows, psi_limits = _window_stacks(cfg, space, gamma, "psi")
    checks = []
    tables = {}
    close = VerificationReport()
    for name, seq in sequences.items():
        witness = direction_witness(seq)
        lim = psi_limits[name][-1]
        w = lim.window
        sup = max(
            abs(v - horo.busemann_cone(space, gamma, witness, u))
            for u, v in zip(w.points, lim.values)
        )
        close.record((name,), sup, bound, cfg.tol)
        rows = [[point_label(pt), val] for pt, val in zip(w.points, lim.values)]
        tables[f"limit_{_file_tag(name)}"] = (["point", "value"], rows)
    checks.append(("busemann_closeness", close))

    rebase_pt = cfg.raw.get("rebase_point")
    if rebase_pt is not None:
        if not isinstance(space, LpSpace):
            raise ConfigError("rebase_point is only supported on lp spaces")
        o_prime = tuple(float(c) for c in rebase_pt)
        shifted = LpSpace(dim=space.dim, p=space.p, o=o_prime)
        w = windows[0]
        if o_prime not in w.points:
            raise ConfigError(f"rebase_point {o_prime} is not sampled in the first window")
        rep = VerificationReport()
        for name, seq in sequences.items():
            stack = [horo.phi_window(space, x, w) for x in seq.points]
            lim, _ = horo.limit_on_window(stack)
            stack2 = [horo.phi_window(shifted, x, w) for x in seq.points]
            lim2, _ = horo.limit_on_window(stack2)
            re = horo.rebase(lim, o_prime)
            gap = max(abs(a - b) for a, b in zip(re.values, lim2.values))
            rep.record((name, "rebase"), gap, 0.0, cfg.tol)
        checks.append(("rebase_consistency", rep))
    return checks, tables


def _run_open_cone_boundary(cfg, space, gamma):
    if not isinstance(space, OpenConeSpace):
        raise ConfigError("open_cone_boundary needs an open_cone space")
    directions = space.directions
    step = cfg.raw.get("window_step", 0.25)
    checks = []
    grid_pts = space.grid_points(
        float(cfg.raw.get("axiom_radius", 2.0)), float(cfg.raw.get("axiom_step", 0.25))
    )
    checks.append(("metric_axioms", check_metric_axioms(space, 0, cfg.seed, cfg.tol, points=grid_pts)))

    exact = VerificationReport()
    recover = VerificationReport()
    for radius in cfg.windows or [5.0, 10.0]:
        w = horo.make_window(space, radius, step)
        n = int(math.floor(radius)) + 1
        for lab in directions.labels:
            f = horo.phi_window(space, space.point(float(n), lab), w)
            g = horo.open_cone_limit_function(directions, lab, w)
            exact.record((lab, radius, n), horo.sup_distance_on_window(f, g), 0.0, 0.0)
        for i, l1 in enumerate(directions.labels):
            for l2 in directions.labels[i + 1 :]:
                f1 = horo.open_cone_limit_function(directions, l1, w)
                f2 = horo.open_cone_limit_function(directions, l2, w)
                sup = horo.sup_distance_on_window(f1, f2)
                want = radius * directions.d(l1, l2)
                recover.record((l1, l2, radius), abs(sup - want), 0.0, 1e-12)
    checks.append(("limit_exactness", exact))
    checks.append(("recovery_sup", recover))

    if cfg.midpoint_check:
        mc = cfg.midpoint_check
        a, b = mc["pair"]
        ratio = float(mc.get("min_ratio", 0.99))
        zs = space.grid_points(float(mc.get("z_max", 2.0)), float(mc.get("z_step", 0.01)))
        pa = space.point(1.0, a)
        pb = space.point(1.0, b)
        best = min(max(space.distance(pa, z), space.distance(pb, z)) for z in zs)
        rep = _bool_report(
            best >= ratio * space.distance(pa, pb), (a, b), ratio * space.distance(pa, pb), best
        )
        checks.append(("no_approximate_midpoint", rep))
    return checks, {}


def _run_reduced_vs_ideal(cfg, space, gamma):
    if gamma is None:
        raise ConfigError("reduced_vs_ideal needs a bicombing")
    if not cfg.directions or len(cfg.windows) < 3 or not cfg.radii_schedule:
        raise ConfigError("reduced_vs_ideal needs directions, >=3 windows, and radii_schedule")
    p = claimed_params(cfg, gamma)
    dc = derive_constants(p)
    gate = cfg.slope_gate
    if gate is None:
        gate = horo.default_slope_gate(p, dc, max(cfg.windows))
    grid = scan_grid(cfg.scan_step)
    sequences, _, limits = _window_stacks(cfg, space, gamma, "psi")
    names = list(sequences)
    agree = VerificationReport()
    plateau = VerificationReport()
    rows = []
    bound = p.E * dc.D1 + p.C
    for i, n1 in enumerate(names):
        for n2 in names[i:]:
            verdict = horo.classify_bounded_difference(limits[n1], limits[n2], gate)
            same = same_ideal_point(
                space, gamma, sequences[n1], sequences[n2], cfg.thresholds, dc.D1, grid
            )
            ok = (verdict.verdict == "bounded") == same and verdict.verdict != "inconclusive"
            agree.checked += 1
            if not ok:
                agree.violations.append(
                    Violation((n1, n2, verdict.verdict, same), 0.0, 1.0, -1.0)
                )
            if same:
                plateau.record((n1, n2), verdict.plateau, bound, cfg.tol)
            rows.append([n1, n2, verdict.verdict, str(same), verdict.plateau, verdict.slope])
    checks = [("classifier_vs_ideal", agree), ("within_class_plateau", plateau)]
    tables = {"classification_matrix": (["dir1", "dir2", "verdict", "same_ideal", "plateau", "slope"], rows)}
    return checks, tables


_RUNNERS = {
    "axioms": _run_axioms,
    "gromov": _run_gromov,
    "cone_table": _run_cone_table,
    "horoboundary": _run_horoboundary,
    "open_cone_boundary": _run_open_cone_boundary,
    "reduced_vs_ideal": _run_reduced_vs_ideal,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    start = time.perf_counter()
    space, gamma = build_space(cfg.space_spec)
    params = claimed_params(cfg, gamma)
    dc = derive_constants(params)
    checks, tables = _RUNNERS[cfg.experiment](cfg, space, gamma)
    report = RunReport(
        config=cfg.raw,
        constants={"k1": dc.k1, "D": dc.D, "D1": dc.D1, "D2": dc.D2},
    )
    for name, rep in checks:
        report.checks.append(
            {
                "name": name,
                "checked": rep.checked,
                "passed": rep.passed,
                "violations": [
                    {
                        "inputs": [point_jsonable(x) for x in v.inputs],
                        "lhs": v.lhs,
                        "rhs": v.rhs,
                        "slack": v.slack,
                    }
                    for v in rep.violations[:10]
                ],
                "violation_count": len(rep.violations),
            }
        )
    report.tables = tables
    report.exit_status = 0 if all(c["passed"] for c in report.checks) else 1
    report.wall_clock = time.perf_counter() - start
    return report


def emit_report(report: RunReport, out_dir) -> list[str]:
    """Write report.json plus one CSV per table; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "config": report.config,
        "constants": report.constants,
        "checks": report.checks,
        "exit_status": report.exit_status,
    }
    paths = []
    report_path = out / "report.json"
    report_path.write_text(canonical_dumps(payload))
    paths.append(str(report_path))
    for name, (header, rows) in sorted(report.tables.items()):
        csv_path = out / f"{name}.csv"
        write_csv(csv_path, header, rows)
        paths.append(str(csv_path))
    return paths


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="horolab", description=__doc__)
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=1, help="worker threads for sharded checks")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed, workers=args.workers)
        report = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    paths = emit_report(report, args.out)
    if args.verbose:
        print(f"wall clock: {report.wall_clock:.3f}s", file=sys.stderr)
        for c in report.checks:
            status = "pass" if c["passed"] else "FAIL"
            print(f"{status} {c['name']} ({c['checked']} checks)", file=sys.stderr)
        for p in paths:
            print(f"wrote {p}", file=sys.stderr)
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())
