"""Ray products, the D2 inequality, escape tests, witnesses, and the visual quasi-metric."""

import itertools
import math
import random

import pytest

from horolab import (
    Bicombing,
    CoarseParams,
    check_d2_inequality,
    derive_constants,
    escaping_sequence,
    gromov_product,
    is_escaping,
    ray_witness,
    same_ideal_point,
    scan_grid,
    visual_quasimetric,
)

D1 = 10.0  # from the default parameter tuple
GRID = scan_grid(0.01)


def _no_profile(gamma):
    return Bicombing(gamma.map, gamma.params, ray_profile=None)


def test_product_l1_perpendicular(l1):
    # oracle: along the two axis rays the gap is exactly 2t, so the last radius
    # with 2t <= 10 is t = 5
    gamma = l1.bicombing()
    got = gromov_product(l1, gamma, (10.0, 0.0), (0.0, 10.0), D1, GRID)
    assert got == pytest.approx(5.0, abs=0.011)


def test_product_l2_perpendicular(l2):
    # oracle: gap t*sqrt(2) <= 10 up to t = 7.0710678...
    gamma = l2.bicombing()
    got = gromov_product(l2, gamma, (10.0, 0.0), (0.0, 10.0), D1, GRID)
    assert got == pytest.approx(10.0 / math.sqrt(2.0), abs=0.011)


def test_product_with_self_is_radius(l1, l2, small_tree):
    for space in (l1, l2, small_tree):
        gamma = space.bicombing()
        rng = random.Random(3)
        for _ in range(20):
            x = space.sample(rng)
            r = space.distance(space.o, x)
            assert gromov_product(space, gamma, x, x, D1, GRID) == r


def test_product_symmetry_and_range(l2):
    gamma = l2.bicombing()
    rng = random.Random(5)
    for _ in range(100):
        x, y = l2.sample(rng), l2.sample(rng)
        p1 = gromov_product(l2, gamma, x, y, D1, GRID)
        p2 = gromov_product(l2, gamma, y, x, D1, GRID)
        assert p1 == p2
        assert 0.0 <= p1 <= min(l2.distance(l2.o, x), l2.distance(l2.o, y)) + 1e-12


def test_product_fast_profile_matches_generic_loop(l1, l2, small_tree, halfplane):
    # dual route: the vectorised profile must agree with plain per-point evaluation
    grid = scan_grid(0.05)
    rng = random.Random(7)
    for space in (l1, l2, small_tree, halfplane):
        gamma = space.bicombing()
        plain = _no_profile(gamma)
        for _ in range(25):
            x, y = space.sample(rng, 6.0), space.sample(rng, 6.0)
            fast = gromov_product(space, gamma, x, y, D1, grid)
            slow = gromov_product(space, plain, x, y, D1, grid)
            assert fast == pytest.approx(slow, abs=grid.step + 1e-12)


def test_product_grid_range_must_cover(l2):
    from horolab import ParamGrid

    with pytest.raises(ValueError):
        gromov_product(l2, l2.bicombing(), (10.0, 0.0), (0.0, 10.0), D1, ParamGrid(0.01, 0.0, 1.0))


def test_d2_inequality_random_and_degenerate(l2):
    gamma = l2.bicombing()
    dc = derive_constants(CoarseParams())
    rng = random.Random(11)
    triples = [tuple(l2.sample(rng) for _ in range(3)) for _ in range(1000)]
    rep = check_d2_inequality(l2, gamma, triples, dc.D1, dc.D2, GRID)
    assert rep.passed
    x = (3.0, 4.0)
    rep = check_d2_inequality(l2, gamma, [(x, x, x)], dc.D1, dc.D2, GRID)
    assert rep.passed


def test_d2_inequality_exhaustive_small_tree(small_tree):
    gamma = small_tree.bicombing()
    dc = derive_constants(CoarseParams())
    pts = small_tree.window_points(10.0)[:8]
    triples = list(itertools.permutations(pts, 3))
    rep = check_d2_inequality(small_tree, gamma, triples, dc.D1, dc.D2, GRID)
    assert rep.passed


def test_is_escaping_axis(l1):
    gamma = l1.bicombing()
    seq = escaping_sequence(l1, [(float(n), 0.0) for n in (4, 8, 16, 32, 64)])
    assert is_escaping(l1, gamma, seq, [5.0, 10.0, 20.0], D1, GRID)


def test_is_escaping_rejects_constant_and_short(l1):
    gamma = l1.bicombing()
    assert not is_escaping(l1, gamma, [(3.0, 0.0)] * 5, [5.0], D1, GRID)
    with pytest.raises(ValueError):
        is_escaping(l1, gamma, [(1.0, 0.0), (2.0, 0.0)], [5.0], D1, GRID)
    with pytest.raises(ValueError):
        escaping_sequence(l1, [(3.0, 0.0)] * 5)


def test_is_escaping_alternating_axes(l1):
    gamma = l1.bicombing()
    pts = []
    for n in range(1, 12):
        pts.append((float(n), 0.0) if n % 2 else (0.0, float(n)))
    # cross products plateau near 5, so escape fails past that scale
    assert not is_escaping(l1, gamma, pts, [5.0, 10.0, 20.0], D1, GRID)


def test_same_ideal_point_shared_direction(l1):
    gamma = l1.bicombing()
    radii = [8.0, 16.0, 32.0, 64.0, 128.0]
    s1 = escaping_sequence(l1, [(r, 0.0) for r in radii])
    s2 = escaping_sequence(l1, [(r, 5.0) for r in radii])
    s3 = escaping_sequence(l1, [(0.0, r) for r in radii])
    thr = [5.0, 10.0, 20.0]
    assert same_ideal_point(l1, gamma, s1, s2, thr, D1, GRID)
    assert not same_ideal_point(l1, gamma, s1, s3, thr, D1, GRID)
    # reflexive and symmetric on the corpus
    assert same_ideal_point(l1, gamma, s1, s1, thr, D1, GRID)
    assert same_ideal_point(l1, gamma, s2, s1, thr, D1, GRID)
    assert not same_ideal_point(l1, gamma, s3, s1, thr, D1, GRID)


def test_same_ideal_point_rejects_non_escaping(l1):
    gamma = l1.bicombing()
    s1 = escaping_sequence(l1, [(float(n), 0.0) for n in (8, 16, 32)])
    bad = [(1.0, 0.0), (1.5, 0.0), (1.4, 0.0)]
    with pytest.raises(ValueError):
        same_ideal_point(l1, gamma, s1, bad, [5.0], D1, GRID)


def test_ray_witness_examples(l1):
    gamma = l1.bicombing()
    seq = escaping_sequence(l1, [(float(n), 0.0) for n in (8, 16, 32, 64)])
    assert ray_witness(l1, gamma, seq, 3.0) == (3.0, 0.0)
    assert ray_witness(l1, gamma, seq, 0.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        ray_witness(l1, gamma, seq, 65.0)


def test_ray_witness_stability_within_d1(l1):
    # witnesses from deep tails agree at shared radii well within D1
    gamma = l1.bicombing()
    tail1 = escaping_sequence(l1, [(float(n), 2.0) for n in (64, 128)])
    tail2 = escaping_sequence(l1, [(float(n), 2.0) for n in (256, 512)])
    for t in (1.0, 5.0, 17.5, 60.0):
        gap = l1.distance(ray_witness(l1, gamma, tail1, t), ray_witness(l1, gamma, tail2, t))
        assert gap <= D1


def test_visual_quasimetric(l1):
    gamma = l1.bicombing()
    x, y = (10.0, 0.0), (0.0, 10.0)
    v = visual_quasimetric(l1, gamma, x, y, 0.1, D1, GRID)
    assert v == pytest.approx(math.exp(-0.5), abs=2e-3)
    assert visual_quasimetric(l1, gamma, x, y, 0.1, D1, GRID) == visual_quasimetric(
        l1, gamma, y, x, 0.1, D1, GRID
    )
    # shrinks exponentially with the self-product radius
    for r in (4.0, 8.0, 16.0):
        val = visual_quasimetric(l1, gamma, (r, 0.0), (r, 0.0), 0.1, D1, GRID)
        assert val == pytest.approx(math.exp(-0.1 * r), abs=1e-12)
    with pytest.raises(ValueError):
        visual_quasimetric(l1, gamma, x, y, 0.0, D1, GRID)


def test_equivalence_transitivity_up_to_d2(l1):
    # if A~B and B~C clear tau, A~C clears tau / D2 minus grid slack
    gamma = l1.bicombing()
    dc = derive_constants(CoarseParams())
    radii = [32.0, 64.0, 128.0, 256.0]
    fams = [
        escaping_sequence(l1, [(r, -2.0) for r in radii]),
        escaping_sequence(l1, [(r, 0.0) for r in radii]),
        escaping_sequence(l1, [(r, 2.0) for r in radii]),
    ]
    tau = 20.0
    thr = [tau]
    assert same_ideal_point(l1, gamma, fams[0], fams[1], thr, D1, GRID)
    assert same_ideal_point(l1, gamma, fams[1], fams[2], thr, D1, GRID)
    weak = [tau / dc.D2 - 2 * GRID.step]
    assert same_ideal_point(l1, gamma, fams[0], fams[2], weak, D1, GRID)
