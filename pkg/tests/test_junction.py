import numpy as np
import pytest

from triwell import (
    ConfigurationError,
    SurfaceTensions,
    build_triod,
    make_product_potential,
    sharp_map,
    solve_angles,
)
from triwell.junction import JunctionAngles, canonical_labels, random_tensions

THIRD = 2.0 * np.pi / 3.0


def test_equal_tensions_give_equal_angles():
    angles = solve_angles(SurfaceTensions(1.0, 1.0, 1.0))
    assert angles.alpha1 == pytest.approx(THIRD, abs=1e-12)
    assert angles.alpha2 == pytest.approx(THIRD, abs=1e-12)
    assert angles.alpha3 == pytest.approx(THIRD, abs=1e-12)


def test_law_of_cosines_example():
    # sides (sigma23, sigma13, sigma12) = (1.2, 1, 1)
    angles = solve_angles(SurfaceTensions(1.0, 1.0, 1.2))
    assert angles.alpha1 == pytest.approx(np.pi - np.arccos(0.28), abs=1e-12)
    assert angles.alpha2 == pytest.approx(np.pi - np.arccos(0.6), abs=1e-12)
    assert angles.alpha1 == pytest.approx(1.8546, abs=1e-4)
    assert angles.alpha2 == pytest.approx(2.2143, abs=1e-4)
    assert sum(angles.as_tuple) == pytest.approx(2.0 * np.pi, abs=1e-12)
    assert angles.sine_residual(SurfaceTensions(1.0, 1.0, 1.2)) < 1e-10


def test_degenerate_triangle_rejected():
    with pytest.raises((ConfigurationError, Exception)):
        solve_angles(SurfaceTensions(1.0, 1.0, 2.0))


def test_scale_invariance_and_residual():
    rng = np.random.default_rng(11)
    for _ in range(100):
        sig = random_tensions(rng)
        angles = solve_angles(sig)
        assert angles.sine_residual(sig if not angles.swapped_12 else sig.swapped_12()) < 1e-10
        scaled = SurfaceTensions(3.7 * sig.sigma12, 3.7 * sig.sigma13, 3.7 * sig.sigma23)
        other = solve_angles(scaled)
        assert max(abs(a - b) for a, b in zip(angles.as_tuple, other.as_tuple)) < 1e-12


def test_round_trip_through_sine_relations():
    rng = np.random.default_rng(5)
    for _ in range(50):
        sig = random_tensions(rng)
        angles = solve_angles(sig)
        back = solve_angles(angles.implied_tensions())
        assert max(abs(a - b) for a, b in zip(angles.as_tuple, back.as_tuple)) < 1e-10


def test_relabeling_convention():
    # sigma23 < sigma13 forces a 1 <-> 2 swap
    sig = SurfaceTensions(1.0, 1.2, 1.0)
    angles = solve_angles(sig)
    assert angles.swapped_12
    assert angles.alpha2 >= angles.alpha1
    sig2, minima2, angles2 = canonical_labels(sig, ((-1, 0), (1, 0), (0, 2)))
    assert sig2.sigma13 == sig.sigma23 and sig2.sigma23 == sig.sigma13
    assert minima2 == ((1, 0), (-1, 0), (0, 2))
    assert not angles2.swapped_12


def test_triod_layout_equal_angles():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    triod = build_triod(angles)
    assert triod.ray_12 == pytest.approx(np.pi / 2)
    assert triod.ray_13 == pytest.approx(7 * np.pi / 6)
    assert triod.ray_23 == pytest.approx(11 * np.pi / 6)
    # sector 3 is centered on the negative y-axis
    assert triod.classify(np.array([0.0, -0.5])) == 3
    assert triod.classify(np.array([-0.5, 0.1])) == 1
    assert triod.classify(np.array([0.5, 0.1])) == 2
    # the positive y-axis is the 1-2 ray; ties go to the lower index
    assert triod.classify(np.array([0.0, 0.5])) == 1
    assert triod.on_ray(np.array([0.0, 0.5]))


def test_sector_membership_any_angles():
    rng = np.random.default_rng(2)
    for _ in range(20):
        sig = random_tensions(rng)
        triod = build_triod(solve_angles(sig))
        assert triod.classify(np.array([0.0, -0.5])) == 3


def test_sharp_map():
    p = make_product_potential((-1, 0), (1, 0), (0, np.sqrt(3)))
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    triod = build_triod(angles)
    val, flag = sharp_map(triod, p, np.array([0.0, -0.5]))
    assert np.allclose(val, p.minima_array[2])
    assert not flag
    val, flag = sharp_map(triod, p, np.array([-0.8, 0.1]))
    assert np.allclose(val, p.minima_array[0])
    val, flag = sharp_map(triod, p, np.array([0.0, 0.0]))
    assert flag


def test_sector_arcs_match_trace_flat_arcs():
    from triwell.boundary import make_trace

    rng = np.random.default_rng(9)
    sig = random_tensions(rng)
    angles = solve_angles(sig)
    triod = build_triod(angles)
    minima = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, 1.5]])
    eps = 1e-4
    trace = make_trace(angles, minima, eps, 1.0)
    ends = trace.arc_endpoints
    # flat arcs shrink onto the sector arcs as eps -> 0
    assert ends[1] == pytest.approx(triod.ray_12, abs=2 * eps)
    assert ends[2] == pytest.approx(triod.ray_13, abs=2 * eps)
    arcs = triod.arcs
    assert arcs[1][0] == pytest.approx(triod.ray_12)
    assert arcs[2][1] - 2 * np.pi == pytest.approx(triod.ray_12)
