import numpy as np
import pytest

from triwell import ConfigurationError, make_trace, smoothstep, trace_samples
from triwell.junction import JunctionAngles

THIRD = 2.0 * np.pi / 3.0
MINIMA = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, np.sqrt(3.0)]])


@pytest.fixture
def trace():
    angles = JunctionAngles(THIRD - 0.2, THIRD + 0.1, THIRD + 0.1)
    return make_trace(angles, MINIMA, 0.05, 1.0)


def test_flat_arc_values_exact(trace):
    # theta = pi lies inside the first flat arc for any valid angles
    assert np.array_equal(trace(np.pi), MINIMA[0])
    assert np.array_equal(trace(1.5 * np.pi), MINIMA[2])
    assert np.array_equal(trace(0.0), MINIMA[1])


def test_transition_midpoint_is_average(trace):
    center = 0.5 * np.pi + trace.angles.half_diff
    assert np.allclose(trace(center), 0.5 * (MINIMA[0] + MINIMA[1]), atol=1e-14)


def test_transition_ordering(trace):
    w = trace.c0 * trace.epsilon
    t1, t2, t3 = trace.transition_centers
    # (a2 -> a1), (a1 -> a3), (a3 -> a2) going counterclockwise
    for center, lo, hi in ((t1, 1, 0), (t2, 0, 2), (t3, 2, 1)):
        before = trace(center - w - 1e-9)
        after = trace(center + w + 1e-9)
        assert np.array_equal(before, MINIMA[lo])
        assert np.array_equal(after, MINIMA[hi])


def test_periodicity(trace):
    gap = np.linalg.norm(trace(0.0) - trace(2.0 * np.pi - 1e-13))
    assert gap <= trace.lipschitz_bound * 1e-13 + 1e-14


def test_samples_include_endpoints(trace):
    thetas, values = trace_samples(trace, 6)
    assert np.allclose(thetas, trace.arc_endpoints)
    thetas, values = trace_samples(trace, 512)
    for end in trace.arc_endpoints:
        assert np.min(np.abs(thetas - end)) == 0.0


def test_sample_continuity(trace):
    thetas, values = trace_samples(trace, 4096)
    jumps = np.linalg.norm(np.diff(values, axis=0), axis=1)
    steps = np.diff(thetas)
    assert np.all(jumps <= trace.lipschitz_bound * steps + 1e-12)


def test_uniform_bound_independent_of_eps():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    bound = float(np.linalg.norm(MINIMA, axis=1).max())
    for eps in (0.2, 0.05, 0.01):
        tr = make_trace(angles, MINIMA, eps, 1.0)
        _, values = trace_samples(tr, 2048)
        assert np.linalg.norm(values, axis=1).max() <= bound + 1e-12


def test_smoothstep_slope_bound():
    t = np.linspace(0.0, 1.0, 10001)
    slope = np.gradient(smoothstep(t), t)
    assert slope.max() <= 2.0
    assert abs(slope.max() - 1.5) < 1e-3
    s = smoothstep(t)
    assert np.all(np.diff(s) >= 0.0)
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0
    assert smoothstep(0.5) == 0.5


def test_overlapping_arcs_rejected():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    with pytest.raises(ConfigurationError):
        make_trace(angles, MINIMA, 1.2, 1.0)
    with pytest.raises(ValueError):
        trace_samples(make_trace(angles, MINIMA, 0.1, 1.0), 5)
