import numpy as np
import pytest

from triwell import (
    ConfigurationError,
    SamplingSpec,
    certify_potential,
    estimate_local_constants,
    make_product_potential,
    two_well_slice,
)

EQUILATERAL = ((-1.0, 0.0), (1.0, 0.0), (0.0, np.sqrt(3.0)))


@pytest.fixture(scope="module")
def product():
    return make_product_potential(*EQUILATERAL)


def test_zero_at_minima(product):
    for a in product.minima_array:
        assert product.evaluate(a) == 0.0


def test_value_at_origin(product):
    # |(0,0)-a1|^2 |(0,0)-a2|^2 |(0,0)-a3|^2 = 1 * 1 * 3
    assert product.evaluate(np.zeros(2)) == pytest.approx(3.0, rel=1e-12)


def test_hessian_at_minimum_is_isotropic(product):
    h = product.hessian(np.array([-1.0, 0.0]))
    assert np.allclose(h, 32.0 * np.eye(2), atol=1e-10)


def test_invalid_configurations():
    with pytest.raises(ConfigurationError):
        make_product_potential((0, 0), (0, 0), (1, 1))
    with pytest.raises(ConfigurationError):
        make_product_potential((0, 0), (1, 0), (2, 0))


@pytest.mark.parametrize("potential_name", ["product", "two_well"])
def test_derivatives_match_finite_differences(potential_name, product):
    p = product if potential_name == "product" else two_well_slice()
    rng = np.random.default_rng(7)
    pts = rng.uniform(-p.outer_radius, p.outer_radius, size=(100, 2))
    pts = pts[np.linalg.norm(pts, axis=1) <= p.outer_radius]
    step = 1e-6
    for u in pts:
        grad = p.gradient(u)
        fd = np.array(
            [
                (p.evaluate(u + step * e) - p.evaluate(u - step * e)) / (2 * step)
                for e in np.eye(2)
            ]
        )
        scale = max(np.linalg.norm(grad), 1e-3)
        assert np.linalg.norm(grad - fd) / scale < 1e-6
        hess = p.hessian(u)
        fdh = np.stack(
            [
                (p.gradient(u + step * e) - p.gradient(u - step * e)) / (2 * step)
                for e in np.eye(2)
            ]
        )
        hscale = max(np.linalg.norm(hess), 1e-3)
        assert np.linalg.norm(hess - fdh) / hscale < 1e-6


def test_certification_passes_with_tight_bounds(product):
    cert = certify_potential(product)
    assert cert.passed
    assert cert.c1 == pytest.approx(32.0, rel=1e-12)
    assert cert.c2 == pytest.approx(32.0, rel=1e-12)


def test_certification_flags_merged_minima():
    p = make_product_potential((-1.0, 0.0), (-1.0 + 1e-9, 1e-9), (0.0, np.sqrt(3.0)))
    cert = certify_potential(p)
    assert not cert.passed
    assert not cert.clauses["minima_separated"].passed


def test_radial_coercivity_on_wide_ring(product):
    # direct-evaluation oracle on the ring |u| = 10
    phis = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
    ring = 10.0 * np.stack([np.cos(phis), np.sin(phis)], axis=-1)
    assert np.min(np.sum(product.gradient(ring) * ring, axis=-1)) > 0.0
    cert = certify_potential(product, ring_radius=10.0)
    assert cert.clauses["radial_coercivity"].passed


def test_certification_deterministic(product):
    spec = SamplingSpec(grid_points=101, ring_points=360)
    a = certify_potential(product, spec)
    b = certify_potential(product, spec)
    for name in a.clauses:
        assert a.clauses[name].worst_value == b.clauses[name].worst_value


def test_local_constants_bracket_taylor_limit(product):
    # ring ratios W / (delta^2/2) approach the Hessian eigenvalue 32 as
    # delta -> 0, so the fitted constants must bracket it
    lc = estimate_local_constants(product, np.geomspace(0.01, 0.2, 8))
    assert lc.delta_w == pytest.approx(0.2)
    assert lc.c_w <= 32.0 * 1.01
    assert lc.C_w >= 32.0 * 0.99
    assert 0.0 < lc.c_w <= lc.C_w


def test_local_constants_hold_on_fresh_samples(product):
    lc = estimate_local_constants(product, np.geomspace(0.02, 0.3, 6))
    rng_angles = np.linspace(0.0, 2.0 * np.pi, 1031, endpoint=False)
    dirs = np.stack([np.cos(rng_angles), np.sin(rng_angles)], axis=-1)
    for delta in np.geomspace(0.025, 0.29, 9):
        for a in product.minima_array:
            vals = product.evaluate(a + delta * dirs)
            assert vals.min() >= 0.5 * lc.c_w * delta**2 * (1 - 1e-9)
            assert vals.max() <= 0.5 * lc.C_w * delta**2 * (1 + 1e-9)
    # far-field clause on a fresh grid
    axis = np.linspace(-3.0, 3.0, 157)
    gx, gy = np.meshgrid(axis, axis)
    box = np.stack([gx, gy], axis=-1).reshape(-1, 2)
    dist = product.distance_to_minima(box)
    keep = dist >= lc.deltas[0]
    floor = 0.5 * lc.c_w * np.minimum(dist[keep], lc.delta_w) ** 2
    assert np.all(product.evaluate(box[keep]) >= floor * (1 - 1e-9))


def test_local_constants_two_well_slice():
    # Hessian eigenvalues at the wells are {1, 2}; the ring ratios must
    # bracket them in the small-delta limit
    p = two_well_slice()
    lc = estimate_local_constants(p, np.geomspace(0.01, 0.1, 6))
    assert lc.c_w <= 1.01
    assert lc.C_w >= 1.99


def test_local_constants_preconditions(product):
    with pytest.raises(ValueError):
        estimate_local_constants(product, [])
    with pytest.raises(ValueError):
        estimate_local_constants(product, [0.5 * product.min_pair_distance()])
