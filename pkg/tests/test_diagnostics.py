import numpy as np
import pytest

from triwell import (
    SurfaceTensions,
    build_grid,
    build_triod,
    case2_envelope,
    constant_trace,
    interface_stats,
    lambda_profiles,
    locate_ystar,
    lower_bound_envelope,
    make_product_potential,
    measure_mu,
    rotated_energy_account,
    sharp_field,
    solve_angles,
)
from triwell.junction import JunctionAngles, random_angles

THIRD = 2.0 * np.pi / 3.0


@pytest.fixture(scope="module")
def equal_setup():
    p = make_product_potential((-1, 0), (1, 0), (0, np.sqrt(3)))
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    grid = build_grid(129)
    return p, angles, build_triod(angles), grid


@pytest.fixture(scope="module")
def skew_setup():
    # tensions (1, 1, 1.2) give alpha1 < alpha2 = alpha3
    p = make_product_potential((-1, 0), (1, 0), (0, np.sqrt(3)))
    angles = solve_angles(SurfaceTensions(1.0, 1.0, 1.2))
    grid = build_grid(129)
    return p, angles, build_triod(angles), grid


def _constant_field(p, grid, triod, well_index, eps=0.02):
    f = sharp_field(p, eps, grid, triod, constant_trace(p.minima_array[well_index]))
    f.values[:] = p.minima_array[well_index]
    return f


def test_lambda_constant_field(equal_setup):
    p, angles, triod, grid = equal_setup
    f = _constant_field(p, grid, triod, 0)
    lp = lambda_profiles(f, 0.3)
    assert np.array_equal(lp.lam[:, 0], lp.row_lengths)
    assert not lp.lam[:, 1].any()
    assert not lp.lam[:, 2].any()


def test_lambda_threshold_bounds(equal_setup):
    p, angles, triod, grid = equal_setup
    f = _constant_field(p, grid, triod, 0)
    with pytest.raises(ValueError):
        lambda_profiles(f, 0.0)
    with pytest.raises(ValueError):
        lambda_profiles(f, 2.0)


def test_lambda_row_sums_bounded(equal_setup):
    p, angles, triod, grid = equal_setup
    f = sharp_field(p, 0.02, grid, triod)
    lp = lambda_profiles(f, 0.3)
    assert np.all(lp.lam.sum(axis=1) <= lp.row_lengths + 1e-12)
    # above the junction the top phases fill every chord exactly
    top = lp.ys > 0.0
    assert np.array_equal((lp.lam[:, 0] + lp.lam[:, 1])[top], lp.row_lengths[top])


def test_ystar_sharp_field_lands_at_zero(equal_setup):
    p, angles, triod, grid = equal_setup
    f = sharp_field(p, 0.02, grid, triod)
    res = locate_ystar(f, angles, threshold=0.3, slack=0.9 * grid.h, c0=1.0)
    assert res.case1
    assert abs(res.y_star) <= grid.h


def test_ystar_case2_sentinel(equal_setup):
    p, angles, triod, grid = equal_setup
    f = _constant_field(p, grid, triod, 2)
    res = locate_ystar(f, angles, threshold=0.3, slack=0.9 * grid.h, c0=1.0)
    assert res.y_star is None
    assert not res.case1
    with pytest.raises(ValueError):
        measure_mu(f, angles, res.y_star, 0.3)


def test_mu_equal_angles_vanishes(equal_setup):
    p, angles, triod, grid = equal_setup
    f = sharp_field(p, 0.02, grid, triod)
    res = locate_ystar(f, angles, threshold=0.3, slack=0.9 * grid.h, c0=1.0)
    mu1, mu2 = measure_mu(f, angles, res.y_star, 0.3, c0=1.0)
    assert mu1 == 0.0
    assert mu2 == 0.0


def test_mu_unequal_angles_hits_offset(skew_setup):
    p, angles, triod, grid = skew_setup
    eps = 0.02
    f = sharp_field(p, eps, grid, triod)
    res = locate_ystar(f, angles, threshold=0.3, slack=0.9 * grid.h, c0=1.0)
    mu1, mu2 = measure_mu(f, angles, res.y_star, 0.3, c0=1.0)
    target = np.sin(angles.half_diff)
    assert abs(mu1 - target) <= eps + 3.0 * grid.h
    assert mu2 == 0.0


def test_envelope_minimum_at_measured_statistics():
    rng = np.random.default_rng(8)
    for _ in range(20):
        angles = random_angles(rng)
        sig = angles.implied_tensions()
        target = sig.total()
        at_min = lower_bound_envelope(
            float(np.sin(angles.half_diff)), 0.0, 0.0, sig, angles
        )
        assert at_min == pytest.approx(target, abs=1e-12)


def test_envelope_equal_tensions_origin():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    sig = SurfaceTensions(2.0, 2.0, 2.0)
    assert lower_bound_envelope(0.0, 0.0, 0.0, sig, angles) == pytest.approx(6.0, abs=1e-12)


def test_envelope_monotone_in_mu2():
    rng = np.random.default_rng(9)
    for _ in range(30):
        angles = random_angles(rng)
        sig = angles.implied_tensions()
        s3, sd = np.sin(angles.half3), np.sin(angles.half_diff)
        mu1 = rng.uniform(0.0, s3 + sd)
        mu2 = rng.uniform(1e-6, s3 - sd) if s3 > sd + 1e-6 else 0.0
        y = rng.uniform(-np.cos(angles.half3), np.cos(angles.half_diff))
        if mu2 > 0.0:
            assert lower_bound_envelope(mu1, mu2, y, sig, angles) > lower_bound_envelope(
                mu1, 0.0, y, sig, angles
            )


def test_envelope_box_checked():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    sig = SurfaceTensions(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        lower_bound_envelope(-0.5, 0.0, 0.0, sig, angles)
    with pytest.raises(ValueError):
        lower_bound_envelope(0.0, 0.0, 2.0, sig, angles)


def test_envelope_dominates_tension_sum():
    rng = np.random.default_rng(21)
    for _ in range(10):
        angles = random_angles(rng)
        sig = angles.implied_tensions()
        s3, sd = np.sin(angles.half3), np.sin(angles.half_diff)
        mus1 = np.linspace(0.0, s3 + sd, 21)
        mus2 = np.linspace(0.0, s3 - sd, 11)
        ys = np.linspace(-np.cos(angles.half3), np.cos(angles.half_diff), 21)
        vals = [
            lower_bound_envelope(m1, m2, y, sig, angles)
            for m1 in mus1
            for m2 in mus2
            for y in ys
        ]
        assert min(vals) >= sig.total() - 1e-9


def test_case2_envelope_exceeds_tension_sum():
    angles = JunctionAngles(THIRD, THIRD, THIRD)
    sig = SurfaceTensions(1.0, 1.0, 1.0)
    value = case2_envelope(sig, angles)
    assert value == pytest.approx(2.0 * np.sqrt(3.0), abs=1e-12)
    assert value > sig.total()
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = random_angles(rng)
        s = a.implied_tensions()
        assert case2_envelope(s, a) > s.total()


def test_rotated_account_identity_and_zero(equal_setup):
    p, angles, triod, grid = equal_setup
    from triwell import assemble_tensions, compute_connection, competitor, energy, make_trace

    profs = [compute_connection(p, i, j, n_nodes=401) for i, j in ((1, 2), (1, 3), (2, 3))]
    sig = assemble_tensions(p, profs)
    a2 = solve_angles(sig)
    triod2 = build_triod(a2)
    eps = 0.1
    trace = make_trace(a2, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod2, profs, trace)
    eb = energy(comp)
    rot = rotated_energy_account(comp, 0.0)
    assert rot.dx_part == pytest.approx(eb.dx_part, rel=1e-12)
    assert rot.dy_part == pytest.approx(eb.dy_part, rel=1e-12)

    f = _constant_field(p, grid, triod, 0)
    assert rotated_energy_account(f, 0.4).dirichlet == pytest.approx(0.0, abs=1e-20)


def test_rotated_account_region_restriction(equal_setup):
    p, angles, triod, grid = equal_setup
    f = _constant_field(p, grid, triod, 0)
    full = rotated_energy_account(f, 0.0)
    upper = rotated_energy_account(f, 0.0, y_min=0.0)
    assert upper.potential_term <= full.potential_term
    assert upper.potential_term == pytest.approx(0.0, abs=1e-20)


def test_interface_stats_variants(skew_setup):
    p, angles, triod, grid = skew_setup
    eps = 0.05
    f = sharp_field(p, eps, grid, triod)
    refined = interface_stats(f, angles, c0=1.0, variant="refined")
    coarse = interface_stats(f, angles, c0=1.0, variant="coarse")
    assert refined.threshold == pytest.approx(eps**0.25)
    assert refined.slack == pytest.approx(eps**0.5)
    assert coarse.threshold == pytest.approx(eps ** (1.0 / 6.0))
    assert coarse.slack == pytest.approx(eps ** (1.0 / 3.0))
    for stats in (refined, coarse):
        assert stats.case1
        assert stats.beta >= 0.0
        assert stats.s_measure >= 0.0
        assert 0.0 <= stats.mu1 <= np.sin(angles.half3) + np.sin(angles.half_diff) + 1e-9
        assert 0.0 <= stats.mu2 <= np.sin(angles.half3) - np.sin(angles.half_diff) + 1e-9
