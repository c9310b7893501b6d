import numpy as np
import pytest

from triwell import (
    ConfigurationError,
    ConvergenceFailureError,
    SolverOptions,
    assemble_tensions,
    build_grid,
    build_triod,
    check_apriori,
    compute_connection,
    constant_trace,
    competitor,
    energy,
    make_product_potential,
    make_trace,
    minimize,
    sharp_field,
    solve_angles,
    write_field,
)
from triwell.disk import BAND, EXTERIOR, INTERIOR, _energy_and_grad, load_field, read_field


@pytest.fixture(scope="module")
def case():
    p = make_product_potential((-1, 0), (1, 0), (0, np.sqrt(3)))
    profs = [compute_connection(p, i, j, n_nodes=401) for i, j in ((1, 2), (1, 3), (2, 3))]
    sig = assemble_tensions(p, profs)
    angles = solve_angles(sig)
    return p, profs, sig, angles, build_triod(angles)


def test_grid_classification():
    grid = build_grid(65)
    assert grid.h == pytest.approx(1.0 / 32.0)
    assert grid.node_class[32, 32] == INTERIOR  # center
    assert grid.node_class[32, 64] == BAND  # (1, 0)
    assert grid.theta[32, 64] == 0.0
    assert grid.node_class[64, 64] == EXTERIOR  # (1, 1)
    with pytest.raises(ConfigurationError):
        build_grid(63)


def test_interior_stencils_stay_inside():
    grid = build_grid(65)
    interior = grid.node_class == INTERIOR
    ext = grid.node_class == EXTERIOR
    j, i = np.nonzero(interior)
    for dj, di in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        assert not ext[j + dj, i + di].any()


def test_constant_field_energy_zero(case):
    p = case[0]
    grid = build_grid(65)
    trace = constant_trace(p.minima_array[0])
    f = sharp_field(p, 0.1, grid, build_triod(case[3]), trace)
    f.values[:] = p.minima_array[0]
    eb = energy(f)
    assert eb.total == 0.0
    assert eb.dirichlet == 0.0


def test_constant_offset_measures_disk_area(case):
    p = case[0]
    grid = build_grid(129)
    offset = p.minima_array[0] + np.array([0.0, 0.01])
    trace = constant_trace(offset)
    f = sharp_field(p, 0.1, grid, build_triod(case[3]), trace)
    f.values[:] = offset
    eb = energy(f)
    assert eb.dirichlet == 0.0
    area = eb.potential_term * f.epsilon / p.evaluate(offset)
    assert area == pytest.approx(np.pi, abs=0.02)


def test_breakdown_identities(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    trace = make_trace(angles, p.minima_array, 0.15, 1.0)
    comp = competitor(p, 0.15, grid, triod, profs, trace)
    for refine in (1, 2):
        eb = energy(comp, refine=refine)
        assert eb.total == eb.dirichlet + eb.potential_term
        assert eb.dirichlet == eb.dx_part + eb.dy_part


def test_competitor_bulk_and_ray_values(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(129)
    eps = 0.1
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod, profs, trace)
    # node deep inside sector 3, far from both rays
    j = np.argmin(np.abs(grid.ys + 0.5))
    i = np.argmin(np.abs(grid.xs))
    assert np.array_equal(comp.values[j, i], p.minima_array[2])
    # node on the 1-2 ray (positive y-axis for the equilateral case)
    j = np.argmin(np.abs(grid.ys - 0.5))
    pr = profs[0]
    expected = np.array(
        [np.interp(0.0, pr.eta_grid, pr.values[:, c]) for c in range(2)]
    )
    assert np.allclose(comp.values[j, i], expected, atol=1e-15)


def test_competitor_band_matches_trace(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    eps = 0.15
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod, profs, trace)
    band = grid.band_mask
    expected = trace(grid.theta[band])
    assert np.array_equal(comp.values[band], expected)


def test_competitor_eps_too_large(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    trace = make_trace(angles, p.minima_array, 0.2, 1.0)
    with pytest.raises(ConfigurationError):
        competitor(p, 0.6, grid, triod, profs, trace)


def test_competitor_gap_is_order_eps(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(129)
    gaps = []
    for eps in (0.2, 0.1):
        trace = make_trace(angles, p.minima_array, eps, 1.0)
        comp = competitor(p, eps, grid, triod, profs, trace)
        gap = energy(comp, refine=4).total - sig.total()
        gaps.append(abs(gap))
        assert abs(gap) / eps < 0.6
    assert gaps[1] < gaps[0]


def test_gradient_matches_finite_differences(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    eps = 0.15
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod, profs, trace)
    interior = grid.interior_mask
    work = comp.values.copy()
    x0 = work[interior].copy()

    def ev(x):
        work[interior] = x
        total, grad = _energy_and_grad(work, p, grid, eps)
        return total, grad[interior]

    _, g0 = ev(x0)
    rng = np.random.default_rng(0)
    step = 1e-4
    for _ in range(50):
        v = rng.normal(size=x0.shape)
        v /= np.linalg.norm(v)
        analytic = float(np.vdot(g0, v))
        ep, _ = ev(x0 + step * v)
        em, _ = ev(x0 - step * v)
        numeric = (ep - em) / (2.0 * step)
        assert abs(analytic - numeric) / max(abs(analytic), 1e-12) < 1e-6


def test_minimizer_below_competitor_and_monotone(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    eps = 0.15
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod, profs, trace)
    fld, log = minimize(p, eps, grid, trace, SolverOptions(), triod=triod, profiles=profs)
    assert energy(fld).total <= energy(comp).total
    assert energy(fld, refine=4).total <= energy(comp, refine=4).total
    energies = np.asarray(log.energies)
    assert np.all(np.diff(energies) <= 0.0)


def test_degenerate_trace_minimizes_to_zero(case):
    p = case[0]
    grid = build_grid(65)
    trace = constant_trace(p.minima_array[0])
    fld, log = minimize(p, 0.1, grid, trace, SolverOptions(initializer="boundary"))
    assert energy(fld).total < 1e-8


def test_budget_exhaustion_raises_with_iterate(case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    eps = 0.15
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    with pytest.raises(ConvergenceFailureError) as err:
        minimize(
            p, eps, grid, trace, SolverOptions(max_iter=2), triod=triod, profiles=profs
        )
    assert err.value.last is not None
    assert err.value.log is not None


def test_apriori_constant_field(case):
    p = case[0]
    grid = build_grid(65)
    trace = constant_trace(p.minima_array[0])
    f = sharp_field(p, 0.1, grid, build_triod(case[3]), trace)
    f.values[:] = p.minima_array[0]
    rep = check_apriori(f)
    assert rep.eps_times_max_grad == 0.0
    assert rep.max_u == pytest.approx(1.0)


def test_field_dump_round_trip(tmp_path, case):
    p, profs, sig, angles, triod = case
    grid = build_grid(65)
    eps = 0.15
    trace = make_trace(angles, p.minima_array, eps, 1.0)
    comp = competitor(p, eps, grid, triod, profs, trace)
    path = tmp_path / "field.bin"
    write_field(comp, path)
    meta, values = read_field(path)
    assert meta["n"] == "65"
    assert meta["eps"] == eps
    assert meta["potential"] == "product"
    assert np.allclose(meta["alpha"], angles.as_tuple)
    ext = grid.exterior_mask
    assert np.isnan(values[ext]).all()
    assert np.array_equal(values[~ext], comp.values[~ext])
    restored = load_field(path, p, trace)
    assert np.array_equal(restored.values[~ext], comp.values[~ext])
