"""End-to-end runner: configuration, sweeps, persistence, verification.

Subcommands: sigma | angles | solve | sweep | verify.  Exit codes:
0 ok, 2 hypothesis or configuration violation, 3 solver nonconvergence,
4 verification failure.  With a fixed seed all CSV outputs are
byte-identical between runs; figures are rendered next to them unless
--no-plots is given.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import report
from .boundary import make_trace, trace_samples
from .connections import SurfaceTensions, assemble_tensions, compute_connection
from .diagnostics import bound_report, case2_envelope
from .disk import REPORT_REFINE, SolverOptions, build_grid, check_apriori, competitor, energy, minimize, write_field
from .envelope import case2_gap_identity, scan_reduced_envelope
from .errors import (
    EXIT_HYPOTHESIS,
    EXIT_NONCONVERGENCE,
    EXIT_OK,
    EXIT_VERIFICATION,
    ConfigurationError,
    ConvergenceFailureError,
    HypothesisViolationError,
)
from .junction import JunctionAngles, build_triod, canonical_labels, random_angles
from .potential import (
    certify_potential,
    estimate_local_constants,
    make_polynomial_potential,
    make_product_potential,
)

EQUILATERAL = [[-1.0, 0.0], [1.0, 0.0], [0.0, float(np.sqrt(3.0))]]


@dataclass
class RunConfig:
    """One run: potential, scales, grid, solver knobs, output location."""

    potential_family: str = "product"
    minima: list = field(default_factory=lambda: [list(p) for p in EQUILATERAL])
    polynomial_terms: list | None = None
    epsilons: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    n: int = 257
    c0: float = 1.0
    seed: int = 0
    out_dir: str = "runs/default"
    solver: dict = field(default_factory=dict)
    connection: dict = field(default_factory=dict)
    alpha_coef: float = 1.0
    plots: bool = True
    tensions_override: list | None = None
    override_angles: list | None = None

    def validate(self):
        eps = list(self.epsilons)
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigurationError("epsilon list must be strictly decreasing")
        if any(e <= 0 for e in eps):
            raise ConfigurationError("epsilon values must be positive")

    def solver_options(self) -> SolverOptions:
        allowed = {f.name for f in dataclasses.fields(SolverOptions)}
        opts = {k: v for k, v in self.solver.items() if k in allowed}
        opts.setdefault("seed", self.seed)
        return SolverOptions(**opts)


def load_config(path=None, overrides=None) -> RunConfig:
    raw = {}
    if path is not None:
        raw = json.loads(Path(path).read_text())
    pot = raw.pop("potential", {})
    cfg = RunConfig(
        potential_family=pot.get("family", "product"),
        minima=pot.get("minima", [list(p) for p in EQUILATERAL]),
        polynomial_terms=pot.get("terms"),
        **{k: v for k, v in raw.items() if k in {f.name for f in dataclasses.fields(RunConfig)}},
    )
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, value)
    cfg.validate()
    return cfg


@dataclass
class CaseContext:
    config: RunConfig
    potential: object
    tensions: SurfaceTensions
    angles: JunctionAngles
    triod: object
    profiles: list


def _build_potential(cfg: RunConfig):
    if cfg.potential_family == "product":
        if len(cfg.minima) != 3:
            raise ConfigurationError("product family needs three minima")
        return make_product_potential(*cfg.minima)
    if cfg.potential_family == "polynomial":
        if not cfg.polynomial_terms:
            raise ConfigurationError("polynomial family needs coefficient terms")
        return make_polynomial_potential(cfg.polynomial_terms, cfg.minima)
    raise ConfigurationError(f"unknown potential family {cfg.potential_family!r}")


def prepare_case(cfg: RunConfig) -> CaseContext:
    """Build the potential, tensions, canonical labels, triod and profiles."""
    p = _build_potential(cfg)
    if cfg.tensions_override is not None:
        # testing knob: fail fast on injected degenerate tensions
        SurfaceTensions(*map(float, cfg.tensions_override)).validate()
    conn = cfg.connection
    kwargs = dict(
        length=conn.get("length"),
        n_nodes=conn.get("n_nodes", 801),
        restarts=conn.get("restarts", 0),
        seed=cfg.seed,
    )
    profiles = [compute_connection(p, i, j, **kwargs) for i, j in ((1, 2), (1, 3), (2, 3))]
    if cfg.tensions_override is not None:
        sig = SurfaceTensions(*map(float, cfg.tensions_override))
    else:
        sig = assemble_tensions(p, profiles)
    sig, minima, angles = canonical_labels(sig, p.minima)
    if tuple(minima) != tuple(p.minima):
        p = dataclasses.replace(p, minima=tuple(minima))
        profiles = [
            compute_connection(p, i, j, **kwargs) for i, j in ((1, 2), (1, 3), (2, 3))
        ]
    return CaseContext(
        config=cfg,
        potential=p,
        tensions=sig,
        angles=angles,
        triod=build_triod(angles),
        profiles=profiles,
    )


def _eps_tag(eps: float) -> str:
    return repr(float(eps)).replace(".", "p").replace("-", "m")


def cmd_sigma(ctx: CaseContext, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    for pr in ctx.profiles:
        report.write_profile_csv(pr, out / f"profile_{pr.pair[0]}{pr.pair[1]}.csv")
    payload = ctx.tensions.as_dict()
    payload.update(
        sum_sigma=ctx.tensions.total(),
        swapped_12=ctx.angles.swapped_12,
        equipartition_residuals={
            f"{pr.pair[0]}{pr.pair[1]}": pr.equipartition_residual for pr in ctx.profiles
        },
    )
    report.write_json(out / "tensions.json", payload)
    if ctx.config.plots:
        report.profile_figure(ctx.profiles, out / "profiles.png")
    print(
        "sigma12={sigma12:.8f} sigma13={sigma13:.8f} sigma23={sigma23:.8f}".format(
            **ctx.tensions.as_dict()
        )
    )
    return EXIT_OK


def cmd_angles(ctx: CaseContext, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    a = ctx.angles
    payload = {
        "alpha1": a.alpha1,
        "alpha2": a.alpha2,
        "alpha3": a.alpha3,
        "sine_residual": a.sine_residual(ctx.tensions),
        "swapped_12": a.swapped_12,
    }
    payload.update(ctx.tensions.as_dict())
    report.write_json(out / "angles.json", payload)
    report.write_csv(
        out / "angles.csv",
        "triwell.angles.v1",
        ["alpha1", "alpha2", "alpha3", "sigma12", "sigma13", "sigma23", "sine_residual"],
        [
            [
                a.alpha1,
                a.alpha2,
                a.alpha3,
                ctx.tensions.sigma12,
                ctx.tensions.sigma13,
                ctx.tensions.sigma23,
                a.sine_residual(ctx.tensions),
            ]
        ],
    )
    print(f"alpha=({a.alpha1:.8f}, {a.alpha2:.8f}, {a.alpha3:.8f})")
    return EXIT_OK


def solve_one(ctx: CaseContext, eps: float, out: Path):
    """Solve at one scale and persist every per-eps artifact."""
    cfg = ctx.config
    out.mkdir(parents=True, exist_ok=True)
    trace = make_trace(ctx.angles, ctx.potential.minima_array, eps, cfg.c0)
    grid = build_grid(cfg.n)
    comp = competitor(ctx.potential, eps, grid, ctx.triod, ctx.profiles, trace)
    comp_energy = energy(comp, refine=REPORT_REFINE).total
    tag = _eps_tag(eps)
    try:
        fld, log = minimize(
            ctx.potential,
            eps,
            grid,
            trace,
            cfg.solver_options(),
            triod=ctx.triod,
            profiles=ctx.profiles,
        )
    except ConvergenceFailureError as err:
        if err.last is not None:
            write_field(err.last, out / f"field_eps{tag}_failed.bin")
        if err.log is not None:
            report.write_convergence_csv(err.log, out / f"convergence_eps{tag}.csv")
        raise
    rep = bound_report(
        fld, ctx.tensions, ctx.angles, comp_energy, cfg.c0, cfg.alpha_coef
    )
    apriori = check_apriori(fld)
    write_field(fld, out / f"field_eps{tag}.bin")
    report.write_convergence_csv(log, out / f"convergence_eps{tag}.csv")
    report.write_bounds_csv(rep, out / f"bounds_eps{tag}.csv")
    report.write_stats_csv(rep, out / f"stats_eps{tag}.csv")
    report.write_lambda_csv(rep.stats_refined, out / f"lambda_eps{tag}.csv")
    if cfg.plots:
        report.field_figure(fld, out / f"field_eps{tag}.png")
        report.convergence_figure(log, out / f"convergence_eps{tag}.png")
        report.lambda_figure(rep.stats_refined, out / f"lambda_eps{tag}.png")
    print(
        f"eps={eps:g}: J={rep.j_total:.6f} competitor={rep.competitor_energy:.6f} "
        f"sum_sigma={rep.sum_sigma:.6f} y*={rep.y_star}"
    )
    return rep, apriori


def cmd_solve(ctx: CaseContext, out: Path) -> int:
    if ctx.config.plots:
        trace = make_trace(
            ctx.angles, ctx.potential.minima_array, ctx.config.epsilons[0], ctx.config.c0
        )
        out.mkdir(parents=True, exist_ok=True)
        report.trace_figure(trace, out / "trace.png")
    for eps in ctx.config.epsilons:
        solve_one(ctx, eps, out)
    return EXIT_OK


def _fit_exponent(eps, gaps):
    eps = np.asarray(eps, dtype=float)
    gaps = np.maximum(np.abs(np.asarray(gaps, dtype=float)), 1e-15)
    slope, _ = np.polyfit(np.log(eps), np.log(gaps), 1)
    return float(slope)


def _alpha_needed(stats, angles, eps, c0):
    y_lo = -np.cos(angles.half3) + c0 * eps
    y_hi = np.cos(angles.half_diff) - c0 * eps
    sel = (stats.ys >= y_lo) & (stats.ys <= y_hi)
    if not np.any(sel):
        return float("nan")
    gap = stats.row_lengths[sel] - stats.lam[sel, 0] - stats.lam[sel, 1]
    return float(gap.min() / np.sqrt(eps))


def cmd_sweep(ctx: CaseContext, out: Path) -> int:
    cfg = ctx.config
    if len(cfg.epsilons) < 3:
        raise ConfigurationError("a sweep needs at least three epsilon values")
    entries = []
    for eps in cfg.epsilons:
        entries.append(solve_one(ctx, eps, out))
    reports = [r for r, _ in entries]
    epss = [r.eps for r in reports]
    largest = reports[0]
    loc_c = (
        abs(largest.y_star) / largest.eps**0.25 if largest.y_star is not None else float("nan")
    )
    violations = [
        r.eps
        for r in reports[1:]
        if r.y_star is not None and abs(r.y_star) > loc_c * r.eps**0.25 + 1e-12
    ]
    fits = {
        "C_upper": max(r.c_upper_implied for r in reports),
        "C_lower_third": max(r.deficit_third for r in reports),
        "C_lower_half": max(r.deficit_half for r in reports),
        "C_localization": loc_c,
        "localization_violations": violations,
        "alpha_fit": max(
            _alpha_needed(r.stats_refined, ctx.angles, r.eps, cfg.c0) for r in reports
        ),
        "p_upper": _fit_exponent(epss, [r.gap_upper for r in reports]),
        "p_J": _fit_exponent(epss, [r.gap_j for r in reports]),
    }
    report.write_summary_csv(entries, out / "summary.csv")
    report.write_json(out / "sweep_fits.json", fits)
    if cfg.plots:
        report.sweep_figure(entries, out / "sweep.png")
    print(
        "sweep fitted: C_upper={C_upper:.4f} C_loc={C_localization:.4f} "
        "p_upper={p_upper:.3f} p_J={p_J:.3f}".format(**fits)
    )
    return EXIT_OK


def cmd_verify(ctx: CaseContext, out: Path) -> int:
    cfg = ctx.config
    checks = []

    def check(name, ok, detail=""):
        checks.append((name, bool(ok)))
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")

    cert = certify_potential(ctx.potential)
    check("potential_certification", cert.passed, f"c1={cert.c1:.6g} c2={cert.c2:.6g}")

    half = 0.5 * ctx.potential.min_pair_distance()
    deltas = np.geomspace(0.02 * half, 0.8 * half, 8)
    lc = estimate_local_constants(ctx.potential, deltas)
    holdout = True
    rng_deltas = np.geomspace(0.03 * half, 0.75 * half, 5)
    for delta in rng_deltas:
        phis = np.linspace(0.0, 2.0 * np.pi, 511, endpoint=False)
        ring = np.stack([np.cos(phis), np.sin(phis)], axis=-1)
        for a in ctx.potential.minima_array:
            vals = ctx.potential.evaluate(a + delta * ring)
            holdout &= bool(vals.min() >= 0.5 * lc.c_w * delta**2 * (1 - 1e-9))
            holdout &= bool(vals.max() <= 0.5 * lc.C_w * delta**2 * (1 + 1e-9))
    check("local_quadratic_constants", holdout, f"c_w={lc.c_w:.4g} C_w={lc.C_w:.4g}")

    a = ctx.angles
    residual = a.sine_residual(ctx.tensions)
    angle_ok = (
        abs(sum(a.as_tuple) - 2.0 * np.pi) < 1e-12
        and all(0 < v < np.pi for v in a.as_tuple)
        and residual < 1e-10
    )
    from .junction import solve_angles

    rt = solve_angles(a.implied_tensions())
    angle_ok &= max(abs(x - y) for x, y in zip(rt.as_tuple, a.as_tuple)) < 1e-10
    check("young_angles", angle_ok, f"sine residual {residual:.3e}")

    rng = np.random.default_rng(cfg.seed)
    scan_ok = True
    for trial_angles in [a] + [random_angles(rng) for _ in range(5)]:
        scan = scan_reduced_envelope(trial_angles, resolution=201)
        target = scan.min_value - scan.gap
        scan_ok &= abs(scan.argmin[0]) <= scan.cell[0] + 1e-12
        scan_ok &= abs(scan.argmin[1]) <= scan.cell[1] + 1e-12
        scan_ok &= scan.gap >= -1e-9
        scan_ok &= abs(scan.value_at_origin - target) < 1e-9
    check("envelope_scan", scan_ok)

    ident_ok = True
    for _ in range(200):
        direct, closed = case2_gap_identity(random_angles(rng))
        ident_ok &= abs(direct - closed) < 1e-12
    ident_ok &= case2_envelope(ctx.tensions, a) > ctx.tensions.total()
    check("case2_identity", ident_ok)

    eps = cfg.epsilons[-1]
    trace = make_trace(a, ctx.potential.minima_array, eps, cfg.c0)
    thetas, values = trace_samples(trace, 2048)
    wrap = np.linalg.norm(trace(0.0) - trace(2.0 * np.pi - 1e-12))
    step = np.diff(np.concatenate([thetas, [2.0 * np.pi]]))
    jumps = np.linalg.norm(np.diff(values, axis=0), axis=1)
    lip = trace.lipschitz_bound
    trace_ok = (
        wrap <= lip * 1e-12 + 1e-12
        and bool(np.all(jumps <= lip * step[:-1] + 1e-12))
        and float(np.linalg.norm(values, axis=1).max()) <= trace.max_value_norm + 1e-12
    )
    check("boundary_trace", trace_ok)

    if cfg.override_angles is not None:
        o = cfg.override_angles
        ok = abs(sum(o) - 2.0 * np.pi) < 1e-9 and all(0 < v < np.pi for v in o)
        if ok:
            try:
                oa = JunctionAngles(*o)
                ok = oa.sine_residual(ctx.tensions) < 1e-8
            except ConfigurationError:
                ok = False
        check("override_angles", ok)

    failed = [name for name, ok in checks if not ok]
    if failed:
        print(f"verification failed: {', '.join(failed)}")
        return EXIT_VERIFICATION
    print("verification passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="triwell",
        description="Triple-well phase-field lab on the unit disk",
    )
    parser.add_argument("command", choices=["sigma", "angles", "solve", "sweep", "verify"])
    parser.add_argument("--config", type=Path, default=None, help="JSON run config")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--eps", type=str, default=None, help="comma-separated epsilon list")
    parser.add_argument("--n", type=int, default=None, help="grid nodes per axis")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed")
    parser.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "n": args.n,
        "seed": args.seed,
        "epsilons": [float(v) for v in args.eps.split(",")] if args.eps else None,
        "out_dir": str(args.out) if args.out else None,
    }
    try:
        cfg = load_config(args.config, overrides)
        if args.no_plots:
            cfg.plots = False
        out = Path(cfg.out_dir)
        ctx = prepare_case(cfg)
        dispatch = {
            "sigma": cmd_sigma,
            "angles": cmd_angles,
            "solve": cmd_solve,
            "sweep": cmd_sweep,
            "verify": cmd_verify,
        }
        return dispatch[args.command](ctx, out)
    except (HypothesisViolationError, ConfigurationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ConvergenceFailureError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
