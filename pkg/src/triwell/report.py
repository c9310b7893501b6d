"""Delimited reports and the figures rendered alongside them.

Every CSV starts with a schema-version line.  Floats are written with
shortest round-trip repr so a fixed seed yields byte-identical files.
Figures are rendered with the Agg backend into PNG files next to the
delimited output.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return "nan"
    return str(v)


def write_csv(path, schema: str, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema={schema}", ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def write_json(path, payload):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def write_profile_csv(profile, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    i, j = profile.pair
    lines = [
        "# schema=triwell.profile.v1",
        f"# pair={i}-{j} action={profile.action!r}",
        "eta,u1,u2",
    ]
    for eta, (u1, u2) in zip(profile.eta_grid, profile.values):
        lines.append(f"{eta!r},{u1!r},{u2!r}")
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def write_trace_csv(trace, path, n=720):
    from .boundary import trace_samples

    thetas, values = trace_samples(trace, n)
    rows = zip(thetas, values[:, 0], values[:, 1])
    return write_csv(path, "triwell.trace.v1", ["theta", "g1", "g2"], rows)


def write_convergence_csv(log, path):
    return write_csv(
        path,
        "triwell.convergence.v1",
        ["iteration", "energy", "step", "gradnorm"],
        log.rows(),
    )


def write_lambda_csv(stats, path):
    rows = (
        (y, L, l1, l2, l3)
        for y, L, (l1, l2, l3) in zip(stats.ys, stats.row_lengths, stats.lam)
    )
    return write_csv(
        path,
        "triwell.lambda.v1",
        ["y", "row_length", "lambda1", "lambda2", "lambda3"],
        rows,
    )


STATS_COLUMNS = [
    "eps",
    "n",
    "potential",
    "variant",
    "threshold",
    "slack",
    "alpha_coef",
    "y_star",
    "case1",
    "mu1",
    "mu2",
    "beta",
    "M_measure",
    "S_measure",
]


def stats_row(eps, n, tag, stats):
    return [
        eps,
        n,
        tag,
        stats.variant,
        stats.threshold,
        stats.slack,
        stats.alpha_coef,
        stats.y_star,
        stats.case1,
        stats.mu1,
        stats.mu2,
        stats.beta,
        stats.m_measure,
        stats.s_measure,
    ]


def write_stats_csv(report, path):
    rows = [
        stats_row(report.eps, report.n, report.potential_tag, report.stats_refined),
        stats_row(report.eps, report.n, report.potential_tag, report.stats_coarse),
    ]
    return write_csv(path, "triwell.stats.v1", STATS_COLUMNS, rows)


BOUNDS_COLUMNS = [
    "eps",
    "n",
    "potential",
    "J",
    "J_raw",
    "dirichlet",
    "potential_term",
    "sum_sigma",
    "competitor_energy",
    "gap_upper",
    "gap_J",
    "E_measured",
    "case1",
    "S_measure",
    "c_upper_implied",
    "deficit_third",
    "deficit_half",
]


def bounds_row(report):
    return [
        report.eps,
        report.n,
        report.potential_tag,
        report.j_total,
        report.j_raw,
        report.dirichlet,
        report.potential_term,
        report.sum_sigma,
        report.competitor_energy,
        report.gap_upper,
        report.gap_j,
        report.e_measured,
        report.case1,
        report.s_measure,
        report.c_upper_implied,
        report.deficit_third,
        report.deficit_half,
    ]


def write_bounds_csv(report, path):
    return write_csv(path, "triwell.bounds.v1", BOUNDS_COLUMNS, [bounds_row(report)])


SUMMARY_COLUMNS = [
    "eps",
    "n",
    "J",
    "competitor_energy",
    "sum_sigma",
    "gap_J",
    "gap_upper",
    "y_star",
    "mu1",
    "mu2",
    "beta",
    "E_measured",
    "S_measure",
    "max_u",
    "eps_max_grad",
]


def write_summary_csv(entries, path):
    rows = []
    for report, apriori in entries:
        rows.append(
            [
                report.eps,
                report.n,
                report.j_total,
                report.competitor_energy,
                report.sum_sigma,
                report.gap_j,
                report.gap_upper,
                report.y_star,
                report.mu1,
                report.mu2,
                report.beta,
                report.e_measured,
                report.s_measure,
                apriori.max_u,
                apriori.eps_times_max_grad,
            ]
        )
    return write_csv(path, "triwell.summary.v1", SUMMARY_COLUMNS, rows)


# ---------------------------------------------------------------- figures


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def profile_figure(profiles, path):
    plt = _plt()
    fig, axes = plt.subplots(1, len(profiles), figsize=(4 * len(profiles), 3.2), squeeze=False)
    for ax, pr in zip(axes[0], profiles):
        ax.plot(pr.eta_grid, pr.values[:, 0], label="u1")
        ax.plot(pr.eta_grid, pr.values[:, 1], label="u2")
        ax.set_title(f"pair {pr.pair[0]}-{pr.pair[1]}, action {pr.action:.6f}")
        ax.set_xlabel("eta")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def trace_figure(trace, path, n=720):
    from .boundary import trace_samples

    plt = _plt()
    thetas, values = trace_samples(trace, n)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(thetas, values[:, 0], label="g1")
    ax.plot(thetas, values[:, 1], label="g2")
    for end in trace.arc_endpoints:
        ax.axvline(end, color="0.8", lw=0.6)
    ax.set_xlabel("theta")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def field_figure(field, path):
    plt = _plt()
    g = field.grid
    minima = field.potential.minima_array
    d = field.values[..., None, :] - minima
    phase = np.argmin(np.sum(d * d, axis=-1), axis=-1).astype(float)
    phase[g.exterior_mask] = np.nan
    wvals = field.potential.evaluate(field.values)
    wvals = np.where(g.exterior_mask, np.nan, wvals)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    im1 = ax1.imshow(
        phase, origin="lower", extent=(-1, 1, -1, 1), cmap="viridis", interpolation="nearest"
    )
    ax1.set_title(f"nearest phase, eps={field.epsilon:g}")
    fig.colorbar(im1, ax=ax1, shrink=0.8)
    im2 = ax2.imshow(
        wvals, origin="lower", extent=(-1, 1, -1, 1), cmap="magma", interpolation="nearest"
    )
    ax2.set_title("W(u)")
    fig.colorbar(im2, ax=ax2, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def convergence_figure(log, path):
    plt = _plt()
    e = np.asarray(log.energies)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.semilogy(log.iterations, e - e.min() + 1e-16, label="energy above best")
    ax.semilogy(log.iterations, log.gradnorms, label="grad max-norm", alpha=0.7)
    ax.set_xlabel("iteration")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def lambda_figure(stats, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for k in range(3):
        ax.plot(stats.ys, stats.lam[:, k], label=f"lambda{k + 1}")
    ax.plot(stats.ys, stats.row_lengths, "k--", lw=0.8, label="row length")
    if stats.y_star is not None:
        ax.axvline(stats.y_star, color="r", lw=0.8, label="y*")
    ax.set_xlabel("y")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def sweep_figure(entries, path):
    plt = _plt()
    eps = np.array([r.eps for r, _ in entries])
    gap_j = np.array([abs(r.gap_j) for r, _ in entries])
    gap_up = np.array([r.gap_upper for r, _ in entries])
    ystar = np.array(
        [abs(r.y_star) if r.y_star is not None else np.nan for r, _ in entries]
    )
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.loglog(eps, gap_j, "o-", label="|J - sum sigma|")
    ax1.loglog(eps, gap_up, "s-", label="competitor - sum sigma")
    ax1.loglog(eps, eps * gap_up.max() / eps.max(), "k:", lw=0.8, label="slope 1")
    ax1.set_xlabel("eps")
    ax1.legend()
    ax2.loglog(eps, np.maximum(ystar, 1e-12), "o-", label="|y*|")
    ax2.loglog(
        eps,
        eps**0.25 * np.nanmax(ystar) / eps.max() ** 0.25,
        "k:",
        lw=0.8,
        label="slope 1/4",
    )
    ax2.set_xlabel("eps")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)
