"""Interface statistics and energy-bound functionals on computed fields.

All set measures are h-weighted node counts along grid rows: lambda_i(y)
is the measured length of the i-th phase on the horizontal chord at
height y, y* the first height at which the top two phases fill the chord
up to a prescribed slack, and mu1/mu2 the phase measures along the
clipped line zeta(x) = min(y*, sqrt(1 - x^2)).  The envelope functional
of these statistics bounds the energy from below; its case-2 companion
covers configurations whose junction escapes the expected height range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import SurfaceTensions
from .disk import REPORT_REFINE, DiskField, EnergyBreakdown, EXTERIOR, energy
from .errors import ConfigurationError
from .junction import JunctionAngles


@dataclass(frozen=True)
class LambdaProfiles:
    ys: np.ndarray
    row_lengths: np.ndarray  # measured chord length per row
    lam: np.ndarray  # (rows, n_minima)
    threshold: float


def lambda_profiles(f: DiskField, threshold: float, delta_w: float | None = None) -> LambdaProfiles:
    """Per-row measured lengths of each phase's closeness set."""
    bound = delta_w if delta_w is not None else 0.5 * f.potential.min_pair_distance()
    if not 0.0 < threshold < bound:
        raise ValueError(f"threshold must lie in (0, {bound:g})")
    g = f.grid
    nonext = g.node_class != EXTERIOR
    minima = f.potential.minima_array
    d = f.values[..., None, :] - minima  # (n, n, m, 2)
    close = (np.sqrt(np.sum(d * d, axis=-1)) < threshold) & nonext[..., None]
    rows = np.nonzero(nonext.any(axis=1))[0]
    lam = g.h * close[rows].sum(axis=1).astype(float)
    row_lengths = g.h * nonext[rows].sum(axis=1).astype(float)
    return LambdaProfiles(
        ys=g.ys[rows], row_lengths=row_lengths, lam=lam, threshold=threshold
    )


@dataclass(frozen=True)
class YStarResult:
    y_star: float | None  # None when the criterion is never met (case 2)
    case1: bool
    row_index: int | None
    threshold: float
    slack: float


def locate_ystar(
    f: DiskField,
    angles: JunctionAngles,
    threshold: float,
    slack: float,
    c0: float = 1.0,
    profiles: LambdaProfiles | None = None,
) -> YStarResult:
    """First row height at which phases 1 and 2 fill the chord up to ``slack``."""
    if slack <= 0.0:
        raise ValueError("slack must be positive")
    lp = profiles if profiles is not None else lambda_profiles(f, threshold)
    y_lo = -np.cos(angles.half3) + c0 * f.epsilon
    y_hi_case1 = np.cos(angles.half_diff) - c0 * f.epsilon
    ok = (lp.ys >= y_lo) & (lp.lam[:, 0] + lp.lam[:, 1] >= lp.row_lengths - slack)
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return YStarResult(None, False, None, threshold, slack)
    k = int(hits[0])
    y_star = float(lp.ys[k])
    return YStarResult(y_star, bool(y_star <= y_hi_case1), k, threshold, slack)


def _sample_along_zeta(f: DiskField, cols: np.ndarray, y_star: float):
    """Field values at (x_i, zeta(x_i)) by vertical interpolation."""
    g = f.grid
    nonext = g.node_class != EXTERIOR
    n = g.n
    out = np.full((cols.size, 2), np.nan)
    for k, i in enumerate(cols):
        zeta = min(y_star, float(np.sqrt(max(0.0, 1.0 - g.xs[i] ** 2))))
        j0 = int(np.clip(np.floor((zeta + 1.0) / g.h), 0, n - 2))
        t = (zeta - g.ys[j0]) / g.h
        lo_ok, hi_ok = nonext[j0, i], nonext[j0 + 1, i]
        if lo_ok and hi_ok:
            out[k] = (1.0 - t) * f.values[j0, i] + t * f.values[j0 + 1, i]
        elif lo_ok:
            out[k] = f.values[j0, i]
        elif hi_ok:
            out[k] = f.values[j0 + 1, i]
    return out


def measure_mu(
    f: DiskField,
    angles: JunctionAngles,
    y_star: float,
    threshold: float,
    c0: float = 1.0,
):
    """Measured lengths (mu1, mu2) of the two phase sets along zeta.

    mu1 collects phase 1 on [-sin((a2-a1)/2) + c0 eps, sin(a3/2) - c0 eps],
    mu2 collects phase 2 on [-sin(a3/2) + c0 eps, -sin((a2-a1)/2) - c0 eps].
    """
    if y_star is None:
        raise ValueError("case-2 result has no mu measures")
    g = f.grid
    eps = f.epsilon
    s3, sd = np.sin(angles.half3), np.sin(angles.half_diff)
    minima = f.potential.minima_array

    def measure(x_lo, x_hi, well_index):
        if x_hi <= x_lo:
            return 0.0
        cols = np.nonzero((g.xs >= x_lo - 1e-12) & (g.xs <= x_hi + 1e-12))[0]
        if cols.size == 0:
            return 0.0
        vals = _sample_along_zeta(f, cols, y_star)
        dist = np.linalg.norm(vals - minima[well_index], axis=-1)
        count = np.count_nonzero(dist < threshold)
        return min(g.h * count, x_hi - x_lo)

    mu1 = measure(-sd + c0 * eps, s3 - c0 * eps, 0)
    mu2 = measure(-s3 + c0 * eps, -sd - c0 * eps, 1)
    return float(mu1), float(mu2)


@dataclass(frozen=True)
class InterfaceStats:
    """All interface statistics of one field at one threshold/slack variant."""

    variant: str
    threshold: float
    slack: float
    alpha_coef: float
    ys: np.ndarray
    row_lengths: np.ndarray
    lam: np.ndarray
    y_star: float | None
    case1: bool
    mu1: float
    mu2: float
    m_measure: float
    s_measure: float
    beta: float


def interface_stats(
    f: DiskField,
    angles: JunctionAngles,
    c0: float = 1.0,
    *,
    variant: str = "refined",
    alpha_coef: float = 1.0,
    delta_w: float | None = None,
) -> InterfaceStats:
    """Measure one variant of the interface statistics.

    ``refined`` uses closeness radius eps^(1/4) with slack alpha*eps^(1/2);
    ``coarse`` uses eps^(1/6) with slack eps^(1/3).
    """
    eps = f.epsilon
    if variant == "refined":
        threshold, slack = eps**0.25, alpha_coef * eps**0.5
    elif variant == "coarse":
        threshold, slack = eps ** (1.0 / 6.0), eps ** (1.0 / 3.0)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    lp = lambda_profiles(f, threshold, delta_w=delta_w)
    ystar = locate_ystar(f, angles, threshold, slack, c0=c0, profiles=lp)

    if ystar.y_star is None:
        mu1 = mu2 = m_measure = s_measure = beta = float("nan")
    else:
        mu1, mu2 = measure_mu(f, angles, ystar.y_star, threshold, c0=c0)
        y_lo = -np.cos(angles.half3) + c0 * eps
        sel = (lp.ys >= y_lo) & (lp.ys <= ystar.y_star)
        present = lp.lam[:, 2] > 0.0
        span = max(ystar.y_star - y_lo, 0.0)
        m_measure = min(f.grid.h * float(np.count_nonzero(sel & present)), span)
        s_measure = f.grid.h * float(np.count_nonzero(sel & ~present))
        beta = float(ystar.y_star + np.cos(angles.half3) - m_measure)
    return InterfaceStats(
        variant=variant,
        threshold=float(threshold),
        slack=float(slack),
        alpha_coef=float(alpha_coef),
        ys=lp.ys,
        row_lengths=lp.row_lengths,
        lam=lp.lam,
        y_star=ystar.y_star,
        case1=ystar.case1,
        mu1=mu1,
        mu2=mu2,
        m_measure=m_measure,
        s_measure=s_measure,
        beta=beta,
    )


_BOX_TOL = 1e-9


def lower_bound_envelope(
    mu1: float, mu2: float, y_star: float, sig: SurfaceTensions, angles: JunctionAngles
) -> float:
    """Envelope functional of the measured statistics; >= sum of tensions.

    Arguments must lie in the admissible box mu1 in [0, sin(a3/2) +
    sin((a2-a1)/2)], mu2 in [0, sin(a3/2) - sin((a2-a1)/2)], y* in
    [-cos(a3/2), cos((a2-a1)/2)].
    """
    s3, c3 = np.sin(angles.half3), np.cos(angles.half3)
    sd, cd = np.sin(angles.half_diff), np.cos(angles.half_diff)
    if not -_BOX_TOL <= mu1 <= s3 + sd + _BOX_TOL:
        raise ValueError("mu1 outside the admissible box")
    if not -_BOX_TOL <= mu2 <= s3 - sd + _BOX_TOL:
        raise ValueError("mu2 outside the admissible box")
    if not -c3 - _BOX_TOL <= y_star <= cd + _BOX_TOL:
        raise ValueError("y* outside the admissible box")
    first = np.sqrt(
        (s3 * (sig.sigma13 + sig.sigma23) + (mu2 - mu1 + sd) * (sig.sigma23 - sig.sigma13))
        ** 2
        + ((y_star + c3) * (sig.sigma13 + sig.sigma23)) ** 2
    )
    second = sig.sigma12 * np.sqrt((mu1 + mu2) ** 2 + (cd - y_star) ** 2)
    return float(first + second)


def case2_envelope(sig: SurfaceTensions, angles: JunctionAngles) -> float:
    """Lower-bound radical for fields whose junction escapes upward.

    Strictly exceeds the tension sum whenever a2 - a1 != a3.
    """
    s3, c3 = np.sin(angles.half3), np.cos(angles.half3)
    sd, cd = np.sin(angles.half_diff), np.cos(angles.half_diff)
    value = float(
        np.sqrt(
            ((s3 - sd) * sig.sigma13 + (s3 + sd) * sig.sigma23) ** 2
            + ((sig.sigma13 + sig.sigma23) * (c3 + cd)) ** 2
        )
    )
    if not value > sig.total():
        raise ConfigurationError(
            "case-2 radical does not exceed the tension sum; degenerate angles"
        )
    return value


@dataclass(frozen=True)
class BoundReport:
    """Measured energy against its upper and lower bounds for one solve."""

    eps: float
    n: int
    potential_tag: str
    j_total: float  # refined-quadrature value; j_raw is the descent functional
    j_raw: float
    dirichlet: float
    potential_term: float
    sum_sigma: float
    competitor_energy: float
    gap_upper: float  # competitor - sum_sigma
    gap_j: float  # J - sum_sigma
    e_measured: float  # envelope at the measured statistics
    case1: bool
    y_star: float | None
    mu1: float
    mu2: float
    beta: float
    s_measure: float
    c_upper_implied: float  # gap_upper / eps
    deficit_third: float  # max(0, -gap_j) / eps^(1/3)
    deficit_half: float  # max(0, -gap_j) / eps^(1/2)
    stats_refined: InterfaceStats
    stats_coarse: InterfaceStats


def bound_report(
    f: DiskField,
    sig: SurfaceTensions,
    angles: JunctionAngles,
    competitor_energy: float,
    c0: float = 1.0,
    alpha_coef: float = 1.0,
) -> BoundReport:
    """Assemble the energy sandwich and the measured envelope for one field.

    Energies are reported with the refined quadrature so that the
    second-order node-quadrature bias across thin layers does not pollute
    the eps-scale gaps; the raw descent value is kept alongside.
    """
    eb = energy(f, refine=REPORT_REFINE)
    eb_raw = energy(f)
    eps = f.epsilon
    refined = interface_stats(f, angles, c0, variant="refined", alpha_coef=alpha_coef)
    coarse = interface_stats(f, angles, c0, variant="coarse")
    if refined.case1:
        e_measured = lower_bound_envelope(
            refined.mu1, refined.mu2, refined.y_star, sig, angles
        )
    else:
        e_measured = case2_envelope(sig, angles)
    sum_sigma = sig.total()
    gap_j = eb.total - sum_sigma
    deficit = max(0.0, -gap_j)
    return BoundReport(
        eps=eps,
        n=f.grid.n,
        potential_tag=f.potential.tag,
        j_total=eb.total,
        j_raw=eb_raw.total,
        dirichlet=eb.dirichlet,
        potential_term=eb.potential_term,
        sum_sigma=sum_sigma,
        competitor_energy=float(competitor_energy),
        gap_upper=float(competitor_energy) - sum_sigma,
        gap_j=gap_j,
        e_measured=e_measured,
        case1=refined.case1,
        y_star=refined.y_star,
        mu1=refined.mu1,
        mu2=refined.mu2,
        beta=refined.beta,
        s_measure=refined.s_measure,
        c_upper_implied=(float(competitor_energy) - sum_sigma) / eps,
        deficit_third=deficit / eps ** (1.0 / 3.0),
        deficit_half=deficit / eps**0.5,
        stats_refined=refined,
        stats_coarse=coarse,
    )


def rotated_energy_account(f: DiskField, angle: float, y_min: float | None = None) -> EnergyBreakdown:
    """Energy breakdown in a frame rotated by ``angle``.

    The field is resampled by bilinear interpolation onto the rotated
    lattice and the same cell quadrature is applied there, so at angle 0
    the directional parts reproduce the unrotated ones.  ``y_min``
    restricts the account to the preimage half-plane y >= y_min.
    """
    g = f.grid
    n, h = g.n, g.h
    eps = f.epsilon
    cos_a, sin_a = float(np.cos(angle)), float(np.sin(angle))

    xt, yt = np.meshgrid(g.xs, g.ys, indexing="xy")
    px = cos_a * xt - sin_a * yt
    py = sin_a * xt + cos_a * yt
    vals, invalid = _bilinear(f, px.ravel(), py.ravel())
    vals = vals.reshape(n, n, 2)
    valid = ~invalid.reshape(n, n)

    offsets = (np.arange(4) + 0.5) / 4.0
    ox, oy = np.meshgrid(offsets, offsets, indexing="xy")
    cx = g.xs[:-1][None, :, None, None] + ox[None, None] * h
    cy = g.ys[:-1][:, None, None, None] + oy[None, None] * h
    sx = cos_a * cx - sin_a * cy
    sy = sin_a * cx + cos_a * cy
    inside = sx * sx + sy * sy <= 1.0
    if y_min is not None:
        inside &= sy >= y_min
    frac = inside.sum(axis=(2, 3)) / 16.0
    corners_ok = valid[:-1, :-1] & valid[:-1, 1:] & valid[1:, :-1] & valid[1:, 1:]
    w = np.where(corners_ok, h * h * frac, 0.0)

    dx = (vals[:-1, 1:] - vals[:-1, :-1] + vals[1:, 1:] - vals[1:, :-1]) / (2.0 * h)
    dy = (vals[1:, :-1] - vals[:-1, :-1] + vals[1:, 1:] - vals[:-1, 1:]) / (2.0 * h)
    wn = f.potential.evaluate(vals)
    wc = 0.25 * (wn[:-1, :-1] + wn[:-1, 1:] + wn[1:, :-1] + wn[1:, 1:])
    dx_part = 0.5 * eps * float(np.sum(w * np.sum(dx * dx, -1)))
    dy_part = 0.5 * eps * float(np.sum(w * np.sum(dy * dy, -1)))
    potential_term = float(np.sum(w * wc)) / eps
    dirichlet = dx_part + dy_part
    return EnergyBreakdown(
        total=dirichlet + potential_term,
        dirichlet=dirichlet,
        potential_term=potential_term,
        dx_part=dx_part,
        dy_part=dy_part,
    )


def _bilinear(f: DiskField, px, py):
    """Availability-aware bilinear samples; invalid where the stencil
    leans on an unavailable node with non-negligible weight."""
    g = f.grid
    n, h = g.n, g.h
    avail = g.available_mask
    i0 = np.clip(np.floor((px + 1.0) / h).astype(int), 0, n - 2)
    j0 = np.clip(np.floor((py + 1.0) / h).astype(int), 0, n - 2)
    tx = (px - g.xs[i0]) / h
    ty = (py - g.ys[j0]) / h
    w00 = (1.0 - tx) * (1.0 - ty)
    w01 = tx * (1.0 - ty)
    w10 = (1.0 - tx) * ty
    w11 = tx * ty
    out = (
        w00[:, None] * f.values[j0, i0]
        + w01[:, None] * f.values[j0, i0 + 1]
        + w10[:, None] * f.values[j0 + 1, i0]
        + w11[:, None] * f.values[j0 + 1, i0 + 1]
    )
    bad = (
        w00 * ~avail[j0, i0]
        + w01 * ~avail[j0, i0 + 1]
        + w10 * ~avail[j0 + 1, i0]
        + w11 * ~avail[j0 + 1, i0 + 1]
    )
    return out, bad > 1e-12
