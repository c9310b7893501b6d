"""Closed-form checks of the lower-bound envelope.

Standalone numerics, independent of any PDE solve: a brute-force scan
certifying that the reduced (sine-normalized) envelope attains its
minimum sin(a1) + sin(a2) + sin(a3) only at the origin of the
(mu*, y*) box, and the exact identity behind the strict case-2 gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .junction import JunctionAngles


def reduced_envelope(mu_star, y_star, angles: JunctionAngles):
    """Sine-normalized envelope on the (mu*, y*) box.

    Admissible box: mu* in [-sin(a3/2), sin((a2-a1)/2)],
    y* in [-cos(a3/2), cos((a2-a1)/2)].
    """
    mu_star = np.asarray(mu_star, dtype=float)
    y_star = np.asarray(y_star, dtype=float)
    s3, c3 = np.sin(angles.half3), np.cos(angles.half3)
    sd, cd = np.sin(angles.half_diff), np.cos(angles.half_diff)
    lo_mu, hi_mu = -s3, sd
    lo_y, hi_y = -c3, cd
    tol = 1e-12
    if np.any(mu_star < lo_mu - tol) or np.any(mu_star > hi_mu + tol):
        raise ValueError("mu* outside the admissible box")
    if np.any(y_star < lo_y - tol) or np.any(y_star > hi_y + tol):
        raise ValueError("y* outside the admissible box")
    s1, s2, s3f = np.sin(angles.alpha1), np.sin(angles.alpha2), np.sin(angles.alpha3)
    first = np.sqrt(
        (s3 * (s1 + s2) + mu_star * (s1 - s2)) ** 2
        + ((y_star + c3) * (s1 + s2)) ** 2
    )
    second = s3f * np.sqrt((sd - mu_star) ** 2 + (cd - y_star) ** 2)
    return first + second


@dataclass(frozen=True)
class EnvelopeScan:
    angles: tuple
    resolution: int
    argmin: tuple  # (mu*, y*) at the minimizing node
    min_value: float
    gap: float  # min_value - (sin a1 + sin a2 + sin a3)
    value_at_origin: float
    cell: tuple  # grid spacing (d_mu, d_y)


def scan_reduced_envelope(angles: JunctionAngles, resolution: int = 201) -> EnvelopeScan:
    """Exhaustive grid scan of the reduced envelope over its box.

    Deterministic argmin tie-breaking: lowest flat index wins.
    """
    if resolution < 101:
        raise ValueError("resolution must be at least 101 per axis")
    s3, c3 = np.sin(angles.half3), np.cos(angles.half3)
    sd, cd = np.sin(angles.half_diff), np.cos(angles.half_diff)
    mu = np.linspace(-s3, sd, resolution)
    y = np.linspace(-c3, cd, resolution)
    mm, yy = np.meshgrid(mu, y, indexing="ij")
    vals = reduced_envelope(mm, yy, angles)
    flat = int(np.argmin(vals))
    i, j = np.unravel_index(flat, vals.shape)
    target = float(np.sin(angles.alpha1) + np.sin(angles.alpha2) + np.sin(angles.alpha3))
    return EnvelopeScan(
        angles=angles.as_tuple,
        resolution=resolution,
        argmin=(float(mu[i]), float(y[j])),
        min_value=float(vals[i, j]),
        gap=float(vals[i, j] - target),
        value_at_origin=float(reduced_envelope(0.0, 0.0, angles)),
        cell=(float(mu[1] - mu[0]), float(y[1] - y[0])),
    )


def case2_gap_identity(angles: JunctionAngles):
    """Strictness gap of the case-2 radical, direct vs closed form.

    Returns (direct, closed_form) where direct is the sine-normalized
    case-2 radical squared minus (sin a1 + sin a2 + sin a3)^2 and the
    closed form is 4 (sin^2(a3/2) - sin^2((a2-a1)/2))^2.  Both vanish
    exactly when a2 - a1 = a3 and are positive otherwise.
    """
    s1, s2, s3 = np.sin(angles.alpha1), np.sin(angles.alpha2), np.sin(angles.alpha3)
    sh3, ch3 = np.sin(angles.half3), np.cos(angles.half3)
    shd, chd = np.sin(angles.half_diff), np.cos(angles.half_diff)
    direct = (
        (sh3 * (s2 + s1) + shd * (s1 - s2)) ** 2
        + ((s1 + s2) * (ch3 + chd)) ** 2
        - (s1 + s2 + s3) ** 2
    )
    closed = 4.0 * (sh3**2 - shd**2) ** 2
    return float(direct), float(closed)
