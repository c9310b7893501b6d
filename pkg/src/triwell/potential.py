"""Triple-well potentials with certified structure.

A :class:`Potential` bundles closed-form ``evaluate/gradient/hessian``
callables with its zero set (the minima), a radius beyond which the
radial derivative is outward, and eigenvalue bounds for the Hessians at
the minima.  Certification is sample based: the structural hypotheses
are universally quantified, so we check them on recorded grids and
report the worst violating sample instead of proving anything.

Two families are provided: the product form ``W(u) = prod_i |u - a_i|^2``
(exact derivatives, isotropic Hessians at the minima) and a general
bivariate polynomial family used e.g. for the classical two-well slice
``W(x, y) = (1 - x^2)^2 / 4 + y^2 / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError

Array = np.ndarray

GRADIENT_ZERO_TOL = 1e-10  # absolute tolerance for W_u(a_i) = 0


@dataclass(frozen=True)
class Potential:
    """An evaluable multi-well potential on the plane.

    ``minima`` holds the zeros a_1, a_2, a_3 (two for degenerate test
    families).  ``outer_radius`` is a radius R with W_u(u).u > 0 for
    |u| > R.  ``hessian_bounds`` are the tight (min, max) eigenvalues of
    the Hessians over the minima.
    """

    minima: tuple
    evaluate: Callable[[Array], Array]
    gradient: Callable[[Array], Array]
    hessian: Callable[[Array], Array]
    outer_radius: float
    hessian_bounds: tuple
    tag: str = "custom"

    @property
    def minima_array(self) -> Array:
        return np.asarray(self.minima, dtype=float)

    def min_pair_distance(self) -> float:
        pts = self.minima_array
        dists = [
            float(np.linalg.norm(pts[i] - pts[j]))
            for i in range(len(pts))
            for j in range(i + 1, len(pts))
        ]
        return min(dists)

    def distance_to_minima(self, u: Array) -> Array:
        u = np.asarray(u, dtype=float)
        d = u[..., None, :] - self.minima_array
        return np.sqrt(np.sum(d * d, axis=-1)).min(axis=-1)


@dataclass(frozen=True)
class LocalQuadraticConstants:
    """Quadratic growth constants near the wells.

    For sampled delta < delta_w and |u - a_i| = delta the potential obeys
    c_w * delta^2 / 2 <= W(u) <= C_w * delta^2 / 2, and W(u) >= c_w * delta^2 / 2
    whenever u keeps distance >= delta from every minimum.
    """

    delta_w: float
    c_w: float
    C_w: float
    deltas: tuple = ()


@dataclass(frozen=True)
class SamplingSpec:
    """Density of the certification sampling.

    ``grid_points`` per axis on the box covering the coercivity ball plus
    ``margin``; ``ring_points`` on the coercivity test ring.
    """

    grid_points: int = 161
    ring_points: int = 720
    margin: float = 0.5


@dataclass
class ClauseReport:
    name: str
    passed: bool
    worst_value: float
    worst_point: tuple | None
    detail: str = ""


@dataclass
class PotentialCertification:
    passed: bool
    clauses: dict
    c1: float
    c2: float

    def failed_clauses(self):
        return [c for c in self.clauses.values() if not c.passed]


def _as_points(*pts) -> Array:
    arr = np.asarray(pts, dtype=float)
    if arr.shape != (len(pts), 2):
        raise ValueError("minima must be 2D points")
    return arr


def make_product_potential(a1, a2, a3) -> Potential:
    """Reference triple-well family W(u) = prod_i |u - a_i|^2.

    The Hessian at a_i is 2 |a_i - a_j|^2 |a_i - a_k|^2 times the identity,
    so unequal tensions are obtained purely by non-equilateral placement.
    """
    pts = _as_points(a1, a2, a3)
    scale = max(1.0, float(np.abs(pts).max()))
    for i in range(3):
        for j in range(i + 1, 3):
            if np.linalg.norm(pts[i] - pts[j]) <= 1e-12 * scale:
                raise ConfigurationError(f"minima {i + 1} and {j + 1} coincide")
    d1, d2 = pts[1] - pts[0], pts[2] - pts[0]
    area2 = abs(d1[0] * d2[1] - d1[1] * d2[0])
    if area2 <= 1e-12 * scale**2:
        raise ConfigurationError("minima are collinear")

    A = pts  # (3, 2)

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        d = u[..., None, :] - A
        f = np.sum(d * d, axis=-1)
        return f[..., 0] * f[..., 1] * f[..., 2]

    def gradient(u):
        u = np.asarray(u, dtype=float)
        d = u[..., None, :] - A
        f = np.sum(d * d, axis=-1)
        out = np.zeros(u.shape, dtype=float)
        for i in range(3):
            others = f[..., (i + 1) % 3] * f[..., (i + 2) % 3]
            out += 2.0 * d[..., i, :] * others[..., None]
        return out

    def hessian(u):
        u = np.asarray(u, dtype=float)
        d = u[..., None, :] - A
        f = np.sum(d * d, axis=-1)
        eye = np.eye(2)
        prod_sum = (
            f[..., 1] * f[..., 2] + f[..., 0] * f[..., 2] + f[..., 0] * f[..., 1]
        )
        out = 2.0 * prod_sum[..., None, None] * eye
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                k = 3 - i - j
                outer = d[..., i, :, None] * d[..., j, None, :]
                out = out + 4.0 * f[..., k, None, None] * outer
        return out

    eigs = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        eigs.append(
            2.0
            * float(np.sum((A[i] - A[j]) ** 2))
            * float(np.sum((A[i] - A[k]) ** 2))
        )
    outer_radius = 2.0 * float(np.linalg.norm(pts, axis=1).max()) + 1.0
    return Potential(
        minima=tuple(map(tuple, pts)),
        evaluate=evaluate,
        gradient=gradient,
        hessian=hessian,
        outer_radius=outer_radius,
        hessian_bounds=(min(eigs), max(eigs)),
        tag="product",
    )


def make_polynomial_potential(
    terms: Sequence[tuple], minima: Sequence, outer_radius: float | None = None
) -> Potential:
    """Potential from bivariate polynomial coefficients.

    ``terms`` is a sequence of (m, n, coeff) meaning coeff * x^m * y^n.
    The declared minima must be zeros with vanishing gradient; this is
    checked at construction.
    """
    terms = [(int(m), int(n), float(c)) for m, n, c in terms]
    if not terms:
        raise ValueError("empty coefficient list")
    pts = np.asarray(minima, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise ConfigurationError("need at least two 2D minima")

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        x, y = u[..., 0], u[..., 1]
        out = np.zeros(x.shape, dtype=float)
        for m, n, c in terms:
            out += c * x**m * y**n
        return out

    def gradient(u):
        u = np.asarray(u, dtype=float)
        x, y = u[..., 0], u[..., 1]
        gx = np.zeros(x.shape, dtype=float)
        gy = np.zeros(x.shape, dtype=float)
        for m, n, c in terms:
            if m >= 1:
                gx += c * m * x ** (m - 1) * y**n
            if n >= 1:
                gy += c * n * x**m * y ** (n - 1)
        return np.stack([gx, gy], axis=-1)

    def hessian(u):
        u = np.asarray(u, dtype=float)
        x, y = u[..., 0], u[..., 1]
        hxx = np.zeros(x.shape, dtype=float)
        hxy = np.zeros(x.shape, dtype=float)
        hyy = np.zeros(x.shape, dtype=float)
        for m, n, c in terms:
            if m >= 2:
                hxx += c * m * (m - 1) * x ** (m - 2) * y**n
            if m >= 1 and n >= 1:
                hxy += c * m * n * x ** (m - 1) * y ** (n - 1)
            if n >= 2:
                hyy += c * n * (n - 1) * x**m * y ** (n - 2)
        out = np.empty(x.shape + (2, 2), dtype=float)
        out[..., 0, 0] = hxx
        out[..., 0, 1] = hxy
        out[..., 1, 0] = hxy
        out[..., 1, 1] = hyy
        return out

    vals = evaluate(pts)
    grads = gradient(pts)
    if np.abs(vals).max() > 1e-9 or np.abs(grads).max() > 1e-9:
        raise ConfigurationError("declared minima are not critical zeros")
    eigs = np.linalg.eigvalsh(hessian(pts))
    if eigs.min() <= 0:
        raise ConfigurationError("declared minima are degenerate")

    if outer_radius is None:
        outer_radius = _probe_outer_radius(evaluate, gradient, pts)
    return Potential(
        minima=tuple(map(tuple, pts)),
        evaluate=evaluate,
        gradient=gradient,
        hessian=hessian,
        outer_radius=float(outer_radius),
        hessian_bounds=(float(eigs.min()), float(eigs.max())),
        tag="polynomial",
    )


def _probe_outer_radius(evaluate, gradient, pts, n_angles=720) -> float:
    phis = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    ring = np.stack([np.cos(phis), np.sin(phis)], axis=-1)
    base = float(np.linalg.norm(pts, axis=1).max())
    for radius in np.geomspace(max(1.5 * base, 1.0), 200.0 * max(base, 1.0), 24):
        u = radius * ring
        if np.min(np.sum(gradient(u) * u, axis=-1)) > 0:
            return float(radius)
    raise ConfigurationError("no radius with outward radial derivative found")


def two_well_slice() -> Potential:
    """Classical two-well benchmark W(x, y) = (1 - x^2)^2 / 4 + y^2 / 2."""
    terms = [(0, 0, 0.25), (2, 0, -0.5), (4, 0, 0.25), (0, 2, 0.5)]
    return make_polynomial_potential(terms, [(-1.0, 0.0), (1.0, 0.0)], outer_radius=2.0)


def certify_potential(
    p: Potential, sampling: SamplingSpec | None = None, ring_radius: float | None = None
) -> PotentialCertification:
    """Sample-based certification of the standing structural hypotheses.

    Checks, each as a structured clause with its worst sample: the minima
    are zeros and critical points, they are separated, the potential is
    positive away from them, the Hessians at the minima are positive
    definite (reporting tight bounds c1, c2), and the radial derivative
    points outward on the test ring.  A failed clause is reported, never
    raised.
    """
    spec = sampling or SamplingSpec()
    pts = p.minima_array
    clauses = {}

    vals = np.atleast_1d(p.evaluate(pts))
    worst = int(np.argmax(np.abs(vals)))
    clauses["minima_zero"] = ClauseReport(
        "minima_zero",
        bool(np.abs(vals).max() <= GRADIENT_ZERO_TOL),
        float(np.abs(vals).max()),
        tuple(pts[worst]),
        "max |W(a_i)|",
    )

    grads = np.atleast_2d(p.gradient(pts))
    gnorm = np.linalg.norm(grads, axis=-1)
    worst = int(np.argmax(gnorm))
    clauses["minima_critical"] = ClauseReport(
        "minima_critical",
        bool(gnorm.max() <= GRADIENT_ZERO_TOL),
        float(gnorm.max()),
        tuple(pts[worst]),
        "max |W_u(a_i)|",
    )

    min_pair = p.min_pair_distance()
    clauses["minima_separated"] = ClauseReport(
        "minima_separated",
        bool(len(pts) == 3 and min_pair > 1e-6),
        float(min_pair),
        None,
        "min pairwise distance of the zero set (three isolated zeros required)",
    )

    half = (p.outer_radius + spec.margin) if ring_radius is None else ring_radius
    axis = np.linspace(-half, half, spec.grid_points)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    box = np.stack([gx, gy], axis=-1).reshape(-1, 2)
    keep = p.distance_to_minima(box) > 0.05 * max(min_pair, 1e-12)
    wvals = p.evaluate(box[keep])
    worst = int(np.argmin(wvals))
    clauses["positive_away"] = ClauseReport(
        "positive_away",
        bool(wvals.min() > 0.0),
        float(wvals.min()),
        tuple(box[keep][worst]),
        "min W outside small balls around the minima",
    )

    hess = p.hessian(pts)
    eigs = np.linalg.eigvalsh(hess)
    c1, c2 = float(eigs.min()), float(eigs.max())
    clauses["hessian_bounds"] = ClauseReport(
        "hessian_bounds",
        bool(c1 > 0.0),
        c1,
        None,
        f"Hessian eigenvalues at minima within [{c1:.6g}, {c2:.6g}]",
    )

    radius = p.outer_radius if ring_radius is None else ring_radius
    phis = np.linspace(0.0, 2.0 * np.pi, spec.ring_points, endpoint=False)
    ring = radius * np.stack([np.cos(phis), np.sin(phis)], axis=-1)
    radial = np.sum(p.gradient(ring) * ring, axis=-1)
    worst = int(np.argmin(radial))
    clauses["radial_coercivity"] = ClauseReport(
        "radial_coercivity",
        bool(radial.min() > 0.0),
        float(radial.min()),
        tuple(ring[worst]),
        f"min W_u(u).u on the ring |u| = {radius:g}",
    )

    passed = all(c.passed for c in clauses.values())
    return PotentialCertification(passed=passed, clauses=clauses, c1=c1, c2=c2)


def estimate_local_constants(
    p: Potential,
    delta_grid: Sequence[float],
    n_angles: int = 256,
    far_grid_points: int = 121,
    margin: float = 0.5,
) -> LocalQuadraticConstants:
    """Estimate the quadratic growth constants near the wells.

    Angular samples on every circle |u - a_i| = delta give the tight ring
    ratios W / (delta^2 / 2); samples of the whole box impose the far-field
    clause W(u) >= c_w * min(dist, delta_w)^2 / 2.  Returns the largest
    tested delta together with the tightest constants consistent with all
    samples.
    """
    deltas = np.asarray(sorted(float(d) for d in delta_grid), dtype=float)
    if deltas.size == 0:
        raise ValueError("empty delta grid")
    half_pair = 0.5 * p.min_pair_distance()
    if deltas.min() <= 0.0 or deltas.max() >= half_pair:
        raise ValueError(
            f"delta values must lie in (0, {half_pair:g}) "
            "(half the minimal pairwise minima distance)"
        )
    delta_w = float(deltas.max())
    pts = p.minima_array
    phis = np.linspace(0.0, 2.0 * np.pi, n_angles, endpoint=False)
    ring_dirs = np.stack([np.cos(phis), np.sin(phis)], axis=-1)

    ratios_min = np.inf
    ratios_max = 0.0
    for delta in deltas:
        for a in pts:
            u = a + delta * ring_dirs
            ratio = p.evaluate(u) / (0.5 * delta**2)
            ratios_min = min(ratios_min, float(ratio.min()))
            ratios_max = max(ratios_max, float(ratio.max()))

    half = p.outer_radius + margin
    axis = np.linspace(-half, half, far_grid_points)
    gx, gy = np.meshgrid(axis, axis, indexing="ij")
    box = np.stack([gx, gy], axis=-1).reshape(-1, 2)
    dist = p.distance_to_minima(box)
    keep = dist > 1e-9
    caps = 2.0 * p.evaluate(box[keep]) / np.minimum(dist[keep], delta_w) ** 2
    c_w = min(ratios_min, float(caps.min()))
    if c_w <= 0.0:
        raise ConfigurationError("no positive lower quadratic constant exists")
    return LocalQuadraticConstants(
        delta_w=delta_w, c_w=c_w, C_w=ratios_max, deltas=tuple(deltas)
    )
