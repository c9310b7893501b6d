"""Young's law angles and the triod partition of the plane.

The angle triple is the classical closed form: alpha_i = pi - beta_i
where beta_i are the interior angles of the Euclidean triangle with side
lengths (sigma23, sigma13, sigma12) opposite beta_1, beta_2, beta_3.
Coordinates follow the convention that the y-axis bisects the third
sector, which occupies the bottom of the disk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connections import SurfaceTensions
from .errors import ConfigurationError
from .potential import Potential

TWO_PI = 2.0 * np.pi
_RAY_TOL = 1e-13


@dataclass(frozen=True)
class JunctionAngles:
    """Sector angles (radians) with sum 2*pi, each in (0, pi), alpha2 >= alpha1.

    ``swapped_12`` records whether labels 1 and 2 were exchanged on
    construction to honor the alpha2 >= alpha1 convention; callers must
    relabel minima and tensions accordingly.
    """

    alpha1: float
    alpha2: float
    alpha3: float
    swapped_12: bool = False

    def __post_init__(self):
        total = self.alpha1 + self.alpha2 + self.alpha3
        if abs(total - TWO_PI) > 1e-9:
            raise ConfigurationError(f"angles sum to {total:.12g}, not 2*pi")
        for a in (self.alpha1, self.alpha2, self.alpha3):
            if not 0.0 < a < np.pi:
                raise ConfigurationError(f"angle {a:.6g} outside (0, pi)")
        if self.alpha2 < self.alpha1 - 1e-12:
            raise ConfigurationError("convention alpha2 >= alpha1 violated")

    @property
    def as_tuple(self):
        return (self.alpha1, self.alpha2, self.alpha3)

    @property
    def half3(self) -> float:
        return 0.5 * self.alpha3

    @property
    def half_diff(self) -> float:
        return 0.5 * (self.alpha2 - self.alpha1)

    def sine_residual(self, sig: SurfaceTensions) -> float:
        """Normalized residual of the sine relations against ``sig``."""
        r1 = np.sin(self.alpha1) / sig.sigma23
        r2 = np.sin(self.alpha2) / sig.sigma13
        r3 = np.sin(self.alpha3) / sig.sigma12
        scale = (r1 + r2 + r3) / 3.0
        return float((abs(r1 - r2) + abs(r2 - r3)) / scale)

    def implied_tensions(self) -> SurfaceTensions:
        """Tensions up to scale recovered from the sine relations."""
        return SurfaceTensions(
            float(np.sin(self.alpha3)),
            float(np.sin(self.alpha2)),
            float(np.sin(self.alpha1)),
        )


def solve_angles(sig: SurfaceTensions) -> JunctionAngles:
    """Unique angle triple satisfying Young's law for the given tensions.

    Labels 1 and 2 are swapped when needed so that alpha2 >= alpha1; the
    swap is recorded on the result.
    """
    sig.validate()
    s12, s13, s23 = sig.sigma12, sig.sigma13, sig.sigma23

    def interior(a, b, c):
        # angle opposite side a in the triangle with sides (a, b, c)
        cosv = (b * b + c * c - a * a) / (2.0 * b * c)
        if not -1.0 < cosv < 1.0:
            raise ConfigurationError("degenerate tension triangle")
        return float(np.arccos(cosv))

    beta1 = interior(s23, s13, s12)
    beta2 = interior(s13, s23, s12)
    beta3 = interior(s12, s23, s13)
    alpha = [np.pi - beta1, np.pi - beta2, np.pi - beta3]
    swapped = alpha[1] < alpha[0]
    if swapped:
        alpha[0], alpha[1] = alpha[1], alpha[0]
    # renormalize the float sum exactly onto 2*pi
    alpha3 = TWO_PI - alpha[0] - alpha[1]
    return JunctionAngles(alpha[0], alpha[1], alpha3, swapped_12=swapped)


def canonical_labels(sig: SurfaceTensions, minima):
    """Relabel wells 1 and 2 together so that alpha2 >= alpha1.

    Returns (tensions, minima, angles); the returned angles carry
    ``swapped_12 = False`` relative to the returned labels.
    """
    angles = solve_angles(sig)
    if not angles.swapped_12:
        return sig, tuple(minima), angles
    minima = tuple(minima)
    relabeled = (minima[1], minima[0], minima[2])
    sig2 = sig.swapped_12()
    angles2 = JunctionAngles(angles.alpha1, angles.alpha2, angles.alpha3)
    return sig2, relabeled, angles2


@dataclass(frozen=True)
class TriodPartition:
    """Partition of the plane into three sectors meeting at the origin.

    Ray k separates two sectors; points exactly on a ray are classified
    into the lower sector index.  ``ray_12``/``ray_13``/``ray_23`` are the
    polar angles of the separating rays, and ``arcs`` maps each sector to
    its (start, end) arc on the unit circle (counterclockwise).
    """

    angles: JunctionAngles
    ray_12: float
    ray_13: float
    ray_23: float

    @property
    def arcs(self):
        return {
            1: (self.ray_12, self.ray_13),
            3: (self.ray_13, self.ray_23),
            2: (self.ray_23, self.ray_12 + TWO_PI),
        }

    def classify(self, z):
        """Sector index in {1, 2, 3} per point; rays go to the lower index."""
        z = np.asarray(z, dtype=float)
        theta = np.mod(np.arctan2(z[..., 1], z[..., 0]), TWO_PI)
        idx = np.full(theta.shape, 2, dtype=np.int8)
        in1 = (theta >= self.ray_12) & (theta <= self.ray_13)
        in3 = (theta > self.ray_13) & (theta < self.ray_23)
        idx[in1] = 1
        idx[in3] = 3
        return idx

    def on_ray(self, z):
        z = np.asarray(z, dtype=float)
        theta = np.mod(np.arctan2(z[..., 1], z[..., 0]), TWO_PI)
        origin = np.sum(z * z, axis=-1) == 0.0
        hit = np.zeros(theta.shape, dtype=bool)
        for ray in (self.ray_12, self.ray_13, self.ray_23):
            hit |= np.abs(theta - ray) <= _RAY_TOL
        return hit | origin

    def ray_normals(self):
        """Unit normals of the three rays, pointing toward decreasing theta."""
        out = {}
        for name, ray in (("12", self.ray_12), ("13", self.ray_13), ("23", self.ray_23)):
            out[name] = np.array([np.sin(ray), -np.cos(ray)])
        return out


def build_triod(angles: JunctionAngles) -> TriodPartition:
    """Partition with the third sector centered on the negative y-axis.

    The boundary rays sit where the boundary-data transitions are
    centered: theta = pi/2 + (alpha2 - alpha1)/2 between sectors 1 and 2,
    and 3*pi/2 -/+ alpha3/2 around sector 3.
    """
    ray_12 = 0.5 * np.pi + angles.half_diff
    ray_13 = 1.5 * np.pi - angles.half3
    ray_23 = 1.5 * np.pi + angles.half3
    return TriodPartition(angles=angles, ray_12=ray_12, ray_13=ray_13, ray_23=ray_23)


def sharp_map(triod: TriodPartition, p: Potential, z):
    """Piecewise-constant sector map z -> a_{sector(z)}.

    Returns (value, boundary_flag); the flag marks points on a triod ray
    or at the junction, where the returned value follows the lower-index
    ray convention.
    """
    z = np.asarray(z, dtype=float)
    idx = triod.classify(z)
    flag = triod.on_ray(z)
    values = p.minima_array[idx - 1]
    return values, flag


def random_angles(rng: np.random.Generator, margin: float = 0.05) -> JunctionAngles:
    """Random valid angle triple (sum 2*pi, each in (0, pi), alpha2 >= alpha1)."""
    while True:
        a1, a2 = rng.uniform(margin, np.pi - margin, size=2)
        a3 = TWO_PI - a1 - a2
        if margin < a3 < np.pi - margin:
            lo, hi = sorted((a1, a2))
            return JunctionAngles(lo, hi, a3)


def random_tensions(rng: np.random.Generator, margin: float = 0.05) -> SurfaceTensions:
    """Random tensions satisfying strict triangle inequalities.

    Generated from a valid angle triple through the sine relations and a
    random overall scale, so validity holds by construction.
    """
    angles = random_angles(rng, margin)
    scale = rng.uniform(0.5, 2.0)
    sig = angles.implied_tensions()
    return SurfaceTensions(
        scale * sig.sigma12, scale * sig.sigma13, scale * sig.sigma23
    )
