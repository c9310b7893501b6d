"""Three-phase boundary trace on the unit circle.

The trace is piecewise in the polar angle: three flat arcs where it
equals a well exactly, glued by three transitions of angular width
2*c0*eps in which the value interpolates affinely between consecutive
wells through a monotone ramp g0 with g0(0) = 0, g0(1) = 1 and
|g0'| <= 2.  Going counterclockwise from theta = pi/2 + (alpha2-alpha1)/2
the transitions are (a2 -> a1), (a1 -> a3), (a3 -> a2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .junction import TWO_PI, JunctionAngles


def smoothstep(t):
    """Cubic ramp 3t^2 - 2t^3; max slope 1.5."""
    t = np.asarray(t, dtype=float)
    return t * t * (3.0 - 2.0 * t)


SMOOTHSTEP_MAX_SLOPE = 1.5


@dataclass(frozen=True)
class BoundaryTrace:
    """Boundary values g(theta) of the three-phase configuration at scale eps."""

    epsilon: float
    c0: float
    angles: JunctionAngles
    minima: np.ndarray  # (3, 2)
    g0: Callable
    g0_name: str = "smoothstep"
    g0_max_slope: float = SMOOTHSTEP_MAX_SLOPE

    @property
    def transition_centers(self):
        """Polar angles of the three transition midpoints (12, 13, 23)."""
        a = self.angles
        return (
            0.5 * np.pi + a.half_diff,
            1.5 * np.pi - a.half3,
            1.5 * np.pi + a.half3,
        )

    @property
    def arc_endpoints(self):
        """The six arc endpoints in increasing theta."""
        w = self.c0 * self.epsilon
        t1, t2, t3 = self.transition_centers
        return (t1 - w, t1 + w, t2 - w, t2 + w, t3 - w, t3 + w)

    @property
    def max_value_norm(self) -> float:
        """Uniform bound on |g|, independent of eps (convex-hull values)."""
        return float(np.linalg.norm(self.minima, axis=1).max())

    @property
    def lipschitz_bound(self) -> float:
        span = max(
            np.linalg.norm(self.minima[i] - self.minima[j])
            for i in range(3)
            for j in range(i + 1, 3)
        )
        return self.g0_max_slope * float(span) / (2.0 * self.c0 * self.epsilon)

    def __call__(self, theta):
        theta = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        scalar = theta.ndim == 0
        theta = np.atleast_1d(theta)
        w = self.c0 * self.epsilon
        t1, t2, t3 = self.transition_centers
        a1, a2, a3 = self.minima
        out = np.empty(theta.shape + (2,), dtype=float)
        out[:] = a2  # flat arc around theta = 0 / 2*pi

        flat1 = (theta >= t1 + w) & (theta < t2 - w)
        out[flat1] = a1
        flat3 = (theta >= t2 + w) & (theta < t3 - w)
        out[flat3] = a3

        for center, lo_val, hi_val in ((t1, a2, a1), (t2, a1, a3), (t3, a3, a2)):
            sel = (theta >= center - w) & (theta < center + w)
            if np.any(sel):
                s = self.g0((theta[sel] - (center - w)) / (2.0 * w))
                out[sel] = lo_val + s[:, None] * (hi_val - lo_val)
        return out[0] if scalar else out

    evaluate = __call__


def make_trace(
    angles: JunctionAngles,
    minima,
    epsilon: float,
    c0: float = 1.0,
    g0: Callable | None = None,
    g0_max_slope: float | None = None,
) -> BoundaryTrace:
    """Build the trace; errors if the six arcs would overlap."""
    if epsilon <= 0.0 or c0 <= 0.0:
        raise ConfigurationError("epsilon and c0 must be positive")
    minima = np.asarray(minima, dtype=float)
    if minima.shape != (3, 2):
        raise ConfigurationError("need exactly three 2D minima")
    w = c0 * epsilon
    smallest = min(angles.as_tuple)
    if w >= 0.5 * smallest:
        raise ConfigurationError(
            f"c0*eps = {w:g} leaves no room inside the smallest arc "
            f"(width {smallest:g}); shrink eps or c0"
        )
    trace = BoundaryTrace(
        epsilon=float(epsilon),
        c0=float(c0),
        angles=angles,
        minima=minima,
        g0=g0 or smoothstep,
        g0_name="smoothstep" if g0 is None else getattr(g0, "__name__", "custom"),
        g0_max_slope=SMOOTHSTEP_MAX_SLOPE if g0_max_slope is None else g0_max_slope,
    )
    ends = trace.arc_endpoints
    if not (0.0 < ends[0] and all(a < b for a, b in zip(ends, ends[1:])) and ends[-1] < TWO_PI):
        raise ConfigurationError("boundary arcs overlap or wrap; eps too large")
    return trace


def trace_samples(trace: BoundaryTrace, n: int):
    """Uniform theta samples merged with the six arc endpoints.

    ``n`` is the total sample count; n = 6 returns exactly the endpoints.
    """
    if n < 6:
        raise ValueError("need at least the six arc endpoints")
    endpoints = np.asarray(trace.arc_endpoints)
    uniform = np.linspace(0.0, TWO_PI, max(n - 6, 0), endpoint=False)
    thetas = np.unique(np.concatenate([endpoints, uniform]))
    return thetas, trace(thetas)


class _ConstantTrace:
    """Degenerate single-phase boundary used by tests and sanity runs."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)
        self.epsilon = None

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0:
            return self.value.copy()
        return np.broadcast_to(self.value, theta.shape + (2,)).copy()

    evaluate = __call__


def constant_trace(value) -> _ConstantTrace:
    return _ConstantTrace(value)
