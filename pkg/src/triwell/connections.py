"""Heteroclinic connections between wells and their surface tensions.

The 1D action  integral( |U'|^2 / 2 + W(U) )  is discretized on a
truncated line [-L, L] with trapezoid weights and hard-clamped endpoint
values, and minimized by monotone BB descent from the straight-segment
initialization.  Quadratic wells give exponential tails, so truncation
error is controllable; the reported action is Richardson-extrapolated
across node counts n and 2n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .descent import ConvergenceLog, minimize_bb
from .errors import ConvergenceFailureError, HypothesisViolationError
from .potential import Potential

RESTART_AGREEMENT_TOL = 1e-6

PAIRS = ((1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class HeteroclinicProfile:
    """A discrete connecting profile and its action."""

    pair: tuple
    eta_grid: np.ndarray
    values: np.ndarray  # (n, 2)
    action: float  # Richardson-extrapolated across n and 2n nodes
    action_coarse: float
    action_fine: float
    equipartition_residual: float
    truncation_length: float
    converged: bool
    restart_spread: float = 0.0

    def endpoint_errors(self, p: Potential):
        a_i = np.asarray(p.minima[self.pair[0] - 1])
        a_j = np.asarray(p.minima[self.pair[1] - 1])
        return (
            float(np.linalg.norm(self.values[0] - a_i)),
            float(np.linalg.norm(self.values[-1] - a_j)),
        )

    def to_csv(self, path):
        from .report import write_profile_csv

        write_profile_csv(self, path)


@dataclass(frozen=True)
class SurfaceTensions:
    """The three pair tensions sigma_ij with the triangle-inequality invariant."""

    sigma12: float
    sigma13: float
    sigma23: float

    def get(self, i, j) -> float:
        key = tuple(sorted((i, j)))
        return {(1, 2): self.sigma12, (1, 3): self.sigma13, (2, 3): self.sigma23}[key]

    def total(self) -> float:
        return self.sigma12 + self.sigma13 + self.sigma23

    def validate(self):
        """Raise if any strict triangle inequality fails, naming the pair."""
        sig = {(1, 2): self.sigma12, (1, 3): self.sigma13, (2, 3): self.sigma23}
        if min(sig.values()) <= 0.0:
            raise HypothesisViolationError("nonpositive surface tension")
        for (i, j) in PAIRS:
            k = 6 - i - j
            lhs = sig[tuple(sorted((i, j)))]
            rhs = sig[tuple(sorted((i, k)))] + sig[tuple(sorted((j, k)))]
            if not lhs < rhs:
                raise HypothesisViolationError(
                    f"triangle inequality fails for pair ({i},{j}): "
                    f"{lhs:.6g} >= {rhs:.6g}",
                    pair=(i, j),
                )

    def swapped_12(self) -> "SurfaceTensions":
        """Relabel wells 1 and 2 (sigma13 <-> sigma23)."""
        return SurfaceTensions(self.sigma12, self.sigma23, self.sigma13)

    def as_dict(self):
        return {
            "sigma12": self.sigma12,
            "sigma13": self.sigma13,
            "sigma23": self.sigma23,
        }


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _action_value_and_grad(p: Potential, h: float, weights: np.ndarray):
    """Discrete action and its gradient with clamped endpoints."""

    def value_and_grad(u):
        du = np.diff(u, axis=0)
        kinetic = float(np.sum(du * du)) / (2.0 * h)
        wvals = p.evaluate(u)
        potential_term = float(np.dot(weights, wvals))
        grad = np.zeros_like(u)
        grad[1:-1] = (2.0 * u[1:-1] - u[:-2] - u[2:]) / h
        grad += weights[:, None] * p.gradient(u)
        grad[0] = 0.0
        grad[-1] = 0.0
        return kinetic + potential_term, grad

    return value_and_grad


GRAD_TOL = 1e-7  # action is quadratically flat, so this is far below 1e-9 in action


def _descend(p, a_i, a_j, length, n, init, max_iter):
    eta = np.linspace(-length, length, n)
    h = eta[1] - eta[0]
    weights = _trapezoid_weights(n, h)
    vg = _action_value_and_grad(p, h, weights)
    u0 = init.copy()
    u0[0], u0[-1] = a_i, a_j
    res = minimize_bb(u0, vg, max_iter=max_iter, grad_tol=GRAD_TOL)
    return eta, h, weights, res


def _refine(eta_from, values, eta_to):
    out = np.empty((len(eta_to), 2))
    for c in range(2):
        out[:, c] = np.interp(eta_to, eta_from, values[:, c])
    return out


def _solve_pair(p, a_i, a_j, length, n, seed, restarts, max_iter):
    """Cascaded solves: linear init at a seed resolution, then warm-started
    refinements to n and 2n nodes.  Returns both refined results."""
    n_seed = max(200, n // 4)
    eta_s = np.linspace(-length, length, n_seed)
    t = (eta_s + length) / (2.0 * length)
    inits = [a_i + t[:, None] * (a_j - a_i)]
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        bump = np.sin(np.pi * t)[:, None] * rng.normal(scale=0.2, size=(1, 2))
        wiggle = np.sin(2.0 * np.pi * t)[:, None] * rng.normal(scale=0.1, size=(1, 2))
        inits.append(inits[0] + bump + wiggle)

    best = None
    actions_fine = []
    for u0 in inits:
        _, _, _, res_s = _descend(p, a_i, a_j, length, n_seed, u0, max_iter)
        eta_c = np.linspace(-length, length, n)
        eta_c, h_c, _, res_c = _descend(
            p, a_i, a_j, length, n, _refine(eta_s, res_s.x, eta_c), max_iter
        )
        eta_f = np.linspace(-length, length, 2 * n)
        eta_f, h_f, w_f, res_f = _descend(
            p, a_i, a_j, length, 2 * n, _refine(eta_c, res_c.x, eta_f), max_iter
        )
        actions_fine.append(res_f.value)
        if best is None or res_f.value < best[3].value:
            du = np.diff(res_f.x, axis=0)
            kinetic = float(np.sum(du * du)) / (2.0 * h_f)
            equip = kinetic - float(np.dot(w_f, p.evaluate(res_f.x)))
            best = (eta_f, h_f, res_c, res_f, h_c, equip)
    spread = float(max(actions_fine) - min(actions_fine)) if len(actions_fine) > 1 else 0.0
    return best + (spread,)


def compute_connection(
    p: Potential,
    i: int,
    j: int,
    length: float | None = None,
    n_nodes: int = 801,
    *,
    restarts: int = 0,
    seed: int = 0,
    max_iter: int = 60000,
) -> HeteroclinicProfile:
    """Minimize the discrete 1D action between wells i and j.

    ``length`` defaults to 12 / sqrt(c1) where c1 is the smallest Hessian
    eigenvalue at the minima; tails then decay below double precision
    relevance.  The profile is computed on n and 2n nodes and the action
    Richardson-extrapolated assuming second-order convergence.
    """
    if i == j:
        raise ValueError("need two distinct wells")
    if n_nodes < 200:
        raise ValueError("need at least 200 nodes")
    if length is None:
        length = 12.0 / np.sqrt(p.hessian_bounds[0])
    a_i = np.asarray(p.minima[i - 1], dtype=float)
    a_j = np.asarray(p.minima[j - 1], dtype=float)

    eta_f, h_f, res_c, res_f, h_c, equip_f, spread = _solve_pair(
        p, a_i, a_j, length, n_nodes, seed, restarts, max_iter
    )
    ok = res_c.status in ("gradient", "stagnation") and res_f.status in (
        "gradient",
        "stagnation",
    )
    if not ok:
        partial = HeteroclinicProfile(
            pair=(i, j),
            eta_grid=eta_f,
            values=res_f.x,
            action=res_f.value,
            action_coarse=res_c.value,
            action_fine=res_f.value,
            equipartition_residual=equip_f,
            truncation_length=float(length),
            converged=False,
            restart_spread=spread,
        )
        raise ConvergenceFailureError(
            f"connection ({i},{j}) did not converge", last=partial, log=res_f.log
        )
    if spread > RESTART_AGREEMENT_TOL:
        warnings.warn(
            f"connection ({i},{j}): restarts disagree by {spread:.3g}",
            stacklevel=2,
        )
    r2 = (h_c / h_f) ** 2
    action = res_f.value + (res_f.value - res_c.value) / (r2 - 1.0)
    return HeteroclinicProfile(
        pair=(i, j),
        eta_grid=eta_f,
        values=res_f.x,
        action=float(action),
        action_coarse=float(res_c.value),
        action_fine=float(res_f.value),
        equipartition_residual=float(equip_f),
        truncation_length=float(length),
        converged=True,
        restart_spread=spread,
    )


def assemble_tensions(p: Potential, profiles) -> SurfaceTensions:
    """Collect the three pair actions and enforce the triangle inequalities."""
    actions = {}
    for prof in profiles:
        actions[tuple(sorted(prof.pair))] = prof.action
    missing = [pair for pair in PAIRS if pair not in actions]
    if missing:
        raise ValueError(f"missing profiles for pairs {missing}")
    sig = SurfaceTensions(actions[(1, 2)], actions[(1, 3)], actions[(2, 3)])
    sig.validate()
    return sig


@dataclass
class EndpointPerturbationReport:
    """Constrained actions for endpoints perturbed onto delta-circles.

    ``min_ratio`` is the minimum over trials of (action - sigma) / delta^2;
    the quadratic-deficit constant ``fitted_c`` is its negative part.
    """

    pair: tuple
    delta: float
    sigma_ref: float
    actions: np.ndarray
    min_ratio: float
    fitted_c: float


def perturbed_endpoint_check(
    p: Potential,
    pair: tuple,
    delta: float,
    trials: int,
    delta_w: float,
    *,
    length: float | None = None,
    n_nodes: int = 601,
    seed: int = 0,
    max_iter: int = 60000,
) -> EndpointPerturbationReport:
    """Lower-bound check for connections with endpoints off the wells.

    For random endpoint pairs on the circles of radius delta around the
    two wells, minimizes the clamped-endpoint action and reports how far
    below sigma the constrained minimum can drop, normalized by delta^2.
    """
    if delta < 0.0:
        raise ValueError("delta must be nonnegative")
    if delta >= delta_w:
        raise ValueError(f"delta = {delta:g} must be below delta_w = {delta_w:g}")
    i, j = pair
    if length is None:
        length = 12.0 / np.sqrt(p.hessian_bounds[0])
    a_i = np.asarray(p.minima[i - 1], dtype=float)
    a_j = np.asarray(p.minima[j - 1], dtype=float)

    eta = np.linspace(-length, length, n_nodes)
    h = eta[1] - eta[0]
    weights = _trapezoid_weights(n_nodes, h)
    vg = _action_value_and_grad(p, h, weights)
    t = (eta + length) / (2.0 * length)

    base = compute_connection(
        p, i, j, length=length, n_nodes=n_nodes, seed=seed, max_iter=max_iter
    )
    sigma_ref = base.action_coarse  # same grid as the constrained solves

    rng = np.random.default_rng(seed)
    actions = np.empty(trials)
    for trial in range(trials):
        phi, psi = rng.uniform(0.0, 2.0 * np.pi, size=2)
        v_minus = a_i + delta * np.array([np.cos(phi), np.sin(phi)])
        v_plus = a_j + delta * np.array([np.cos(psi), np.sin(psi)])
        u0 = v_minus + t[:, None] * (v_plus - v_minus)
        res = minimize_bb(u0, vg, max_iter=max_iter, grad_tol=GRAD_TOL)
        if res.status not in ("gradient", "stagnation"):
            raise ConvergenceFailureError(
                f"constrained connection trial {trial} did not converge",
                last=res.x,
                log=res.log,
            )
        actions[trial] = res.value
    if delta == 0.0:
        ratios = np.zeros_like(actions)
    else:
        ratios = (actions - sigma_ref) / delta**2
    min_ratio = float(ratios.min())
    return EndpointPerturbationReport(
        pair=(i, j),
        delta=float(delta),
        sigma_ref=float(sigma_ref),
        actions=actions,
        min_ratio=min_ratio,
        fitted_c=max(0.0, -min_ratio),
    )
