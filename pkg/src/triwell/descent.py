"""Monotone gradient descent with Barzilai-Borwein steps.

Every accepted step must decrease the objective (Armijo backtracking),
so the logged energy sequence is monotone by construction.  The BB step
is the fast path; when it is rejected repeatedly the routine falls back
to plain shrinking steps and finally reports a line-search stall.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ConvergenceLog:
    iterations: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    gradnorms: list = field(default_factory=list)

    def append(self, it, energy, step, gradnorm):
        self.iterations.append(int(it))
        self.energies.append(float(energy))
        self.steps.append(float(step))
        self.gradnorms.append(float(gradnorm))

    @property
    def final_energy(self) -> float:
        return self.energies[-1]

    def rows(self):
        return zip(self.iterations, self.energies, self.steps, self.gradnorms)


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    grad: np.ndarray
    log: ConvergenceLog
    status: str  # "gradient" | "stagnation" | "budget" | "linesearch"

    @property
    def grad_maxnorm(self) -> float:
        return float(np.abs(self.grad).max()) if self.grad.size else 0.0


def minimize_bb(
    x0,
    value_and_grad,
    *,
    max_iter=20000,
    grad_tol=0.0,
    stall_window=50,
    stall_rtol=1e-12,
    armijo=1e-4,
    max_backtracks=40,
) -> DescentResult:
    x = np.array(x0, dtype=float, copy=True)
    f, g = value_and_grad(x)
    log = ConvergenceLog()
    gmax = float(np.abs(g).max()) if g.size else 0.0
    log.append(0, f, 0.0, gmax)
    if gmax <= grad_tol:
        return DescentResult(x, f, g, log, "gradient")

    step = 1.0 / (np.linalg.norm(g) + 1.0)
    prev_x = prev_g = None
    stall_failures = 0
    status = "budget"

    for it in range(1, max_iter + 1):
        if prev_x is not None:
            s = x - prev_x
            y = g - prev_g
            sy = float(np.vdot(s, y))
            if sy > 0.0:
                step = float(np.vdot(s, s)) / sy
            else:
                step = 2.0 * step
        gg = float(np.vdot(g, g))
        t = step
        accepted = False
        for _ in range(max_backtracks):
            xn = x - t * g
            fn, gn = value_and_grad(xn)
            if fn <= f - armijo * t * gg:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stall_failures += 1
            if stall_failures >= 3:
                status = "linesearch"
                break
            step = t
            continue
        stall_failures = 0
        prev_x, prev_g = x, g
        x, f, g = xn, fn, gn
        step = t
        gmax = float(np.abs(g).max())
        log.append(it, f, t, gmax)
        if gmax <= grad_tol:
            status = "gradient"
            break
        k = len(log.energies)
        if k > stall_window:
            drop = log.energies[k - 1 - stall_window] - f
            if drop <= stall_rtol * max(abs(f), 1.0):
                status = "stagnation"
                break

    return DescentResult(x, f, g, log, status)
