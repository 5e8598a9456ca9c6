"""Classical Hamiltonian trajectories on an eigenvalue branch.

Integrates

    ẋ = ξ,   ξ̇ = -λ'(x),   Ṡ = ξ²/2 - λ(x)

with the classic fourth-order one-step scheme at fixed dt, so trajectory
samples line up exactly with PDE solver steps.  The curvature λ''(x(t)) is
sampled along the path for the envelope equation, and the conserved energy
E = ξ²/2 + λ(x) is tracked as a drift diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import SolverAbort
from .expressions import Expr

__all__ = ["BranchCurve", "ClassicalTrajectory", "integrate_trajectory",
           "action_of", "energy_of"]

_BLOWUP = 1e8
_FD_STEP = 1e-5


class BranchCurve:
    """Bundle of λ, λ', λ'' evaluators for one eigenvalue branch."""

    def __init__(self, value, deriv, curvature):
        self.value = value
        self.deriv = deriv
        self.curvature = curvature

    @classmethod
    def from_expr(cls, expr: Expr) -> "BranchCurve":
        d1 = expr.diff()
        d2 = d1.diff()
        return cls(expr, d1, d2)

    @classmethod
    def from_data(cls, data, j: int) -> "BranchCurve":
        """Branch evaluators from decomposed grid samples.

        λ is the cubic interpolant of the tracked branch; λ' and λ'' are
        central differences of that interpolant at step 1e-5.
        """
        spline = CubicSpline(data.grid.points, data.branches[j])
        h = _FD_STEP

        def deriv(x):
            return (spline(x + h) - spline(x - h)) / (2.0 * h)

        def curvature(x):
            return (spline(x + h) - 2.0 * spline(x) + spline(x - h)) / h**2

        return cls(spline, deriv, curvature)


@dataclass(frozen=True, eq=False)
class ClassicalTrajectory:
    """Time samples of (x, ξ, S) plus the branch values and curvature along the path."""

    times: np.ndarray = field(repr=False)
    x: np.ndarray = field(repr=False)
    xi: np.ndarray = field(repr=False)
    action: np.ndarray = field(repr=False)
    lam: np.ndarray = field(repr=False)
    curvature: np.ndarray = field(repr=False)
    branch: int
    energy0: float
    energy_drift: float

    @cached_property
    def x_of(self):
        return CubicSpline(self.times, self.x)

    @cached_property
    def xi_of(self):
        return CubicSpline(self.times, self.xi)

    @cached_property
    def action_of(self):
        return CubicSpline(self.times, self.action)

    @cached_property
    def curvature_of(self):
        return CubicSpline(self.times, self.curvature)


def integrate_trajectory(branch: BranchCurve, x0: float, xi0: float, T: float,
                         dt: float, branch_id: int = 0) -> ClassicalTrajectory:
    """Fourth-order fixed-step integration of the branch Hamiltonian flow.

    The action is accumulated through the same integrator stages, so S(t) is
    fourth-order accurate as well.  Aborts if |x| or |ξ| exceeds 1e8.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-12 * max(1.0, abs(T)):
        raise ValueError("T must be an integer multiple of dt")

    def rhs(state):
        x, xi, _ = state
        return np.array([xi, -branch.deriv(x), 0.5 * xi * xi - branch.value(x)])

    out = np.empty((n_steps + 1, 3))
    out[0] = (x0, xi0, 0.0)
    state = out[0].copy()
    for i in range(n_steps):
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * dt * k1)
        k3 = rhs(state + 0.5 * dt * k2)
        k4 = rhs(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if abs(state[0]) > _BLOWUP or abs(state[1]) > _BLOWUP:
            raise SolverAbort(
                f"trajectory blow-up at t = {(i + 1) * dt}: "
                f"x = {state[0]:.3e}, xi = {state[1]:.3e}"
            )
        out[i + 1] = state

    times = dt * np.arange(n_steps + 1)
    xs, xis, actions = out[:, 0], out[:, 1], out[:, 2]
    lam = np.asarray(branch.value(xs), dtype=float)
    curv = np.asarray(branch.curvature(xs), dtype=float)
    energy0 = 0.5 * xi0 * xi0 + float(branch.value(x0))
    drift = float(np.max(np.abs(0.5 * xis**2 + lam - energy0)))
    return ClassicalTrajectory(times=times, x=xs, xi=xis, action=actions,
                               lam=lam, curvature=curv, branch=branch_id,
                               energy0=energy0, energy_drift=drift)


def action_of(traj: ClassicalTrajectory) -> np.ndarray:
    """S(t) at every trajectory sample (S(0) = 0)."""
    return traj.action


def energy_of(traj: ClassicalTrajectory, t_index: int) -> float:
    return float(0.5 * traj.xi[t_index] ** 2 + traj.lam[t_index])
