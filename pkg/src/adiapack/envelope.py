"""The scale-free envelope profile equation.

Solves

    i ∂_t u + ½ ∂_y² u = ½ λ''(x(t)) y² u + Λ |u|² u,   u(0) = a,

on a fixed y-grid that does not depend on the semiclassical parameter.  The
splitting is symmetric second order: a half step of the potential-plus-cubic
phase (exact pointwise, since |u| is invariant under that flow), a full
kinetic step (exact Fourier multiplier), and another half phase.  The
time-dependent curvature is evaluated at the step midpoint.

Mass ‖u(t)‖ is conserved to roundoff by construction; a drift beyond 1e-8
signals under-resolution and aborts the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverAbort
from .grids import SpatialGrid, l2_norm, _derivative_values

__all__ = ["EnvelopeState", "EnvelopeStepper", "solve_envelope", "envelope_moments"]

_MASS_TOL = 1e-8
_EDGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EnvelopeState:
    y_grid: SpatialGrid
    values: np.ndarray
    time: float
    lambda_coupling: float
    mass0: float


class EnvelopeStepper:
    """Marches the profile equation with symmetric splitting at a fixed dt."""

    def __init__(self, y_grid: SpatialGrid, a_values: np.ndarray,
                 lambda_coupling: float, curvature_fn):
        self.y_grid = y_grid
        self.values = np.asarray(a_values, dtype=complex).copy()
        self.lambda_coupling = float(lambda_coupling)
        self.curvature_fn = curvature_fn
        self.time = 0.0
        self.mass0 = l2_norm(y_grid, self.values)
        self._half_y2 = 0.5 * y_grid.points**2
        self._kin_cache = {}

    def _kinetic(self, dt):
        mult = self._kin_cache.get(dt)
        if mult is None:
            mult = np.exp(-0.5j * self.y_grid.frequencies**2 * dt)
            self._kin_cache[dt] = mult
        return mult

    def _phase(self, dt, curv):
        pot = curv * self._half_y2 + self.lambda_coupling * np.abs(self.values) ** 2
        self.values *= np.exp(-1j * dt * pot)

    def advance(self, dt: float):
        curv = float(self.curvature_fn(self.time + 0.5 * dt))
        self._phase(0.5 * dt, curv)
        self.values = np.fft.ifft(self._kinetic(dt) * np.fft.fft(self.values))
        self._phase(0.5 * dt, curv)
        self.time += dt
        mass = l2_norm(self.y_grid, self.values)
        if abs(mass - self.mass0) > _MASS_TOL * max(1.0, self.mass0):
            raise SolverAbort(
                f"envelope mass drift {abs(mass - self.mass0):.3e} at t = {self.time}"
            )
        edge = max(abs(self.values[0]), abs(self.values[-1]))
        if edge > 1e-8 * max(1.0, self.mass0):
            raise SolverAbort(
                f"envelope reached the y-domain edge ({edge:.2e} at t = {self.time})"
            )

    def state(self) -> EnvelopeState:
        return EnvelopeState(y_grid=self.y_grid, values=self.values.copy(),
                             time=self.time, lambda_coupling=self.lambda_coupling,
                             mass0=self.mass0)


def solve_envelope(a, traj, lambda_coupling: float, y_grid: SpatialGrid,
                   dt: float, store_times=None) -> list:
    """Propagate the profile from u(0) = a along the trajectory's curvature.

    `a` is an evaluator a(y); `traj` provides λ''(x(t)) (a ClassicalTrajectory
    or any object with a `curvature_of` interpolant).  Returns the states at
    `store_times` (default: the trajectory sample times), which must be
    multiples of dt.
    """
    curvature_fn = traj.curvature_of if hasattr(traj, "curvature_of") else traj
    if store_times is None:
        store_times = traj.times
    store_times = np.asarray(store_times, dtype=float)
    a_values = np.asarray(a(y_grid.points), dtype=complex)
    edge = max(abs(a_values[0]), abs(a_values[-1]))
    if edge > 1e-12:
        raise ValueError(f"initial profile does not decay at the y-domain edge ({edge:.2e})")

    stepper = EnvelopeStepper(y_grid, a_values, lambda_coupling, curvature_fn)
    steps = np.rint(store_times / dt).astype(int)
    if np.max(np.abs(steps * dt - store_times)) > 1e-9:
        raise ValueError("store_times must be multiples of dt")
    out = []
    done = 0
    for target in steps:
        while done < target:
            stepper.advance(dt)
            done += 1
        out.append(stepper.state())
    return out


def envelope_moments(state: EnvelopeState, k: int, p: int) -> float:
    """Weighted derivative norm ‖⟨y⟩^k ∂_y^p u‖ (spectral derivative, k+p ≤ 4)."""
    if k + p > 4:
        raise ValueError("moments are tracked only for k + p <= 4")
    vals = state.values
    if p > 0:
        vals = _derivative_values(state.y_grid, vals, p)
    w = np.hypot(1.0, state.y_grid.points) ** k
    return l2_norm(state.y_grid, w * vals)
