"""Explicit Runge-Kutta integration with dense output and H-crossing location."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .core import OscillatoryModel, SystemState, Trajectory, hermite
from .errors import HypothesisViolation, IntegrationError, OutOfRangeError

log = logging.getLogger(__name__)

METHODS = ("fixed_rk4", "adaptive_embedded_45")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "adaptive_embedded_45"
    step: float = 0.01
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown integration method {self.method!r}; use one of {METHODS}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not 1e-14 <= v <= 1e-2:
                raise ValueError(f"{name}={v} outside [1e-14, 1e-2]")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError("max_steps must be a positive integer")


@dataclass(frozen=True)
class SystemRHS:
    """A kernel ``f(t, s, p)`` on packed states bound to its parameter vector."""

    kernel: Callable
    params: np.ndarray = np.empty(0)

    def __call__(self, t, s):
        return self.kernel(float(t), np.asarray(s, dtype=np.float64), self.params)


def full_system(model: OscillatoryModel) -> SystemRHS:
    """Right-hand side of ``H' = H^2 f2``, ``x' = H f1``."""
    return SystemRHS(kernels.full_rhs(model.f1, model.f2))


def _as_system_rhs(rhs) -> SystemRHS:
    if isinstance(rhs, SystemRHS):
        return rhs

    def kernel(t, s, p):
        return np.asarray(rhs(t, s), dtype=np.float64)

    return SystemRHS(kernel)


def integrate(
    rhs,
    s0: SystemState,
    t_end: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    t_stops=None,
    require_positive_H: bool = True,
) -> Trajectory:
    """Integrate the packed system from ``s0`` to ``t_end``.

    ``rhs`` is a :class:`SystemRHS` or any callable ``rhs(t, s) -> ds``.
    ``t_stops`` are extra times the integrator must land on exactly.

    Reaching ``H <= 0`` ends the run early and returns the partial trajectory
    with ``status == "H_nonpositive"``; other failures raise
    :class:`IntegrationError` carrying the partial trajectory.
    """
    if not t_end > s0.t:
        raise ValueError(f"t_end={t_end} must exceed the initial time {s0.t}")
    system = _as_system_rhs(rhs)
    y0 = s0.packed()
    stops = np.array([t_end], dtype=np.float64)
    if t_stops is not None:
        extra = np.asarray(t_stops, dtype=np.float64)
        extra = extra[(extra > s0.t) & (extra < t_end)]
        stops = np.unique(np.concatenate((extra, stops)))
    if cfg.method == "adaptive_embedded_45":
        out = kernels.run_loop(
            kernels.dopri_loop, system.kernel, system.params, s0.t, y0, stops,
            cfg.abs_tol, cfg.rel_tol, int(cfg.max_steps), require_positive_H,
        )
    else:
        out = kernels.run_loop(
            kernels.rk4_loop, system.kernel, system.params, s0.t, y0, stops,
            cfg.step, int(cfg.max_steps), require_positive_H,
        )
    ts, ys, fs, m, status = out
    name = kernels.STATUS_NAMES[int(status)]
    traj = Trajectory(ts[:m], ys[:m], fs[:m], status=name)
    if status == kernels.STATUS_H_NONPOSITIVE:
        log.warning("H reached zero near t=%.6g; run flagged and truncated", traj.t_end)
        return traj
    if status != kernels.STATUS_OK:
        raise IntegrationError(
            name, f"integration failed ({name}) at t={traj.t_end:.17g}", partial=traj
        )
    return traj


def integrate_until_H(
    rhs,
    s0: SystemState,
    H_target: float,
    cfg: IntegratorConfig = IntegratorConfig(),
    chunk: float = 10.0,
    t_max: float = 1e6,
) -> Trajectory:
    """Integrate in growing chunks until ``H`` drops below ``H_target``."""
    traj = integrate(rhs, s0, s0.t + chunk, cfg)
    while traj.ok and traj.H[-1] > H_target:
        if not np.all(np.diff(traj.H) < 0):
            raise HypothesisViolation("H is not strictly decreasing along the full solution")
        if traj.t_end - s0.t > t_max:
            raise HypothesisViolation(
                f"H={traj.H[-1]:.6g} still above target {H_target} at t={traj.t_end:.6g}"
            )
        chunk *= 2.0
        traj = traj.concat(integrate(rhs, traj[-1], traj.t_end + chunk, cfg))
    if not traj.ok:
        raise HypothesisViolation(f"run ended with status {traj.status} before reaching H={H_target}")
    return traj


def locate_H_crossing(traj: Trajectory, H_target: float, max_iter: int = 40) -> float:
    """Time at which the interpolated H channel equals ``H_target``.

    Requires strictly decreasing H samples. Bisection on the Hermite
    interpolant within the bracketing sample interval.
    """
    H = traj.H
    if H.size > 1 and not np.all(np.diff(H) < 0):
        raise HypothesisViolation("H samples are not strictly decreasing")
    if not H[-1] <= H_target <= H[0]:
        raise OutOfRangeError(
            f"H_target={H_target} outside trajectory range [{H[-1]}, {H[0]}]"
        )
    exact = np.flatnonzero(H == H_target)
    if exact.size:
        return float(traj.t[exact[0]])
    # H decreasing: first index with H < target
    k = int(np.searchsorted(-H, -H_target, side="right"))
    lo, hi = float(traj.t[k - 1]), float(traj.t[k])
    args = (traj.t[k - 1], traj.t[k], traj.s[k - 1, 0], traj.s[k, 0], traj.ds[k - 1, 0], traj.ds[k, 0])
    tol = 1e-10 * H_target
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        val = hermite(*args, mid)
        if abs(val - H_target) <= tol:
            return mid
        if val > H_target:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(hermite(*args, mid) - H_target) > tol:
        raise OutOfRangeError(f"bisection did not reach tolerance for H_target={H_target}")
    return mid
