"""Truncated (frozen-H) and period-averaged systems built at a truncation time."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .core import OscillatoryModel, SystemState, Trajectory, sample_at
from .errors import QuadratureError
from .integrate import SystemRHS

RULES = ("composite_simpson", "gauss_legendre")
CONVERGENCE_TOL = 1e-8


@dataclass(frozen=True)
class QuadratureConfig:
    """``nodes`` counts subintervals for Simpson (must be even) and points for Gauss-Legendre."""

    rule: str = "composite_simpson"
    nodes: int = 256

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown quadrature rule {self.rule!r}; use one of {RULES}")
        if int(self.nodes) != self.nodes or self.nodes < 8:
            raise ValueError("nodes must be an integer >= 8")
        if self.rule == "composite_simpson" and self.nodes % 2:
            raise ValueError("composite Simpson needs an even number of subintervals")

    def doubled(self) -> "QuadratureConfig":
        return QuadratureConfig(self.rule, 2 * self.nodes)


def quadrature_rule(quad: QuadratureConfig, a: float, b: float):
    """Nodes and weights for the integral over ``[a, b]``."""
    if quad.rule == "composite_simpson":
        x = np.linspace(a, b, quad.nodes + 1)
        h = (b - a) / quad.nodes
        w = np.full(x.size, 2.0 * h / 3.0)
        w[1::2] = 4.0 * h / 3.0
        w[0] = w[-1] = h / 3.0
        return x, w
    y, w = np.polynomial.legendre.leggauss(quad.nodes)
    return 0.5 * (b - a) * y + 0.5 * (a + b), 0.5 * (b - a) * w


def average_params(model: OscillatoryModel, t_start: float, quad: QuadratureConfig) -> np.ndarray:
    x, w = quadrature_rule(quad, t_start, t_start + model.period)
    return np.concatenate((x, w / model.period))


def _average(model, z, t_start, quad):
    avg = kernels.quadrature_average(model.f1)
    return np.asarray(avg(z, average_params(model, t_start, quad)), dtype=np.float64)


def period_average(
    model: OscillatoryModel, z, t_start: float = 0.0, quad: QuadratureConfig = QuadratureConfig()
) -> np.ndarray:
    """``(1/T) * integral of f1(z, s) ds`` over ``[t_start, t_start + T]``.

    Raises :class:`QuadratureError` if doubling the node count moves the
    result by more than 1e-8.
    """
    z = np.asarray(z, dtype=np.float64)
    model.check_admissible(z)
    coarse = _average(model, z, t_start, quad)
    fine = _average(model, z, t_start, quad.doubled())
    diff = np.max(np.abs(fine - coarse))
    if not diff <= CONVERGENCE_TOL:
        raise QuadratureError(
            f"period average of {model.name!r} changed by {diff:.3g} under node doubling"
        )
    return coarse


@dataclass(frozen=True)
class TruncatedSystem:
    """``H`` frozen at ``H_star``; ``y' = H_star f1(y, t)`` keeps its oscillations."""

    model: OscillatoryModel
    H_star: float
    t_star: float

    @property
    def rhs(self) -> SystemRHS:
        return SystemRHS(kernels.truncated_rhs(self.model.f1))


@dataclass(frozen=True)
class AveragedSystem:
    """Autonomous ``z' = H_star fbar(z)``."""

    model: OscillatoryModel
    H_star: float
    t_star: float
    quad: QuadratureConfig = QuadratureConfig()
    use_closed_form: bool = True

    @property
    def closed_form(self) -> bool:
        return self.use_closed_form and self.model.closed_form_average is not None

    @property
    def rhs(self) -> SystemRHS:
        if self.closed_form:
            return SystemRHS(kernels.averaged_rhs(self.model.closed_form_average))
        return SystemRHS(
            kernels.quadrature_averaged_rhs(self.model.f1),
            average_params(self.model, self.t_star, self.quad),
        )

    def field(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        if self.closed_form:
            return np.asarray(self.model.closed_form_average(z), dtype=np.float64)
        return _average(self.model, z, self.t_star, self.quad)


def truncate_state(model: OscillatoryModel, state: SystemState):
    return TruncatedSystem(model, state.H, state.t), state


def build_truncated(model: OscillatoryModel, full_traj: Trajectory, t_star: float):
    """Truncated system and its initial state ``(H(t_star), x(t_star))``."""
    return truncate_state(model, sample_at(full_traj, t_star))


def average_state(
    model: OscillatoryModel,
    state: SystemState,
    quad: QuadratureConfig = QuadratureConfig(),
    use_closed_form: bool = True,
):
    system = AveragedSystem(model, state.H, state.t, quad, use_closed_form)
    if not system.closed_form:
        # convergence check once at the initial point; RHS calls use the configured rule
        period_average(model, state.x, state.t, quad)
    return system, state


def build_averaged(
    model: OscillatoryModel,
    full_traj: Trajectory,
    t_star: float,
    quad: QuadratureConfig = QuadratureConfig(),
    use_closed_form: bool = True,
):
    """Averaged system with ``z(t_star) = x(t_star)``."""
    return average_state(model, sample_at(full_traj, t_star), quad, use_closed_form)
