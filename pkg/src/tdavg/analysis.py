"""Error measurement, Gronwall bounds, Lipschitz estimates and scaling fits."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .averaging import QuadratureConfig, average_state, truncate_state
from .core import OscillatoryModel, SystemState, Trajectory, sample_at
from .errors import DegenerateDataError, HypothesisViolation, OutOfRangeError
from .integrate import (
    IntegratorConfig,
    full_system,
    integrate,
    integrate_until_H,
    locate_H_crossing,
)

log = logging.getLogger(__name__)

EXPONENT_TOLERANCE = 0.15
MONOTONE_FACTOR = 1.2


@dataclass(frozen=True)
class ComparisonRun:
    """Full (x), truncated (y) and averaged (z) solutions from a shared state at ``t_star``.

    Error series are l1 distances of the oscillatory variables at ``times``.
    ``exited_at`` is set when a solution left the admissible region (or the
    full run hit ``H <= 0``); the series then stop at the last good sample.
    """

    t_star: float
    H_star: float
    gamma: float
    L: float
    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    H_full: np.ndarray
    error_xy: np.ndarray
    error_xz: np.ndarray
    error_yz: np.ndarray
    window_end: float
    exited_at: Optional[float] = None

    @property
    def sup_xy(self) -> float:
        return float(self.error_xy.max())

    @property
    def sup_xz(self) -> float:
        return float(self.error_xz.max())

    @property
    def sup_yz(self) -> float:
        return float(self.error_yz.max())

    def summary(self) -> dict:
        return {
            "t_star": self.t_star,
            "H_star": self.H_star,
            "gamma": self.gamma,
            "L": self.L,
            "window_end": self.window_end,
            "samples": int(self.times.size),
            "sup_err_xy": self.sup_xy,
            "sup_err_xz": self.sup_xz,
            "sup_err_yz": self.sup_yz,
            "exited_at": self.exited_at,
        }


def window_length(H_star: float, gamma: float, L: float) -> float:
    return L * H_star ** (-gamma)


def _run_window(
    model: OscillatoryModel,
    state: SystemState,
    window: float,
    gamma: float,
    L: float,
    integrator: IntegratorConfig,
    quad: QuadratureConfig,
    n_samples: int,
) -> ComparisonRun:
    t0 = state.t
    t1 = t0 + window
    times = np.linspace(t0, t1, n_samples)
    trunc, _ = truncate_state(model, state)
    avg, _ = average_state(model, state, quad)
    solutions = []
    for rhs in (full_system(model), trunc.rhs, avg.rhs):
        traj = integrate(rhs, state, t1, integrator, t_stops=times)
        solutions.append(traj)
    # a flagged full run (H <= 0) ends early; keep the samples it covers
    usable = min(int(np.searchsorted(times, tr.t_end, side="right")) for tr in solutions)
    exited_at = float(times[usable]) if usable < times.size else None
    packed = [tr.values(times[:usable]) for tr in solutions]
    for k in range(usable):
        if not all(model.admissible(p[k, 1:]) for p in packed):
            exited_at = float(times[k])
            usable = k
            break
    if exited_at is not None:
        log.warning("comparison window truncated at t=%.6g (left admissible region)", exited_at)
    if usable < 2:
        raise HypothesisViolation("solutions leave the admissible region immediately after t_star")
    times = times[:usable]
    xs, ys, zs = (p[:usable, 1:] for p in packed)
    return ComparisonRun(
        t_star=t0,
        H_star=state.H,
        gamma=gamma,
        L=L,
        times=times,
        x=xs,
        y=ys,
        z=zs,
        H_full=packed[0][:usable, 0],
        error_xy=np.abs(xs - ys).sum(axis=1),
        error_xz=np.abs(xs - zs).sum(axis=1),
        error_yz=np.abs(ys - zs).sum(axis=1),
        window_end=t1,
        exited_at=exited_at,
    )


def compare(
    model: OscillatoryModel,
    t_star: float,
    gamma: float = 0.5,
    L: float = 1.0,
    *,
    full: Optional[Trajectory] = None,
    initial_state: Optional[SystemState] = None,
    integrator: IntegratorConfig = IntegratorConfig(),
    quad: QuadratureConfig = QuadratureConfig(),
    n_samples: int = 201,
) -> ComparisonRun:
    """Compare x, y, z on ``[t_star, t_star + L * H(t_star)^-gamma]``.

    Supply the full trajectory through ``full`` or an ``initial_state`` to
    integrate from.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if not L > 0:
        raise ValueError("L must be positive")
    if n_samples < 200:
        raise ValueError("need at least 200 window samples")
    if full is None:
        if initial_state is None:
            raise ValueError("pass either the full trajectory or an initial state")
        if t_star == initial_state.t:
            state = initial_state
        else:
            full = integrate(full_system(model), initial_state, t_star, integrator)
            if not full.ok:
                raise HypothesisViolation(f"full run ended with status {full.status} before t_star")
    if full is not None:
        state = full[-1] if t_star == full.t_end else sample_at(full, t_star)
    window = window_length(state.H, gamma, L)
    return _run_window(model, state, window, gamma, L, integrator, quad, n_samples)


def compare_at_H(
    model: OscillatoryModel,
    initial_state: SystemState,
    H_target: float,
    gamma: float = 0.5,
    L: float = 1.0,
    *,
    full: Optional[Trajectory] = None,
    integrator: IntegratorConfig = IntegratorConfig(),
    quad: QuadratureConfig = QuadratureConfig(),
    n_samples: int = 201,
) -> ComparisonRun:
    """:func:`compare` at the time where H first equals ``H_target``."""
    if not H_target < initial_state.H:
        raise OutOfRangeError(f"H_target={H_target} must be below H(0)={initial_state.H}")
    if full is None:
        full = integrate_until_H(full_system(model), initial_state, H_target, integrator)
    t_star = locate_H_crossing(full, H_target)
    return compare(model, t_star, gamma, L, full=full, integrator=integrator, quad=quad, n_samples=n_samples)


# ------------------------------------------------------------------ Gronwall


@dataclass(frozen=True)
class GronwallBound:
    """``(dt^2 / 2) H_*^2 sup|f2| sup|f1| exp(H_* c_L dt)`` on ``||x - y||``."""

    H_star: float
    c_L: float
    sup_f1: float
    sup_f2: float

    def __post_init__(self):
        for name in ("H_star", "c_L", "sup_f1", "sup_f2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v}")

    def __call__(self, dt):
        dt = np.asarray(dt, dtype=np.float64)
        return (
            0.5 * dt * dt * self.H_star**2 * self.sup_f2 * self.sup_f1
            * np.exp(self.H_star * self.c_L * dt)
        )


@dataclass(frozen=True)
class GronwallReport:
    passed: bool
    max_ratio: float
    ratios: np.ndarray
    bound: GronwallBound
    violations: int = 0


def gronwall_check(run: ComparisonRun, bound: GronwallBound) -> GronwallReport:
    """Check ``error_xy(t) <= bound(t - t_star)`` at every window sample."""
    dt = run.times - run.t_star
    b = bound(dt)
    err = run.error_xy
    ratios = np.zeros_like(err)
    pos = b > 0
    ratios[pos] = err[pos] / b[pos]
    ratios[~pos & (err > 0)] = np.inf
    violations = int(np.count_nonzero(err > b))
    return GronwallReport(
        passed=violations == 0,
        max_ratio=float(ratios.max()),
        ratios=ratios,
        bound=bound,
        violations=violations,
    )


def run_region(run: ComparisonRun, pad: float = 1e-6):
    """Bounding box of the x and y samples of a run, padded so it has volume."""
    pts = np.vstack((run.x, run.y))
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    margin = pad * (1.0 + np.abs(pts).max(axis=0))
    return lo - margin, hi + margin


def analytic_bound(
    model: OscillatoryModel,
    run: ComparisonRun,
    c_L: Optional[float] = None,
    samples: int = 2000,
    seed: int = 0,
) -> GronwallBound:
    """Bound from the model's analytic sup norms on the visited region and a Lipschitz constant.

    ``c_L`` defaults to the model's known constant, else a sampled estimate.
    """
    lo, hi = run_region(run)
    sup_f1, sup_f2 = model.sup_norms(lo, hi)
    if sup_f1 is None or sup_f2 is None:
        raise ValueError(f"model {model.name!r} has no analytic sup bounds")
    if c_L is None:
        c_L = model.lipschitz_f1
    if c_L is None:
        c_L = estimate_lipschitz(model, (lo, hi), samples=samples, seed=seed)
    return GronwallBound(run.H_star, c_L, sup_f1, sup_f2)


def estimate_lipschitz(
    model: OscillatoryModel,
    region,
    samples: int = 2000,
    seed: int = 0,
    safety: float = 1.5,
) -> float:
    """Sampled Lipschitz constant of f1 in x (l1 norms) on a box, times ``safety``.

    Half the pairs are random points of the box; the rest are short steps
    along each coordinate axis, which resolve the l1 operator norm of the
    Jacobian (its largest column sum).
    """
    lo, hi = (np.asarray(v, dtype=np.float64).reshape(-1) for v in region)
    if lo.shape != (model.dimension,) or hi.shape != lo.shape:
        raise ValueError("region bounds must match the model dimension")
    width = hi - lo
    if not np.all(width > 0):
        raise DegenerateDataError("Lipschitz region has zero volume")
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    n = model.dimension
    m_far = max(1, samples // 2)
    m_near = max(1, samples - m_far)
    xa = lo + width * rng.random((m_far, n))
    xb = lo + width * rng.random((m_far, n))
    ta = model.period * rng.random(m_far)
    base = lo + width * rng.random((m_near, n))
    axis = rng.integers(0, n, m_near)
    step = 1e-6 * width[axis]
    near = base.copy()
    up = base[np.arange(m_near), axis] + step <= hi[axis]
    near[np.arange(m_near), axis] += np.where(up, step, -step)
    tb = model.period * rng.random(m_near)
    xa = np.vstack((xa, base))
    xb = np.vstack((xb, near))
    ts = np.concatenate((ta, tb))
    keep = np.array([model.admissible(a) and model.admissible(b) for a, b in zip(xa, xb)])
    if not np.any(keep):
        raise DegenerateDataError("no admissible sample pairs in the Lipschitz region")
    xa, xb, ts = (np.ascontiguousarray(a[keep]) for a in (xa, xb, ts))
    best = kernels.run_loop(kernels.secant_ratio_max, model.f1, xa, xb, ts)
    return safety * float(best)


# ------------------------------------------------------------------ scaling


def fit_scaling_exponent(points: Sequence) -> tuple:
    """Least-squares slope of log(error) against log(H_star).

    Returns ``(exponent, residual)``, residual being the largest absolute
    deviation from the fitted line in log space.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise DegenerateDataError("scaling fit needs at least 4 (H_star, error) points")
    if not np.all(pts > 0):
        raise DegenerateDataError("scaling fit needs positive H_star and error values")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = float(np.max(np.abs(ly - (slope * lx + intercept))))
    return float(slope), residual


def theoretical_exponent(gamma: float) -> float:
    return min(1.0, 2.0 - 2.0 * gamma)


@dataclass(frozen=True)
class ScalingReport:
    """Sup-window errors against ``H_star`` with the fitted power law."""

    samples: tuple
    fitted_exponent: float
    theoretical_exponent: float
    residual: float
    gamma: float
    L: float
    measure: str = "xz"
    tolerance: float = EXPONENT_TOLERANCE
    runs: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if len(self.samples) < 4:
            raise DegenerateDataError("a scaling report needs at least 4 samples")
        hs = [h for h, _ in self.samples]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("H_star values must be strictly decreasing")

    @property
    def passed(self) -> bool:
        return self.fitted_exponent >= self.theoretical_exponent - self.tolerance

    @property
    def monotone(self) -> bool:
        """Errors do not grow (beyond a factor 1.2) as H_star decreases."""
        errs = [e for _, e in self.samples]
        return all(b <= MONOTONE_FACTOR * a for a, b in zip(errs, errs[1:]))

    @classmethod
    def from_samples(cls, samples, theoretical, gamma, L, measure="xz", runs=()):
        samples = tuple((float(h), float(e)) for h, e in samples)
        exponent, residual = fit_scaling_exponent(samples)
        return cls(samples, exponent, theoretical, residual, gamma, L, measure, runs=tuple(runs))

    def summary(self) -> dict:
        return {
            "measure": self.measure,
            "gamma": self.gamma,
            "L": self.L,
            "fitted_exponent": self.fitted_exponent,
            "theoretical_exponent": self.theoretical_exponent,
            "tolerance": self.tolerance,
            "residual": self.residual,
            "monotone": self.monotone,
            "passed": self.passed,
        }


def _check_sweep(values, ceiling=None):
    values = [float(v) for v in values]
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError("H_star list must be strictly decreasing")
    if any(v <= 0 for v in values):
        raise ValueError("H_star values must be positive")
    if ceiling is not None and values and values[0] >= ceiling:
        raise OutOfRangeError(f"H_star values must lie below H(0)={ceiling}")
    return values


def scaling_experiment(
    model: OscillatoryModel,
    initial_state: SystemState,
    H_star_list: Sequence[float],
    gamma: float = 0.5,
    L: float = 1.0,
    *,
    integrator: IntegratorConfig = IntegratorConfig(),
    quad: QuadratureConfig = QuadratureConfig(),
    n_samples: int = 201,
) -> ScalingReport:
    """Sup-window ``||x - z||`` at each truncation level, fitted against ``H_star``."""
    values = _check_sweep(H_star_list, initial_state.H)
    if len(values) < 4:
        raise DegenerateDataError("scaling fit needs at least 4 H_star values")
    full = integrate_until_H(full_system(model), initial_state, values[-1], integrator)
    runs = []
    for H_target in values:
        t_star = locate_H_crossing(full, H_target)
        runs.append(
            compare(model, t_star, gamma, L, full=full, integrator=integrator, quad=quad, n_samples=n_samples)
        )
        log.info("H_star=%.4g t_star=%.6g sup|x-z|=%.6g", H_target, t_star, runs[-1].sup_xz)
    samples = [(H, r.sup_xz) for H, r in zip(values, runs)]
    return ScalingReport.from_samples(samples, theoretical_exponent(gamma), gamma, L, "xz", runs)


def averaging_scaling_experiment(
    model: OscillatoryModel,
    x0,
    eps_list: Sequence[float],
    L: float = 1.0,
    t0: float = 0.0,
    *,
    integrator: IntegratorConfig = IntegratorConfig(),
    quad: QuadratureConfig = QuadratureConfig(),
    n_samples: int = 201,
) -> ScalingReport:
    """Classical constant-epsilon averaging: sup ``||y - z||`` on ``[t0, t0 + L/eps]``."""
    values = _check_sweep(eps_list)
    runs = []
    for eps in values:
        state = SystemState(H=eps, x=x0, t=t0)
        runs.append(_run_window(model, state, L / eps, 1.0, L, integrator, quad, n_samples))
    samples = [(e, r.sup_yz) for e, r in zip(values, runs)]
    return ScalingReport.from_samples(samples, 1.0, 1.0, L, "yz", runs)
