"""State, trajectory, norm and model-interface types shared by all modules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._jit import njit
from .errors import EvaluationError, OutOfRangeError


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemState:
    """The pair ``(H, x)`` at time ``t``."""

    H: float
    x: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "H", float(self.H))
        object.__setattr__(self, "t", float(self.t))
        x = _frozen(self.x)
        if x.size < 1:
            raise ValueError("state vector x must have at least one component")
        object.__setattr__(self, "x", x)

    @property
    def dimension(self) -> int:
        return self.x.size

    def packed(self) -> np.ndarray:
        """Flat vector ``[H, x_1, ..., x_n]`` as used by the integrators."""
        return np.concatenate(([self.H], self.x))

    @classmethod
    def from_packed(cls, s, t: float) -> "SystemState":
        s = np.asarray(s, dtype=np.float64)
        return cls(H=s[0], x=s[1:], t=t)

    def __eq__(self, other):
        if not isinstance(other, SystemState):
            return NotImplemented
        return self.H == other.H and self.t == other.t and np.array_equal(self.x, other.x)

    __hash__ = None


def _always_admissible(x) -> bool:
    return True


@dataclass(frozen=True)
class OscillatoryModel:
    """A system ``H' = H^2 f2(x, t)``, ``x' = H f1(x, t)`` with T-periodic f1, f2.

    ``f1(x, t)`` returns an n-vector, ``f2(x, t)`` a float. When numba is
    active and both are numba dispatchers, integration runs fully compiled;
    plain Python callables are accepted and use the interpreted path.
    ``sup_bounds(lo, hi)`` optionally returns analytic ``(sup|f1|, sup|f2|)``
    over the box ``[lo, hi]``; it takes precedence over the constant
    ``sup_f1``/``sup_f2``.
    """

    name: str
    dimension: int
    period: float
    f1: Callable
    f2: Callable
    closed_form_average: Optional[Callable] = None
    sup_f1: Optional[float] = None
    sup_f2: Optional[float] = None
    lipschitz_f1: Optional[float] = None
    state_names: Sequence[str] = ()
    admissible: Callable = _always_admissible
    sup_bounds: Optional[Callable] = None
    f2_is_zero: bool = False
    description: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not self.state_names:
            names = tuple(f"x{i}" for i in range(self.dimension))
            object.__setattr__(self, "state_names", names)
        elif len(self.state_names) != self.dimension:
            raise ValueError("state_names must have one entry per component")
        else:
            object.__setattr__(self, "state_names", tuple(self.state_names))

    def sup_norms(self, lo=None, hi=None):
        """Analytic bounds ``(||f1||_inf, ||f2||_inf)`` on the box, or the stored constants."""
        if self.sup_bounds is not None and lo is not None:
            return self.sup_bounds(np.asarray(lo, float), np.asarray(hi, float))
        return self.sup_f1, self.sup_f2

    def check_admissible(self, x) -> None:
        from .errors import AdmissibilityError

        if not self.admissible(np.asarray(x, dtype=np.float64)):
            raise AdmissibilityError(f"state {np.asarray(x).tolist()} outside admissible region of {self.name!r}")


def eval_full_rhs(model: OscillatoryModel, s: SystemState):
    """Right-hand side of the full system: ``(H^2 f2(x, t), H f1(x, t))``."""
    if not s.H > 0:
        raise ValueError(f"H must be positive, got {s.H}")
    x = np.array(s.x)
    v1 = np.asarray(model.f1(x, s.t), dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(v1))
    if bad.size:
        raise EvaluationError(
            f"f1 of {model.name!r} is non-finite in component(s) "
            f"{[model.state_names[i] for i in bad]} at t={s.t}"
        )
    v2 = float(model.f2(x, s.t))
    if not np.isfinite(v2):
        raise EvaluationError(f"f2 of {model.name!r} is non-finite at t={s.t}")
    return s.H * s.H * v2, s.H * v1


@njit(cache=True)
def l1_kernel(u):
    acc = 0.0
    for i in range(u.shape[0]):
        acc += abs(u[i])
    return acc


def l1_norm(u) -> float:
    """Discrete l1 norm, sum of absolute values."""
    return float(np.sum(np.abs(np.asarray(u, dtype=np.float64))))


def hermite(t0, t1, y0, y1, d0, d1, t):
    """Cubic Hermite interpolant on [t0, t1]; works elementwise on broadcastable arrays."""
    h = t1 - t0
    u = (t - t0) / h
    u2 = u * u
    u3 = u2 * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = u3 - 2 * u2 + u
    h01 = -2 * u3 + 3 * u2
    h11 = u3 - u2
    return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1


class Trajectory:
    """Time-ordered samples of the packed state ``[H, x]`` with stored derivatives.

    Values between samples come from cubic Hermite interpolation using the
    stored right-hand side values; at sample times the stored values are
    returned unchanged.
    """

    def __init__(self, t, s, ds, status: str = "ok"):
        t = np.array(t, dtype=np.float64)
        s = np.array(s, dtype=np.float64)
        ds = np.array(ds, dtype=np.float64)
        if t.ndim != 1 or s.ndim != 2 or s.shape != ds.shape or s.shape[0] != t.size:
            raise ValueError("inconsistent trajectory array shapes")
        if t.size == 0:
            raise ValueError("empty trajectory")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("sample times must be strictly increasing")
        for a in (t, s, ds):
            a.setflags(write=False)
        self.t = t
        self.s = s
        self.ds = ds
        self.status = status

    def __len__(self):
        return self.t.size

    def __getitem__(self, i) -> SystemState:
        return SystemState.from_packed(self.s[i], self.t[i])

    @property
    def samples(self):
        return [self[i] for i in range(len(self))]

    @property
    def H(self) -> np.ndarray:
        return self.s[:, 0]

    @property
    def x(self) -> np.ndarray:
        return self.s[:, 1:]

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def values(self, times) -> np.ndarray:
        """Packed states at ``times`` (array), shape ``(len(times), n + 1)``."""
        times = np.atleast_1d(np.asarray(times, dtype=np.float64))
        if times.size and (times.min() < self.t[0] or times.max() > self.t[-1]):
            raise OutOfRangeError(
                f"requested time outside trajectory range [{self.t[0]}, {self.t[-1]}]"
            )
        out = np.empty((times.size, self.s.shape[1]))
        idx = np.searchsorted(self.t, times, side="left")
        exact = (idx < self.t.size) & (self.t[np.minimum(idx, self.t.size - 1)] == times)
        out[exact] = self.s[idx[exact]]
        rest = ~exact
        if np.any(rest):
            k = idx[rest]
            lo = k - 1
            out[rest] = hermite(
                self.t[lo, None],
                self.t[k, None],
                self.s[lo],
                self.s[k],
                self.ds[lo],
                self.ds[k],
                times[rest, None],
            )
        return out

    def concat(self, other: "Trajectory") -> "Trajectory":
        """Join a continuation that starts at this trajectory's last sample."""
        if other.t[0] != self.t[-1]:
            raise ValueError("continuation must start at the last sample time")
        return Trajectory(
            np.concatenate((self.t, other.t[1:])),
            np.concatenate((self.s, other.s[1:])),
            np.concatenate((self.ds, other.ds[1:])),
            other.status,
        )


def sample_at(traj: Trajectory, t: float) -> SystemState:
    """State at time ``t``; raises :class:`OutOfRangeError` outside the sampled range."""
    return SystemState.from_packed(traj.values([t])[0], t)
