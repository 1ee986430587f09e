"""Built-in oscillatory systems.

* ``vdp``: the damped oscillator ``phi'' + phi = eps * g(phi, phi')`` in
  amplitude-phase variables ``x = (r, psi)`` with ``phi = r sin(t - psi)``,
  ``phi' = r cos(t - psi)``. Default damping ``g = -3 phi'``.
* ``bianchi3``: the LRS Bianchi III Einstein-Klein-Gordon system in
  Hubble-normalised variables ``x = (Sigma_+, Omega, psi)``.

Phases are kept unwrapped during integration.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._jit import is_jitted, njit
from .core import OscillatoryModel, SystemState
from .errors import AdmissibilityError

TWO_PI = 2.0 * math.pi


class AmplitudePhase(NamedTuple):
    r: float
    psi: float
    degenerate: bool


def wrap_phase(psi: float) -> float:
    """Reduce a phase to (-pi, pi]."""
    return math.pi - (math.pi - psi) % TWO_PI


def amplitude_phase_forward(phi: float, dphi: float, t: float) -> AmplitudePhase:
    """Map ``(phi, phi')`` at time ``t`` to amplitude and phase.

    A zero state has no defined phase; it is reported as ``(0, 0)`` with
    ``degenerate=True``.
    """
    r = math.hypot(phi, dphi)
    if r == 0.0:
        return AmplitudePhase(0.0, 0.0, True)
    theta = math.atan2(phi, dphi)
    return AmplitudePhase(r, wrap_phase(t - theta), False)


def amplitude_phase_inverse(r: float, psi: float, t: float):
    return r * math.sin(t - psi), r * math.cos(t - psi)


# ---------------------------------------------------------------- Van der Pol


@njit(cache=True)
def vdp_f1_kernel(x, t):
    th = t - x[1]
    c = math.cos(th)
    s = math.sin(th)
    out = np.empty(2)
    out[0] = -3.0 * x[0] * c * c
    out[1] = -3.0 * s * c
    return out


@njit(cache=True)
def vdp_average_kernel(z):
    out = np.empty(2)
    out[0] = -1.5 * z[0]
    out[1] = 0.0
    return out


@njit(cache=True)
def zero_f2(x, t):
    return 0.0


@lru_cache(maxsize=None)
def _constant_f2(value: float):
    if value == 0.0:
        return zero_f2

    @njit
    def f2(x, t):
        return value

    return f2


@lru_cache(maxsize=None)
def _damped_f1(damping: Callable):
    wrap = njit if is_jitted(damping) else (lambda f: f)

    @wrap
    def f1(x, t):
        th = t - x[1]
        c = math.cos(th)
        s = math.sin(th)
        r = x[0]
        g = damping(r * s, r * c)
        out = np.empty(2)
        out[0] = g * c
        out[1] = g * s / r
        return out

    return f1


def vdp_f1(x, t: float) -> np.ndarray:
    """Standard-form field of the default oscillator, ``(-3 r cos^2, -3 sin cos)`` at ``t - psi``."""
    x = np.asarray(x, dtype=np.float64)
    if x[0] < 0:
        raise AdmissibilityError("amplitude must be nonnegative")
    return vdp_f1_kernel(x, float(t))


def van_der_pol(damping: Optional[Callable] = None, decay: float = 0.0) -> OscillatoryModel:
    """Oscillator model in ``(r, psi)`` variables.

    ``damping(phi, dphi)`` replaces the default ``-3 dphi``; pass a numba
    function to keep integration compiled. ``decay`` sets ``f2 = -decay``:
    zero gives the classical constant-epsilon problem, a positive value a
    prescribed ``H' = -decay H^2`` decay of the perturbation parameter.
    """
    if decay < 0:
        raise ValueError("decay must be nonnegative")
    decay = float(decay)
    if damping is None:
        f1 = vdp_f1_kernel
        average = vdp_average_kernel

        def sup_bounds(lo, hi):
            r_max = max(abs(lo[0]), abs(hi[0]))
            return 3.0 * float(r_max) + 1.5, decay

    else:
        f1 = _damped_f1(damping)
        average = None
        sup_bounds = None

    return OscillatoryModel(
        name="vdp",
        dimension=2,
        period=TWO_PI,
        f1=f1,
        f2=_constant_f2(-decay),
        closed_form_average=average,
        sup_f2=decay,
        state_names=("r", "psi"),
        admissible=lambda x: bool(np.all(np.isfinite(x)) and x[0] >= 0),
        sup_bounds=sup_bounds,
        f2_is_zero=decay == 0.0,
        description="Damped harmonic oscillator in amplitude-phase form",
        params={"decay": decay},
    )


# ---------------------------------------------------------------- Bianchi III


@njit(cache=True)
def deceleration_kernel(x, t):
    c = math.cos(t - x[2])
    return 2.0 * x[0] * x[0] + x[1] * (3.0 * c * c - 1.0)


@njit(cache=True)
def bianchi_f1_kernel(x, t):
    sig = x[0]
    om = x[1]
    th = t - x[2]
    c = math.cos(th)
    s = math.sin(th)
    c2 = c * c
    q = 2.0 * sig * sig + om * (3.0 * c2 - 1.0)
    out = np.empty(3)
    out[0] = -(2.0 - q) * sig + 1.0 - sig * sig - om
    out[1] = 2.0 * om * (1.0 + q - 3.0 * c2)
    out[2] = -3.0 * s * c
    return out


@njit(cache=True)
def bianchi_f2_kernel(x, t):
    return -(1.0 + deceleration_kernel(x, t))


@njit(cache=True)
def bianchi_average_kernel(z):
    sig = z[0]
    om = z[1]
    qbar = 2.0 * sig * sig + 0.5 * om
    out = np.empty(3)
    out[0] = -(2.0 - qbar) * sig + 1.0 - sig * sig - om
    out[1] = 2.0 * om * (qbar - 0.5)
    out[2] = 0.0
    return out


def bianchi_admissible(x) -> bool:
    sig, om = float(x[0]), float(x[1])
    return (
        bool(np.all(np.isfinite(x)))
        and -1.0 < sig < 1.0
        and 0.0 < om < 1.0
        and 1.0 - sig * sig - om > 0.0
    )


def _check_bianchi(x):
    x = np.asarray(x, dtype=np.float64)
    if not bianchi_admissible(x):
        raise AdmissibilityError(
            f"Hamiltonian constraint violated at (Sigma+, Omega) = ({x[0]}, {x[1]})"
        )
    return x


def deceleration(x, t: float) -> float:
    """Deceleration parameter ``q = 2 Sigma^2 + Omega (3 cos^2(t - psi) - 1)``."""
    return float(deceleration_kernel(_check_bianchi(x), float(t)))


def bianchi_f1(x, t: float) -> np.ndarray:
    return bianchi_f1_kernel(_check_bianchi(x), float(t))


def bianchi_f2(x, t: float) -> float:
    return float(bianchi_f2_kernel(_check_bianchi(x), float(t)))


def bianchi3() -> OscillatoryModel:
    # On the admissible region q lies in (-1, 2), so |f2| < 3 and
    # |f1|_1 < 4 + 6 + 3/2.
    return OscillatoryModel(
        name="bianchi3",
        dimension=3,
        period=TWO_PI,
        f1=bianchi_f1_kernel,
        f2=bianchi_f2_kernel,
        closed_form_average=bianchi_average_kernel,
        sup_f1=11.5,
        sup_f2=3.0,
        state_names=("Sigma_plus", "Omega", "psi"),
        admissible=bianchi_admissible,
        description="LRS Bianchi III Einstein-Klein-Gordon, Hubble-normalised",
    )


# ---------------------------------------------------------------- trivial


@lru_cache(maxsize=None)
def _zero_f1(dimension: int):
    @njit
    def f1(x, t):
        return np.zeros(dimension)

    return f1


def zero_field(dimension: int = 1) -> OscillatoryModel:
    """``f1 = 0``, ``f2 = 0``: every state is an equilibrium."""
    f1 = _zero_f1(int(dimension))
    return OscillatoryModel(
        name="zero",
        dimension=int(dimension),
        period=TWO_PI,
        f1=f1,
        f2=zero_f2,
        closed_form_average=_zero_average(int(dimension)),
        sup_f1=0.0,
        sup_f2=0.0,
        lipschitz_f1=0.0,
        f2_is_zero=True,
        description="Zero vector field",
        params={"dimension": int(dimension)},
    )


@lru_cache(maxsize=None)
def _zero_average(dimension: int):
    @njit
    def fbar(z):
        return np.zeros(dimension)

    return fbar


# ---------------------------------------------------------------- registry

MODELS = {"vdp": van_der_pol, "bianchi3": bianchi3, "zero": zero_field}

DEFAULT_INITIAL_STATES = {
    "vdp": SystemState(H=0.1, x=[1.0, 0.0], t=0.0),
    "bianchi3": SystemState(H=1.0, x=[0.2, 0.5, 0.0], t=0.0),
    "zero": SystemState(H=1.0, x=[1.0], t=0.0),
}


def get_model(name: str, **params) -> OscillatoryModel:
    try:
        factory = MODELS[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; available: {sorted(MODELS)}") from None
    return factory(**params)


def closed_form_average(model: OscillatoryModel) -> Callable:
    """Analytic period average ``z -> fbar(z)`` of a built-in model's f1."""
    if model.closed_form_average is None:
        raise ValueError(f"model {model.name!r} has no closed-form average")
    return model.closed_form_average
