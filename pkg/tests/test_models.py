import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from tdavg._jit import njit
from tdavg.core import SystemState
from tdavg.errors import AdmissibilityError
from tdavg.integrate import IntegratorConfig, full_system, integrate
from tdavg.models import (
    amplitude_phase_forward,
    amplitude_phase_inverse,
    bianchi_admissible,
    bianchi_f1,
    bianchi_f2,
    closed_form_average,
    deceleration,
    get_model,
    van_der_pol,
    vdp_f1,
)

from conftest import random_bianchi_points


def test_forward_examples():
    r, psi, deg = amplitude_phase_forward(0.0, 1.0, 0.0)
    assert (r, psi, deg) == (1.0, 0.0, False)
    assert amplitude_phase_forward(0.0, 0.0, 3.0) == (0.0, 0.0, True)
    r, psi, _ = amplitude_phase_forward(1.0, 0.0, math.pi / 2)
    assert r == 1.0 and abs(psi) < 1e-15


def test_forward_phase_range():
    for t in np.linspace(-20, 20, 101):
        _, psi, _ = amplitude_phase_forward(0.3, -0.2, t)
        assert -math.pi < psi <= math.pi


def test_inverse_examples():
    phi, dphi = amplitude_phase_inverse(1.0, 0.0, 0.0)
    assert phi == 0.0 and dphi == 1.0
    assert amplitude_phase_inverse(0.0, 2.3, -1.0) == (0.0, 0.0)
    r, psi, _ = amplitude_phase_forward(0.3, -0.4, 1.7)
    phi, dphi = amplitude_phase_inverse(r, psi, 1.7)
    assert abs(phi - 0.3) < 1e-12 and abs(dphi + 0.4) < 1e-12


coord = st.floats(-1e3, 1e3, allow_nan=False).filter(lambda v: abs(v) > 1e-6)


@given(coord, coord, st.floats(-100, 100))
def test_amplitude_phase_round_trip(phi, dphi, t):
    r, psi, _ = amplitude_phase_forward(phi, dphi, t)
    p2, d2 = amplitude_phase_inverse(r, psi, t)
    scale = max(1.0, r)
    assert abs(p2 - phi) <= 1e-12 * scale
    assert abs(d2 - dphi) <= 1e-12 * scale


def test_vdp_f1_examples():
    np.testing.assert_allclose(vdp_f1([2.0, 0.0], math.pi / 2), [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(vdp_f1([1.0, 0.5], 0.5), [-3.0, 0.0], atol=1e-15)
    avg = quad(lambda t: vdp_f1([1.7, 0.3], t)[0], 0, 2 * math.pi, epsabs=1e-13)[0] / (2 * math.pi)
    assert avg == pytest.approx(-1.5 * 1.7, abs=1e-12)


def test_vdp_reduction_matches_second_order_oscillator():
    # phi'' + phi = -3 eps phi', integrated directly, against (r, psi) from the standard form
    eps, t_end = 0.05, 2 * math.pi
    phi0, dphi0 = 0.6, 0.8
    ref = solve_ivp(
        lambda t, u: [u[1], -u[0] - 3 * eps * u[1]],
        (0, t_end), [phi0, dphi0], method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True,
    )
    r0, psi0, _ = amplitude_phase_forward(phi0, dphi0, 0.0)
    cfg = IntegratorConfig(abs_tol=1e-11, rel_tol=1e-11)
    times = np.linspace(0, t_end, 25)
    traj = integrate(full_system(van_der_pol()), SystemState(H=eps, x=[r0, psi0]), t_end, cfg, t_stops=times)
    for t in times:
        r, psi = traj.values([t])[0, 1:]
        phi, dphi = amplitude_phase_inverse(r, psi, t)
        exact = ref.sol(t)
        assert abs(phi - exact[0]) <= 10 * 1e-10
        assert abs(dphi - exact[1]) <= 10 * 1e-10


def test_custom_damping_reproduces_default():
    @njit
    def linear_damping(phi, dphi):
        return -3.0 * dphi

    custom = van_der_pol(damping=linear_damping)
    default = van_der_pol()
    for t in np.linspace(0, 7, 13):
        x = np.array([1.3, 0.2])
        np.testing.assert_allclose(custom.f1(x, t), default.f1(x, t), atol=1e-14)
    assert custom.closed_form_average is None


def test_q_example():
    # cos^2(t - psi) = 1 at t = psi
    assert deceleration([0.5, 0.4, 0.0], 0.0) == pytest.approx(1.3, abs=1e-15)
    # 3 cos^2 - 1 = 0 removes the Omega term
    t = math.acos(1 / math.sqrt(3))
    assert deceleration([0.0, 0.4, 0.0], t) == pytest.approx(0.0, abs=1e-15)
    assert bianchi_f2([0.0, 0.4, 0.0], t) == pytest.approx(-1.0, abs=1e-15)


def test_bianchi_f1_examples():
    # Omega -> 0 limit of the vacuum point: Sigma' / H -> 1
    for om in (1e-3, 1e-6, 1e-9):
        assert bianchi_f1([0.0, om, 0.0], 0.7)[0] == pytest.approx(1.0, abs=2 * om)
    assert bianchi_f1([0.3, 0.2, 1.1], 1.1)[2] == 0.0


def test_bianchi_rejects_inadmissible():
    with pytest.raises(AdmissibilityError):
        bianchi_f1([0.8, 0.5, 0.0], 0.0)
    with pytest.raises(AdmissibilityError):
        bianchi_f2([0.0, 1.2, 0.0], 0.0)
    assert not bianchi_admissible([0.0, 0.0, 0.0])


def test_q_and_f2_bounds_on_admissible_region(rng):
    for x in random_bianchi_points(rng, 500):
        t = rng.uniform(0, 2 * math.pi)
        q = deceleration(x, t)
        assert -1 < q < 2
        assert -3 < bianchi_f2(x, t) < 0


def test_bianchi_sup_bounds_hold(rng, bianchi):
    worst = 0.0
    for x in random_bianchi_points(rng, 500):
        for t in np.linspace(0, 2 * math.pi, 16):
            worst = max(worst, np.abs(bianchi.f1(x, t)).sum())
    assert worst < bianchi.sup_f1


def test_constraint_evolution_identity(rng, bianchi):
    # C = 1 - Sigma^2 - Omega obeys C' = 2 H (q - Sigma) C exactly
    for x in random_bianchi_points(rng, 50):
        t = rng.uniform(0, 10)
        H = rng.uniform(0.01, 1)
        d = H * bianchi.f1(x, t)
        dC = -2 * x[0] * d[0] - d[1]
        C = 1 - x[0] ** 2 - x[1]
        assert dC == pytest.approx(2 * H * (deceleration(x, t) - x[0]) * C, abs=1e-14)


def test_closed_form_average_examples(bianchi, vdp):
    np.testing.assert_allclose(closed_form_average(vdp)(np.array([2.0, 0.7])), [-3.0, 0.0])
    np.testing.assert_allclose(closed_form_average(bianchi)(np.array([0.0, 0.0, 0.0])), [1.0, 0.0, 0.0])


def test_closed_form_average_against_scipy_quad(rng, bianchi):
    fbar = closed_form_average(bianchi)
    for x in random_bianchi_points(rng, 5):
        ref = [
            quad(lambda s: bianchi.f1(x, s)[i], 0, 2 * math.pi, epsabs=1e-13)[0] / (2 * math.pi)
            for i in range(3)
        ]
        np.testing.assert_allclose(fbar(x), ref, atol=1e-11)


def test_registry():
    assert get_model("bianchi3").dimension == 3
    assert get_model("vdp", decay=1.0).sup_f2 == 1.0
    with pytest.raises(KeyError):
        get_model("bianchi9")
