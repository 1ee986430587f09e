"""Exit criteria. Each test logs one PASS/FAIL line shown in the pytest terminal summary."""
import math
import time

import numpy as np
import pytest

from tdavg.analysis import (
    analytic_bound,
    averaging_scaling_experiment,
    compare_at_H,
    gronwall_check,
    scaling_experiment,
)
from tdavg.averaging import QuadratureConfig, build_averaged, period_average
from tdavg.core import SystemState
from tdavg.integrate import IntegratorConfig, full_system, integrate, integrate_until_H
from tdavg.models import closed_form_average, deceleration_kernel, van_der_pol

from conftest import random_bianchi_points

SWEEP = (0.2, 0.1, 0.05, 0.025)
TOL = 1e-10
CFG = IntegratorConfig(abs_tol=TOL, rel_tol=TOL)


def record(log, number, ok, detail):
    log.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture(scope="module")
def sweep_half(bianchi, bianchi_state):
    start = time.perf_counter()
    report = scaling_experiment(bianchi, bianchi_state, SWEEP, 0.5, 1.0, integrator=CFG)
    return report, time.perf_counter() - start


@pytest.fixture(scope="module")
def sweep_three_quarter(bianchi, bianchi_state):
    return scaling_experiment(bianchi, bianchi_state, SWEEP, 0.75, 1.0, integrator=CFG)


def test_criterion_1_scaling_gamma_half(sweep_half, acceptance_log):
    report, elapsed = sweep_half
    ok = report.fitted_exponent >= 0.85 and report.theoretical_exponent == 1.0 and elapsed < 60
    record(
        acceptance_log, 1, ok,
        f"gamma=0.5 fitted exponent {report.fitted_exponent:.4f} >= 0.85 "
        f"(theory {report.theoretical_exponent}), runtime {elapsed:.1f}s < 60s",
    )
    assert report.fitted_exponent >= 0.85
    assert elapsed < 60
    assert report.monotone


def test_criterion_2_scaling_gamma_three_quarter(sweep_half, sweep_three_quarter, acceptance_log):
    half = sweep_half[0].fitted_exponent
    tq = sweep_three_quarter.fitted_exponent
    gap = half - tq
    ok = tq >= 0.35 and gap >= 0.2
    record(
        acceptance_log, 2, ok,
        f"gamma=0.75 fitted exponent {tq:.4f} >= 0.35 (theory "
        f"{sweep_three_quarter.theoretical_exponent}); gap to gamma=0.5 {gap:.4f} >= 0.2",
    )
    assert tq >= 0.35
    assert gap >= 0.2


def test_criterion_3_gronwall_domination(bianchi, sweep_half, sweep_three_quarter, acceptance_log):
    checked = 0
    worst = 0.0
    all_ok = True
    for run in (*sweep_half[0].runs, *sweep_three_quarter.runs):
        rep = gronwall_check(run, analytic_bound(bianchi, run))
        all_ok &= rep.passed
        worst = max(worst, rep.max_ratio)
        checked += run.times.size
    # oscillator with H' = -H^2, so the truncation is not trivial
    vdp = van_der_pol(decay=1.0)
    s0 = SystemState(H=0.5, x=[1.0, 0.0])
    full = integrate_until_H(full_system(vdp), s0, 0.025, CFG)
    for H_star in SWEEP:
        for gamma in (0.5, 0.75):
            run = compare_at_H(vdp, s0, H_star, gamma, full=full, integrator=CFG)
            rep = gronwall_check(run, analytic_bound(vdp, run))
            all_ok &= rep.passed
            worst = max(worst, rep.max_ratio)
            checked += run.times.size
    record(acceptance_log, 3, all_ok, f"error_xy <= bound at {checked} samples, max ratio {worst:.4g}")
    assert all_ok


def test_criterion_4_classical_averaging_scaling(vdp, acceptance_log):
    report = averaging_scaling_experiment(vdp, [1.0, 0.0], SWEEP, 1.0, integrator=CFG)
    ok = report.fitted_exponent >= 0.85
    record(acceptance_log, 4, ok, f"sup|y-z| vs eps fitted exponent {report.fitted_exponent:.4f} >= 0.85")
    assert ok


def test_criterion_5_averaged_oscillator_oracle(vdp, acceptance_log):
    eps = 0.1
    traj = integrate(full_system(vdp), SystemState(H=eps, x=[1.2, 0.4]), 3.0, CFG)
    system, z0 = build_averaged(vdp, traj, 2.5)
    t1 = z0.t + 5 * 2 * math.pi
    times = np.linspace(z0.t, t1, 301)
    z = integrate(system.rhs, z0, t1, CFG, t_stops=times).values(times)
    exact = z0.x[0] * np.exp(-1.5 * eps * (times - z0.t))
    rel = float(np.max(np.abs(z[:, 1] - exact) / exact))
    ok = rel <= 1e-7
    record(acceptance_log, 5, ok, f"averaged amplitude vs r0 exp(-3/2 eps dt): max relative error {rel:.3g} <= 1e-7")
    assert ok


def test_criterion_6_quadrature_matches_closed_form(bianchi, vdp, rng, acceptance_log):
    worst = 0.0
    for rule in ("composite_simpson", "gauss_legendre"):
        quad = QuadratureConfig(rule, 256)
        for z in random_bianchi_points(rng, 50):
            t0 = rng.uniform(0, 100)
            diff = period_average(bianchi, z, t0, quad) - closed_form_average(bianchi)(z)
            worst = max(worst, float(np.abs(diff).max()))
        for _ in range(50):
            z = np.array([rng.uniform(0, 5), rng.uniform(-10, 10)])
            t0 = rng.uniform(0, 100)
            diff = period_average(vdp, z, t0, quad) - closed_form_average(vdp)(z)
            worst = max(worst, float(np.abs(diff).max()))
    ok = worst <= 1e-10
    record(acceptance_log, 6, ok, f"quadrature vs closed-form average, max deviation {worst:.3g} <= 1e-10")
    assert ok


@pytest.mark.parametrize(
    "x0", [(0.2, 0.5, 0.0), (-0.9, 0.1, 1.0), (0.0, 0.95, -2.0), (0.6, 0.02, 0.5)]
)
def test_criterion_7_constraint_preservation(bianchi, x0, acceptance_log):
    t_end = 50 * 2 * math.pi
    traj = integrate(full_system(bianchi), SystemState(H=1.0, x=x0), t_end, CFG)
    x = traj.x
    C = 1 - x[:, 0] ** 2 - x[:, 1]
    q = np.array([deceleration_kernel(xi, t) for xi, t in zip(x, traj.t)])
    ok = traj.ok and traj.t_end == t_end and C.min() > 0 and x[:, 1].min() > 0 and q.min() > -1 and q.max() < 2
    record(
        acceptance_log, 7, ok,
        f"x0={x0}: {len(traj)} samples over 50 periods, min constraint {C.min():.3g} > 0, "
        f"q in [{q.min():.3f}, {q.max():.3f}] within (-1, 2)",
    )
    assert ok


def test_criterion_8_integrator_order(acceptance_log):
    def err(cfg):
        tr = integrate(lambda t, s: -s, SystemState(H=1.0, x=[1.0]), 1.0, cfg)
        return abs(tr.s[-1, 1] - math.exp(-1))

    ratio = err(IntegratorConfig(method="fixed_rk4", step=0.1)) / err(IntegratorConfig(method="fixed_rk4", step=0.05))
    adaptive = err(CFG)
    ok = 2**3.7 <= ratio <= 2**4.3 and adaptive <= 100 * TOL
    record(
        acceptance_log, 8, ok,
        f"RK4 halving ratio {ratio:.3f} in [{2**3.7:.2f}, {2**4.3:.2f}]; adaptive error {adaptive:.3g} <= {100 * TOL:.0e}",
    )
    assert ok


def test_criterion_9_run_invariants(recorded_runs, acceptance_log):
    assert recorded_runs, "no comparison runs were produced"
    bad = 0
    for run in recorded_runs:
        start = max(run.error_xy[0], run.error_xz[0], run.error_yz[0])
        slack = run.error_xz - (run.error_xy + run.error_yz)
        if start > 1e-15 or slack.max() > 1e-15:
            bad += 1
    ok = bad == 0
    record(acceptance_log, 9, ok, f"shared start and triangle inequality on {len(recorded_runs)} runs, {bad} violations")
    assert ok
