"""Compiled inner loops.

Every function here runs under numba when it is available and enabled, and
as plain numpy/Python otherwise (``TDAVG_DISABLE_JIT=1``). System
right-hand sides share the signature ``rhs(t, s, p)`` on the packed state
``s = [H, x]`` with a float parameter vector ``p``.
"""
import math
from functools import lru_cache

import numpy as np

from ._jit import is_jitted, njit, python_version

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_UNDERFLOW = 2
STATUS_NONFINITE = 3
STATUS_H_NONPOSITIVE = 4

STATUS_NAMES = {
    STATUS_OK: "ok",
    STATUS_MAX_STEPS: "max_steps",
    STATUS_UNDERFLOW: "step_underflow",
    STATUS_NONFINITE: "nonfinite",
    STATUS_H_NONPOSITIVE: "H_nonpositive",
}

# Dormand-Prince 5(4)
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)


def _identity(f):
    return f


def _wrap_for(*funcs):
    """njit if every callee is compiled, else keep Python."""
    return njit if all(is_jitted(f) for f in funcs) else _identity


@lru_cache(maxsize=None)
def full_rhs(f1, f2):
    @_wrap_for(f1, f2)
    def rhs(t, s, p):
        x = s[1:]
        H = s[0]
        out = np.empty_like(s)
        out[0] = H * H * f2(x, t)
        out[1:] = H * f1(x, t)
        return out

    return rhs


@lru_cache(maxsize=None)
def truncated_rhs(f1):
    @_wrap_for(f1)
    def rhs(t, s, p):
        out = np.empty_like(s)
        out[0] = 0.0
        out[1:] = s[0] * f1(s[1:], t)
        return out

    return rhs


@lru_cache(maxsize=None)
def averaged_rhs(fbar):
    @_wrap_for(fbar)
    def rhs(t, s, p):
        out = np.empty_like(s)
        out[0] = 0.0
        out[1:] = s[0] * fbar(s[1:])
        return out

    return rhs


@lru_cache(maxsize=None)
def quadrature_average(f1):
    """``avg(z, p)`` with ``p = [node times..., normalised weights...]``."""

    @_wrap_for(f1)
    def avg(z, p):
        m = p.shape[0] // 2
        acc = p[m] * f1(z, p[0])
        for k in range(1, m):
            acc = acc + p[m + k] * f1(z, p[k])
        return acc

    return avg


@lru_cache(maxsize=None)
def quadrature_averaged_rhs(f1):
    avg = quadrature_average(f1)

    @_wrap_for(avg)
    def rhs(t, s, p):
        out = np.empty_like(s)
        out[0] = 0.0
        out[1:] = s[0] * avg(s[1:], p)
        return out

    return rhs


@njit(cache=True)
def _all_finite(v):
    for i in range(v.shape[0]):
        if not math.isfinite(v[i]):
            return False
    return True


@njit(cache=True)
def _grow(ts, ys, fs):
    cap = ts.shape[0] * 2
    n = ys.shape[1]
    ts2 = np.empty(cap)
    ys2 = np.empty((cap, n))
    fs2 = np.empty((cap, n))
    m = ts.shape[0]
    ts2[:m] = ts
    ys2[:m] = ys
    fs2[:m] = fs
    return ts2, ys2, fs2


@njit(cache=True)
def _rms_scaled(v, y, atol, rtol):
    acc = 0.0
    for i in range(v.shape[0]):
        sc = atol + rtol * abs(y[i])
        acc += (v[i] / sc) ** 2
    return math.sqrt(acc / v.shape[0])


@njit
def dopri_loop(rhs, p, t0, s0, stops, atol, rtol, max_steps, require_positive):
    """Adaptive Dormand-Prince 5(4) with local extrapolation and FSAL.

    Steps are clipped to land exactly on every time in ``stops`` (sorted,
    all greater than ``t0``; the last one is the end time). Returns
    ``(ts, ys, fs, m, status)``; only the first ``m`` rows are valid.
    """
    n = s0.shape[0]
    cap = 256
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    fs = np.empty((cap, n))
    t = t0
    y = s0.copy()
    f = rhs(t, y, p)
    ts[0] = t
    ys[0] = y
    fs[0] = f
    m = 1
    if not _all_finite(f):
        return ts, ys, fs, m, STATUS_NONFINITE
    t_end = stops[stops.shape[0] - 1]
    span = t_end - t0
    # starting step: Hairer, Norsett & Wanner, Solving ODEs I, II.4
    d0 = _rms_scaled(y, y, atol, rtol)
    d1 = _rms_scaled(f, y, atol, rtol)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, span)
    fe = rhs(t0 + h0, y + h0 * f, p)
    d2 = _rms_scaled(fe - f, y, atol, rtol) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    h = min(100.0 * h0, h1, span)
    k_stop = 0
    steps = 0
    rejected = False
    status = STATUS_OK
    while k_stop < stops.shape[0]:
        if steps >= max_steps:
            status = STATUS_MAX_STEPS
            break
        steps += 1
        target = stops[k_stop]
        remaining = target - t
        if h >= remaining:
            hh = remaining
            landing = True
        else:
            hh = h
            landing = False
        if hh <= 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
            status = STATUS_UNDERFLOW
            break
        k1 = f
        k2 = rhs(t + C2 * hh, y + hh * (A21 * k1), p)
        k3 = rhs(t + C3 * hh, y + hh * (A31 * k1 + A32 * k2), p)
        k4 = rhs(t + C4 * hh, y + hh * (A41 * k1 + A42 * k2 + A43 * k3), p)
        k5 = rhs(t + C5 * hh, y + hh * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), p)
        k6 = rhs(t + hh, y + hh * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), p)
        y_new = y + hh * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        t_new = target if landing else t + hh
        k7 = rhs(t_new, y_new, p)
        if not (_all_finite(y_new) and _all_finite(k7)):
            # treat as a failed step; a persistently bad field ends in underflow
            h = 0.2 * hh
            rejected = True
            if h <= 16.0 * 2.220446049250313e-16 * max(abs(t), 1.0):
                status = STATUS_NONFINITE
                break
            continue
        err = hh * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err_norm = 0.0
        for i in range(n):
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            e = abs(err[i]) / sc
            if e > err_norm:
                err_norm = e
        if err_norm <= 1.0:
            if require_positive and y_new[0] <= 0.0:
                status = STATUS_H_NONPOSITIVE
                break
            if m == ts.shape[0]:
                ts, ys, fs = _grow(ts, ys, fs)
            ts[m] = t_new
            ys[m] = y_new
            fs[m] = k7
            m += 1
            t = t_new
            y = y_new
            f = k7
            if err_norm == 0.0:
                factor = 5.0
            else:
                factor = min(5.0, 0.9 * err_norm ** -0.2)
            if rejected:
                factor = min(factor, 1.0)
            rejected = False
            if landing:
                k_stop += 1
                h = max(h, hh * factor)
            else:
                h = hh * factor
        else:
            h = hh * max(0.2, 0.9 * err_norm ** -0.2)
            rejected = True
    return ts, ys, fs, m, status


@njit
def rk4_loop(rhs, p, t0, s0, stops, step, max_steps, require_positive):
    """Classical fixed-step RK4; each interval between stops is split into equal substeps."""
    n = s0.shape[0]
    total = 0
    prev = t0
    for k in range(stops.shape[0]):
        total += max(1, int(math.ceil((stops[k] - prev) / step - 1e-9)))
        prev = stops[k]
    total = min(total, max_steps)
    ts = np.empty(total + 1)
    ys = np.empty((total + 1, n))
    fs = np.empty((total + 1, n))
    y = s0.copy()
    f = rhs(t0, y, p)
    ts[0] = t0
    ys[0] = y
    fs[0] = f
    m = 1
    if not _all_finite(f):
        return ts, ys, fs, m, STATUS_NONFINITE
    prev = t0
    for k in range(stops.shape[0]):
        seg = stops[k] - prev
        nsub = max(1, int(math.ceil(seg / step - 1e-9)))
        h = seg / nsub
        for j in range(nsub):
            if m > max_steps:
                return ts, ys, fs, m, STATUS_MAX_STEPS
            t = prev + j * h
            k1 = f
            k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1, p)
            k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2, p)
            k4 = rhs(t + h, y + h * k3, p)
            y_new = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_new = stops[k] if j == nsub - 1 else prev + (j + 1) * h
            if require_positive and y_new[0] <= 0.0:
                return ts, ys, fs, m, STATUS_H_NONPOSITIVE
            f_new = rhs(t_new, y_new, p)
            if not (_all_finite(y_new) and _all_finite(f_new)):
                return ts, ys, fs, m, STATUS_NONFINITE
            ts[m] = t_new
            ys[m] = y_new
            fs[m] = f_new
            m += 1
            y = y_new
            f = f_new
        prev = stops[k]
    return ts, ys, fs, m, STATUS_OK


def run_loop(loop, rhs, *args):
    """Call ``loop`` compiled when ``rhs`` is compiled, else its Python version."""
    if is_jitted(rhs) and is_jitted(loop):
        return loop(rhs, *args)
    return python_version(loop)(python_version(rhs), *args)


@njit
def secant_ratio_max(f1, xa, xb, ts):
    """max_k ||f1(xa_k, t_k) - f1(xb_k, t_k)||_1 / ||xa_k - xb_k||_1 over pairs with xa != xb."""
    best = 0.0
    for k in range(ts.shape[0]):
        dx = 0.0
        for i in range(xa.shape[1]):
            dx += abs(xa[k, i] - xb[k, i])
        if dx == 0.0:
            continue
        df = f1(xa[k], ts[k]) - f1(xb[k], ts[k])
        num = 0.0
        for i in range(df.shape[0]):
            num += abs(df[i])
        r = num / dx
        if r > best:
            best = r
    return best
