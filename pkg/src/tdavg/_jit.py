"""Optional numba acceleration.

Set ``TDAVG_DISABLE_JIT=1`` (or run without numba installed) to use the
pure numpy/Python code paths. The kernels are written so that both paths
execute the same source.
"""
import os

try:
    import numba as nb
except ImportError:  # pragma: no cover
    nb = None

JIT_DISABLED = nb is None or os.environ.get("TDAVG_DISABLE_JIT", "0").lower() in (
    "1",
    "true",
    "yes",
)


def njit(*args, **kwargs):
    if JIT_DISABLED:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func
    return nb.njit(*args, **kwargs)


def is_jitted(func):
    """True if ``func`` is a compiled numba dispatcher usable from nopython code."""
    return not JIT_DISABLED and hasattr(func, "py_func")


def python_version(func):
    return getattr(func, "py_func", func)
