"""Optional numba acceleration.

Set ``QUATSTAT_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or on platforms without numba.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_DISABLED = os.environ.get("QUATSTAT_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")
HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and not NUMBA_DISABLED


def njit(f=None, **options):
    """``numba.njit`` when numba is importable, identity otherwise.

    The returned object is compiled even when USE_NUMBA is false, so that
    tests and benchmarks can compare both paths in one process; dispatch
    between paths happens in ``_kernels``.
    """
    options.setdefault("cache", True)
    options.setdefault("nogil", True)

    def wrap(func):
        if numba is None:
            return func
        return numba.njit(**options)(func)

    if f is None:
        return wrap
    return wrap(f)


def max_threads():
    """Thread cap for trial-level parallelism (``QUATSTAT_THREADS``)."""
    value = os.environ.get("QUATSTAT_THREADS")
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return os.cpu_count() or 1
