"""Numba switch for the hot kernels.

Set ``SWEEPLAB_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays. Both paths consume the same raw random words, so results are
bit-identical; the Python path is only practical for small populations.
"""
import os

JIT_ENABLED = os.environ.get("SWEEPLAB_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")

if JIT_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        JIT_ENABLED = False

if not JIT_ENABLED:

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper
