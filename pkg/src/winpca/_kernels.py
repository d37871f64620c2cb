"""Hot loops with numba-compiled and pure-numpy implementations.

Two kernels dominate runtime at simulation scale: rescaling every row of a
data matrix onto a centered ball (winsorization), and accumulating the
per-coordinate terms of the winsorized second-moment estimator over a large
batch of draws.  Both are compiled with numba when it is importable; setting
the environment variable ``WINPCA_NO_NUMBA`` to a truthy value at import time
forces the numpy implementations instead.  The two paths agree to floating
point roundoff and are benchmarked against each other in
``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["using_numba", "winsorize_rows", "winsorized_term_sums"]

# Rows whose norm exceeds the radius by less than this relative slack are
# left untouched, so reapplying the transform is an exact no-op.
BOUNDARY_REL_TOL = 1e-12


def _env_disables_numba() -> bool:
    flag = os.environ.get("WINPCA_NO_NUMBA", "").strip().lower()
    return flag not in ("", "0", "false", "no")


try:  # pragma: no cover - exercised via subprocess in the test suite
    if _env_disables_numba():
        raise ImportError("numba disabled by WINPCA_NO_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


def using_numba() -> bool:
    """Report whether the compiled kernels are active in this process."""
    return _HAVE_NUMBA


def _winsorize_rows_numpy(values: np.ndarray, limit: float, guard: float) -> np.ndarray:
    norms = np.sqrt(np.einsum("ij,ij->i", values, values))
    out = values.copy()
    mask = norms > guard
    if np.any(mask):
        out[mask] = values[mask] * (limit / norms[mask])[:, None]
    return out


@njit(cache=True, nogil=True)
def _winsorize_rows_numba(values, limit, guard):  # pragma: no cover - compiled
    n, p = values.shape
    out = values.copy()
    for i in range(n):
        s = 0.0
        for j in range(p):
            v = values[i, j]
            s += v * v
        norm = np.sqrt(s)
        if norm > guard:
            scale = limit / norm
            for j in range(p):
                out[i, j] = values[i, j] * scale
    return out


def winsorize_rows(values: np.ndarray, limit: float) -> np.ndarray:
    """Scale every row with Euclidean norm above ``limit`` back onto the ball.

    ``values`` must be a C-contiguous float64 matrix; validation lives in the
    calling layer.  Returns a new array, input is never modified.
    """
    guard = limit * (1.0 + BOUNDARY_REL_TOL)
    if _HAVE_NUMBA:
        return _winsorize_rows_numba(values, limit, guard)
    return _winsorize_rows_numpy(values, limit, guard)


def _winsorized_term_sums_numpy(y: np.ndarray, lam: np.ndarray, r2: float):
    sq = (y * y) * lam
    s2 = sq.sum(axis=1)
    factor = np.ones_like(s2)
    np.divide(r2, s2, out=factor, where=s2 > r2)
    terms = sq * factor[:, None]
    return terms.sum(axis=0), (terms * terms).sum(axis=0)


@njit(cache=True, nogil=True)
def _winsorized_term_sums_numba(y, lam, r2):  # pragma: no cover - compiled
    n, p = y.shape
    sums = np.zeros(p)
    sumsq = np.zeros(p)
    for i in range(n):
        s2 = 0.0
        for j in range(p):
            s2 += lam[j] * y[i, j] * y[i, j]
        factor = 1.0 if s2 <= r2 else r2 / s2
        for j in range(p):
            t = lam[j] * y[i, j] * y[i, j] * factor
            sums[j] += t
            sumsq[j] += t * t
    return sums, sumsq


def winsorized_term_sums(y: np.ndarray, lam: np.ndarray, r2: float):
    """Accumulate winsorized second-moment terms over whitened draws.

    For each draw ``y_i`` the term vector is
    ``lam * y_i**2 * min(1, r2 / sum(lam * y_i**2))``.  Returns the
    coordinatewise sum and sum of squares across draws, from which the caller
    forms Monte Carlo means and standard errors.
    """
    if _HAVE_NUMBA:
        return _winsorized_term_sums_numba(y, lam, r2)
    return _winsorized_term_sums_numpy(y, lam, r2)
