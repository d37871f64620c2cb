"""Compare the compiled kernels against their pure-numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  The compiled path must be
active (do not set WINPCA_NO_NUMBA), otherwise both columns would time the
same implementation.
"""

import time

import numpy as np

from winpca._kernels import (
    BOUNDARY_REL_TOL,
    _winsorize_rows_numba,
    _winsorize_rows_numpy,
    _winsorized_term_sums_numba,
    _winsorized_term_sums_numpy,
    using_numba,
)


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    if not using_numba():
        print("compiled kernels are disabled in this process; "
              "unset WINPCA_NO_NUMBA and retry")
        return 1
    rng = np.random.default_rng(0)
    rows = []

    X = rng.standard_normal((200_000, 100))
    r = float(np.median(np.linalg.norm(X, axis=1)))
    guard = r * (1.0 + BOUNDARY_REL_TOL)
    _winsorize_rows_numba(X[:10], r, guard)  # trigger compilation
    t_numba = best_of(lambda: _winsorize_rows_numba(X, r, guard))
    t_numpy = best_of(lambda: _winsorize_rows_numpy(X, r, guard))
    rows.append(("winsorize_rows 200000x100", t_numba, t_numpy))

    y = rng.standard_normal((500_000, 8))
    lam = np.array([9.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    r2 = float(np.median(np.sum(lam * y * y, axis=1)))
    _winsorized_term_sums_numba(y[:10], lam, r2)
    t_numba = best_of(lambda: _winsorized_term_sums_numba(y, lam, r2))
    t_numpy = best_of(lambda: _winsorized_term_sums_numpy(y, lam, r2))
    rows.append(("winsorized_term_sums 500000x8", t_numba, t_numpy))

    width = max(len(name) for name, _, _ in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, tn, tp in rows:
        print(f"{name:<{width}}  {tn * 1e3:>8.2f}ms  {tp * 1e3:>8.2f}ms  "
              f"{tp / tn:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
