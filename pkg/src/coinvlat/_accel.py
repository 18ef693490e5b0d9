"""Hot kernels with a numba implementation and a pure numpy fallback.

Set ``COINVLAT_NO_NUMBA=1`` to force the numpy path (also used when numba is
not installed).  Inputs whose magnitudes might overflow int64 are routed to an
exact Python-int implementation regardless of the flag.
"""

from __future__ import annotations

import math
import os

import numpy as np

_INT64_SAFE = 1 << 62

try:  # pragma: no cover - exercised implicitly
    if os.environ.get("COINVLAT_NO_NUMBA", "") not in ("", "0"):
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Fincke-Pohst enumeration in integer-scaled form
# ---------------------------------------------------------------------------


def _fits_int64(D, mu, s, M, budget) -> bool:
    if budget >= _INT64_SAFE or M >= _INT64_SAFE:
        return False
    n = len(D)
    # |x_i| is bounded by (|X_i| + |s_i| + sum |mu_ij x_j|) / M with |X_i| <= sqrt(budget/D_i)
    xmax = [0] * n
    for i in range(n - 1, -1, -1):
        acc = abs(s[i]) + sum(abs(mu[i][j]) * xmax[j] for j in range(i + 1, n))
        r = math.isqrt(budget // D[i])
        if acc + r + M >= _INT64_SAFE:
            return False
        xmax[i] = (acc + r) // M + 1
        if D[i] * (r + M) ** 2 >= _INT64_SAFE or M * xmax[i] >= _INT64_SAFE:
            return False
    return True


def _dfs_python(D, mu, s, M, budget):
    n = len(D)
    out, norms = [], []
    x = [0] * n
    hi = [0] * n
    C = [0] * n
    T = [0] * n
    T[n - 1] = budget

    def enter(i):
        c = -(s[i] + sum(mu[i][j] * x[j] for j in range(i + 1, n)))
        r = math.isqrt(T[i] // D[i])
        C[i] = c
        x[i] = -((r - c) // M)  # ceil((c - r) / M)
        hi[i] = (c + r) // M

    i = n - 1
    enter(i)
    while True:
        if x[i] > hi[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        X = M * x[i] - C[i]
        rem = T[i] - D[i] * X * X
        if i == 0:
            out.append(list(x))
            norms.append(budget - rem)
            x[0] += 1
            continue
        T[i - 1] = rem
        i -= 1
        enter(i)
    return out, norms


@njit(cache=True)
def _isqrt64(v):
    if v <= 0:
        return 0
    r = np.int64(math.sqrt(float(v)))
    while r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r


@njit(cache=True)
def _dfs_numba(D, mu, s, M, budget):
    n = D.shape[0]
    cap = 1024
    out = np.empty((cap, n), np.int64)
    nrm = np.empty(cap, np.int64)
    cnt = 0
    x = np.zeros(n, np.int64)
    hi = np.zeros(n, np.int64)
    C = np.zeros(n, np.int64)
    T = np.zeros(n, np.int64)
    T[n - 1] = budget
    i = n - 1
    # enter level i
    c = -s[i]
    r = _isqrt64(T[i] // D[i])
    C[i] = c
    x[i] = -((r - c) // M)
    hi[i] = (c + r) // M
    while True:
        if x[i] > hi[i]:
            i += 1
            if i == n:
                break
            x[i] += 1
            continue
        X = M * x[i] - C[i]
        rem = T[i] - D[i] * X * X
        if i == 0:
            if cnt == cap:
                cap *= 2
                out2 = np.empty((cap, n), np.int64)
                out2[:cnt] = out[:cnt]
                out = out2
                nrm2 = np.empty(cap, np.int64)
                nrm2[:cnt] = nrm[:cnt]
                nrm = nrm2
            out[cnt] = x
            nrm[cnt] = budget - rem
            cnt += 1
            x[0] += 1
            continue
        T[i - 1] = rem
        i -= 1
        c = -s[i]
        for j in range(i + 1, n):
            c -= mu[i, j] * x[j]
        r = _isqrt64(T[i] // D[i])
        C[i] = c
        x[i] = -((r - c) // M)
        hi[i] = (c + r) // M
    return out[:cnt].copy(), nrm[:cnt].copy()


def _isqrt_vec(v: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(np.maximum(v, 0).astype(np.float64))).astype(np.int64)
    r -= (r * r > v).astype(np.int64)
    r += ((r + 1) * (r + 1) <= v).astype(np.int64)
    return r


def _bfs_numpy(D, mu, s, M, budget):
    """Level-by-level enumeration, each level vectorized over the frontier."""
    n = len(D)
    D = np.asarray(D, np.int64)
    mu = np.asarray(mu, np.int64)
    s = np.asarray(s, np.int64)
    xs = np.zeros((1, 0), np.int64)  # columns hold x_{i+1..n-1}
    T = np.array([budget], np.int64)
    for i in range(n - 1, -1, -1):
        c = -(s[i] + xs @ mu[i, i + 1 :]) if xs.shape[1] else np.full(len(T), -s[i], np.int64)
        r = _isqrt_vec(T // D[i])
        lo = -((r - c) // M)
        hi = (c + r) // M
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        parent = np.repeat(np.arange(len(T)), cnt)
        starts = np.cumsum(cnt) - cnt
        offs = np.arange(total, dtype=np.int64) - np.repeat(starts, cnt)
        xi = lo[parent] + offs
        X = M * xi - c[parent]
        T = T[parent] - D[i] * X * X
        xs = np.column_stack([xi, xs[parent]])
    order = np.lexsort(xs.T[::-1])
    return xs[order], (budget - T)[order]


def enumerate_short(D, mu, s, M, budget, _scale=None):
    """Integer vectors with ``sum_i D_i (M x_i + s_i + sum_{j>i} mu_ij x_j)^2 <= budget``.

    Returns ``(xs, scaled_norms)``; ``xs`` is an int64 array when the int64
    path was usable, otherwise an object array of Python ints.
    """
    n = len(D)
    if _fits_int64(D, mu, s, M, budget):
        if HAVE_NUMBA:
            xs, nr = _dfs_numba(
                np.asarray(D, np.int64), np.asarray(mu, np.int64), np.asarray(s, np.int64), np.int64(M), np.int64(budget)
            )
        else:
            xs, nr = _bfs_numpy(D, mu, s, M, budget)
        return xs, [int(v) for v in nr]
    xs, nr = _dfs_python(D, mu, s, M, budget)
    arr = np.array(xs, dtype=object).reshape(len(xs), n)
    return arr, nr


# ---------------------------------------------------------------------------
# batched sifting through a stabilizer chain
# ---------------------------------------------------------------------------


def _sift_numpy(action, As, tables):
    R = np.array(As, np.int64, copy=True)
    lev = np.full(len(R), len(tables), np.int64)
    active = np.arange(len(R))
    for i, (pt, index, Tinv) in enumerate(tables):
        if not len(active):
            break
        Y = action.normalize(np.einsum("j,mjk->mk", pt, R[active]))
        idx = index.find(Y)
        bad = idx < 0
        lev[active[bad]] = i
        active = active[~bad]
        R[active] = action.mul(R[active], Tinv[idx[~bad]])
    return R, lev


def sift_kernel(action, As, tables):
    """Sift a batch of matrices; returns residues and the level where each stopped."""
    return _sift_numpy(action, As, tables)
