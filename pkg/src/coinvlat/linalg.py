"""Exact integer and rational matrix arithmetic.

Matrices are numpy arrays with ``dtype=object`` holding Python ``int`` or
``fractions.Fraction`` entries, so every operation is exact and entries may
grow without bound.  Nothing in here touches floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

import numpy as np


class NoSolution(ValueError):
    """Raised by :func:`solve_exact` when the system is inconsistent."""


def imat(rows) -> np.ndarray:
    """Integer matrix (object dtype) from nested sequences."""
    a = np.array(rows, dtype=object)
    if a.ndim == 1:
        a = a.reshape(1, -1) if a.size else a.reshape(0, 0)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        fv = Fraction(v)
        if fv.denominator != 1:
            raise ValueError(f"non-integral entry {v!r}")
        out[idx] = int(fv)
    return out


def rmat(rows) -> np.ndarray:
    """Rational matrix (object dtype, Fraction entries)."""
    a = np.array(rows, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = Fraction(v) if not isinstance(v, str) else Fraction(v)
    return out


def zeros(r: int, c: int) -> np.ndarray:
    m = np.empty((r, c), dtype=object)
    m.fill(0)
    return m


def identity(n: int) -> np.ndarray:
    m = zeros(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def is_integral(m) -> bool:
    return all(Fraction(v).denominator == 1 for v in np.asarray(m, dtype=object).flat)


def to_int(m) -> np.ndarray:
    """Convert an integral rational matrix to an integer one, or raise."""
    m = np.asarray(m, dtype=object)
    out = np.empty(m.shape, dtype=object)
    for idx, v in np.ndenumerate(m):
        fv = Fraction(v)
        if fv.denominator != 1:
            raise ValueError("matrix is not integral")
        out[idx] = int(fv)
    return out


def to_int64(m) -> np.ndarray:
    return np.array(to_int(m).tolist(), dtype=np.int64).reshape(np.shape(m))


def denominator(m) -> int:
    d = 1
    for v in np.asarray(m, dtype=object).flat:
        d = lcm(d, Fraction(v).denominator)
    return d


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf(m) -> tuple[np.ndarray, np.ndarray]:
    """Row Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``U @ m == H``.  ``H`` is in
    row echelon form with positive pivots, entries above each pivot reduced
    into ``[0, pivot)`` and zero rows at the bottom.
    """
    H = imat(np.asarray(m, dtype=object).tolist()) if np.size(m) else np.asarray(m, dtype=object)
    H = H.copy()
    nr, nc = H.shape
    U = identity(nr)
    row = 0
    for col in range(nc):
        if row >= nr:
            break
        # fold every entry below into the pivot position by extended gcd steps
        for i in range(row + 1, nr):
            if H[i, col] == 0:
                continue
            a, b = H[row, col], H[i, col]
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            r1, r2 = H[row].copy(), H[i].copy()
            H[row], H[i] = x * r1 + y * r2, -q * r1 + p * r2
            u1, u2 = U[row].copy(), U[i].copy()
            U[row], U[i] = x * u1 + y * u2, -q * u1 + p * u2
        if H[row, col] == 0:
            continue
        if H[row, col] < 0:
            H[row] = -H[row]
            U[row] = -U[row]
        piv = H[row, col]
        for i in range(row):
            f = H[i, col] // piv
            if f:
                H[i] = H[i] - f * H[row]
                U[i] = U[i] - f * U[row]
        row += 1
    return H, U


def snf(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form ``(D, U, V)`` with ``U @ m @ V == D``.

    The diagonal satisfies ``d_1 | d_2 | ...`` with nonnegative entries; a zero
    tail is allowed for singular input.
    """
    D = imat(np.asarray(m, dtype=object).tolist()).copy()
    nr, nc = D.shape
    U, V = identity(nr), identity(nc)
    t = 0
    while t < min(nr, nc):
        sub = [(abs(D[i, j]), i, j) for i in range(t, nr) for j in range(t, nc) if D[i, j] != 0]
        if not sub:
            break
        _, pi, pj = min(sub)
        D[[t, pi]] = D[[pi, t]]
        U[[t, pi]] = U[[pi, t]]
        D[:, [t, pj]] = D[:, [pj, t]]
        V[:, [t, pj]] = V[:, [pj, t]]
        done = True
        for i in range(t + 1, nr):
            f = D[i, t] // D[t, t]
            if f:
                D[i] = D[i] - f * D[t]
                U[i] = U[i] - f * U[t]
            if D[i, t] != 0:
                done = False
        for j in range(t + 1, nc):
            f = D[t, j] // D[t, t]
            if f:
                D[:, j] = D[:, j] - f * D[:, t]
                V[:, j] = V[:, j] - f * V[:, t]
            if D[t, j] != 0:
                done = False
        if not done:
            continue
        bad = [i for i in range(t + 1, nr) for j in range(t + 1, nc) if D[i, j] % D[t, t]]
        if bad:
            i = bad[0]
            D[t] = D[t] + D[i]
            U[t] = U[t] + U[i]
            continue
        if D[t, t] < 0:
            D[t] = -D[t]
            U[t] = -U[t]
        t += 1
    return D, U, V


def det(m) -> Fraction | int:
    """Determinant by fraction-free Bareiss elimination (rational input ok)."""
    a = np.asarray(m, dtype=object)
    n = a.shape[0]
    if n == 0:
        return 1
    den = denominator(a)
    A = [[int(Fraction(v) * den) for v in row] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    val = Fraction(sign * A[n - 1][n - 1], den**n)
    return int(val) if val.denominator == 1 else val


def rref(m) -> tuple[np.ndarray, list[int]]:
    a = rmat(np.asarray(m, dtype=object).tolist()) if np.size(m) else np.asarray(m, dtype=object)
    a = a.copy()
    nr, nc = a.shape
    pivots = []
    r = 0
    for c in range(nc):
        p = next((i for i in range(r, nr) if a[i, c] != 0), None)
        if p is None:
            continue
        a[[r, p]] = a[[p, r]]
        a[r] = a[r] / a[r, c]
        for i in range(nr):
            if i != r and a[i, c] != 0:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return a, pivots


def solve_exact(m, b) -> np.ndarray:
    """Solve ``m @ x == b`` exactly; raise :class:`NoSolution` if impossible.

    For underdetermined systems the solution with free variables set to
    zero is returned.
    """
    m = np.asarray(m, dtype=object)
    b = np.asarray(b, dtype=object).reshape(-1)
    nr, nc = m.shape
    aug = np.concatenate([rmat(m.tolist()).reshape(nr, nc), rmat(b.tolist()).reshape(nr, 1)], axis=1)
    red, piv = rref(aug)
    if nc in piv:
        raise NoSolution("right-hand side outside the column space")
    x = np.empty(nc, dtype=object)
    x.fill(Fraction(0))
    for row, c in enumerate(piv):
        x[c] = red[row, nc]
    return x


def inverse(m) -> np.ndarray:
    m = np.asarray(m, dtype=object)
    n = m.shape[0]
    aug = np.concatenate([rmat(m.tolist()).reshape(n, n), rmat(identity(n).tolist())], axis=1)
    red, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return red[:, n:]


def rank(m) -> int:
    if np.size(m) == 0:
        return 0
    return len(rref(m)[1])


def left_kernel_int(m) -> np.ndarray:
    """Basis (rows) of the integer left kernel ``{x in Z^r : x @ m == 0}``."""
    m = imat(np.asarray(m, dtype=object).tolist())
    H, U = hnf(m)
    zero_rows = [i for i in range(H.shape[0]) if all(v == 0 for v in H[i])]
    if not zero_rows:
        return zeros(0, m.shape[0])
    K, _ = hnf(U[zero_rows])
    return K[[i for i in range(K.shape[0]) if any(v != 0 for v in K[i])]]


def row_basis(m) -> np.ndarray:
    """Z-basis (via HNF) of the lattice spanned by the rows of a rational matrix."""
    m = np.asarray(m, dtype=object)
    d = denominator(m)
    H, _ = hnf(to_int(m * d))
    H = H[[i for i in range(H.shape[0]) if any(v != 0 for v in H[i])]]
    return rmat(H.tolist()).reshape(H.shape) / d if H.size else rmat(H.tolist()).reshape(H.shape)


def lll_gram(G, delta: Fraction = Fraction(99, 100)) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce a positive definite rational Gram matrix.

    Returns ``(T, G')`` with ``T`` unimodular and ``G' == T @ G @ T.T``.
    """
    G = rmat(np.asarray(G, dtype=object).tolist())
    n = G.shape[0]
    T = identity(n)
    if n == 0:
        return T, G
    B = [Fraction(0)] * n
    mu = [[Fraction(0)] * n for _ in range(n)]

    def gso(k):
        for j in range(k):
            s = G[k, j] - sum(mu[j][i] * mu[k][i] * B[i] for i in range(j))
            mu[k][j] = s / B[j]
        B[k] = G[k, k] - sum(mu[k][i] ** 2 * B[i] for i in range(k))

    def reduce(k, l):
        if abs(mu[k][l]) * 2 > 1:
            q = round(mu[k][l])
            T[k] = T[k] - q * T[l]
            G[k, :] = G[k, :] - q * G[l, :]
            G[:, k] = G[:, k] - q * G[:, l]
            mu[k][l] -= q
            for i in range(l):
                mu[k][i] -= q * mu[l][i]

    gso(0)
    k = 1
    while k < n:
        gso(k)
        reduce(k, k - 1)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            T[[k, k - 1]] = T[[k - 1, k]]
            G[[k, k - 1]] = G[[k - 1, k]]
            G[:, [k, k - 1]] = G[:, [k - 1, k]]
            k = max(k - 1, 1)
            gso(k - 1)
            continue
        for l in range(k - 2, -1, -1):
            reduce(k, l)
        k += 1
    return T, G


def charpoly(m) -> list[int]:
    """Characteristic polynomial coefficients ``[c_0, ..., c_n]`` (monic, c_n = 1).

    Faddeev-LeVerrier over the rationals; integer input gives integer output.
    """
    A = rmat(np.asarray(m, dtype=object).tolist())
    n = A.shape[0]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    M = rmat(zeros(n, n).tolist()).reshape(n, n)
    I = rmat(identity(n).tolist())
    for k in range(1, n + 1):
        M = A.dot(M) + coeffs[n - k + 1] * I
        AM = A.dot(M)
        coeffs[n - k] = -sum(AM[i, i] for i in range(n)) / k
    return [int(c) if c.denominator == 1 else c for c in coeffs]


def poly_divmod(num: list[int], den: list[int]) -> tuple[list[int], list[int]]:
    """Divide integer polynomials (coefficient lists, low degree first) with monic divisor."""
    num = list(num)
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    dq = len(num) - len(den)
    if dq < 0:
        return [0], num
    q = [0] * (dq + 1)
    for i in range(dq, -1, -1):
        c = num[i + len(den) - 1]
        q[i] = c
        for j, dj in enumerate(den):
            num[i + j] -= c * dj
    rem = num[: len(den) - 1] or [0]
    return q, rem


def cyclotomic(d: int) -> list[int]:
    """Integer coefficients of the d-th cyclotomic polynomial, low degree first."""
    poly = [-1] + [0] * (d - 1) + [1]
    for e in range(1, d):
        if d % e == 0:
            poly, r = poly_divmod(poly, cyclotomic(e))
            assert not any(r)
    while len(poly) > 1 and poly[-1] == 0:
        poly.pop()
    return poly


def gcd_list(vals) -> int:
    g = 0
    for v in vals:
        g = gcd(g, int(v))
    return g
