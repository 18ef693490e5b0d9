"""Positive definite lattices in a rational ambient space."""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from math import isqrt, lcm

import numpy as np

from . import linalg as la
from ._accel import enumerate_short


class Lattice:
    """A lattice given by a basis (rows) in a rational ambient space.

    ``form`` is the ambient bilinear form (identity when omitted).  Instances
    are treated as immutable.
    """

    def __init__(self, basis, form=None):
        b = np.asarray(basis, dtype=object)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array of rows")
        self.basis = la.rmat(b)
        self.ambient_dim = b.shape[1]
        self.form = None if form is None else la.rmat(np.asarray(form, dtype=object))

    # -- basic data ---------------------------------------------------------------

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def ip(self, u, v):
        u = np.asarray(u, dtype=object)
        v = np.asarray(v, dtype=object)
        if self.form is None:
            return u.dot(v.T)
        return u.dot(self.form).dot(v.T)

    @cached_property
    def gram(self) -> np.ndarray:
        if self.rank == 0:
            return la.rmat([]).reshape(0, 0)
        return self.ip(self.basis, self.basis)

    @cached_property
    def det(self):
        return la.det(self.gram)

    @cached_property
    def gram_inverse(self) -> np.ndarray:
        return la.inverse(self.gram)

    def is_integral(self) -> bool:
        return la.is_integral(self.gram)

    def is_even(self) -> bool:
        return self.is_integral() and all(self.gram[i, i] % 2 == 0 for i in range(self.rank))

    def __repr__(self):
        return f"Lattice(rank={self.rank}, ambient_dim={self.ambient_dim}, det={self.det})"

    def to_json(self) -> dict:
        out = {"basis": [[str(x) for x in row] for row in self.basis]}
        if self.form is not None:
            out["form"] = [[str(x) for x in row] for row in self.form]
        out["gram"] = [[str(x) for x in row] for row in self.gram]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Lattice":
        basis = [[Fraction(x) for x in row] for row in data["basis"]]
        form = data.get("form")
        if form is not None:
            form = [[Fraction(x) for x in row] for row in form]
        L = cls(np.array(basis, dtype=object).reshape(len(basis), -1), form)
        if "gram" in data and any(Fraction(a) != b for ra, rb in zip(data["gram"], L.gram) for a, b in zip(ra, rb)):
            raise ValueError("stored Gram matrix does not match the basis")
        return L

    # -- coordinates ----------------------------------------------------------

    def coords(self, v) -> np.ndarray:
        """Rational coordinates of an ambient vector in the span of the basis."""
        v = np.asarray(v, dtype=object).reshape(-1)
        rhs = self.ip(self.basis, v).reshape(-1)
        x = self.gram_inverse.dot(rhs)
        if any(a != b for a, b in zip(x.dot(self.basis), v)):
            raise la.NoSolution("vector not in the span of the lattice")
        return x

    def contains(self, v) -> bool:
        try:
            x = self.coords(v)
        except la.NoSolution:
            return False
        return all(Fraction(a).denominator == 1 for a in x)

    def vector(self, x) -> np.ndarray:
        return np.asarray(x, dtype=object).dot(self.basis)

    def transport(self, mat_ambient) -> np.ndarray:
        """Matrix (row convention, basis coordinates) of an ambient linear map."""
        images = self.basis.dot(la.rmat(np.asarray(mat_ambient, dtype=object)))
        return self.ip(images, self.basis).dot(self.gram_inverse)

    # -- derived lattices -------------------------------------------------------

    def dual(self) -> "Lattice":
        return Lattice(self.gram_inverse.dot(self.basis), self.form)

    def scaled(self, c) -> "Lattice":
        return Lattice(self.basis * Fraction(c), self.form)

    def sublattice(self, int_rows) -> "Lattice":
        return Lattice(la.imat(np.asarray(int_rows, dtype=object).tolist()).dot(self.basis), self.form)

    def pairing_sublattice(self, vectors) -> "Lattice":
        """``{v in L : (v|w) in Z for every w in vectors}``."""
        W = np.atleast_2d(np.asarray(vectors, dtype=object))
        P = la.rmat(self.ip(self.basis, W)).reshape(self.rank, len(W))
        d = la.denominator(P)
        k = len(W)
        m = la.zeros(self.rank + k, k)
        m[: self.rank] = la.to_int(P * d)
        for i in range(k):
            m[self.rank + i, i] = d
        K = la.left_kernel_int(m)
        return self.sublattice(la.to_int(la.row_basis(la.rmat(K[:, : self.rank]))))

    def lll(self) -> "Lattice":
        if self.rank == 0:
            return self
        T, _ = la.lll_gram(self.gram)
        return Lattice(T.dot(self.basis), self.form)

    # -- enumeration ----------------------------------------------------------

    def short_vectors(self, bound, shift=None, include_zero=False):
        """All vectors ``v`` (of the coset ``shift + L`` if given) with ``(v|v) <= bound``.

        Returns a list of ``(ambient_vector, norm)`` in lexicographic order of
        the ambient coordinates.  Exact throughout.
        """
        coords, norms = self.short_coords(bound, shift=shift, include_zero=include_zero)
        off = None if shift is None else la.rmat(np.asarray(shift, dtype=object).reshape(-1))
        den = la.denominator(self.basis)
        if off is not None:
            den = lcm(den, la.denominator(off))
        bi = la.to_int(self.basis * den)
        if coords.dtype == np.int64 and max((abs(v) for v in bi.flat), default=0) < 2**20:
            scaled = (coords @ bi.astype(np.int64)).astype(object)
        else:
            scaled = np.asarray(coords, dtype=object).dot(bi)
        if off is not None:
            scaled = scaled + la.to_int(off * den)
        rows = sorted(zip(map(tuple, scaled.tolist()), norms))
        return [(la.rmat(list(r)) / den, nm) for r, nm in rows]

    def short_coords(self, bound, shift=None, include_zero=False):
        """Integer coordinate vectors ``x`` with ``Q(x + c) <= bound``.

        ``c`` is the coordinate vector of ``shift`` (projected into the span).
        Returns ``(coords: int64 array, norms: list[Fraction])`` in the
        enumeration order.
        """
        n = self.rank
        if n == 0:
            return np.zeros((0, 0), dtype=np.int64), []
        c = [Fraction(0)] * n
        if shift is not None:
            c = list(self.coords(shift))
        data = _fp_setup(self.gram, c, Fraction(bound))
        xs, scaled = enumerate_short(*data)
        scale = data[-1]
        norms = [Fraction(int(s), scale) for s in scaled]
        keep = np.ones(len(xs), dtype=bool)
        if not include_zero and shift is None:
            keep = np.any(xs != 0, axis=1) if len(xs) else keep
        xs = xs[keep]
        norms = [nm for nm, k in zip(norms, keep) if k]
        return xs, norms

    def minimum(self):
        """Minimal norm of a nonzero vector."""
        b = max(self.gram[i, i] for i in range(self.rank))
        vecs = self.short_coords(b)[1]
        return min(vecs)

    def is_rootless(self) -> bool:
        return not len(self.short_coords(2)[0])

    # -- comparisons -------------------------------------------------------------

    def same_as(self, other: "Lattice") -> bool:
        """Equality as point sets."""
        if self.rank != other.rank:
            return False
        return all(other.contains(b) for b in self.basis) and all(self.contains(b) for b in other.basis)

    def is_sublattice_of(self, other: "Lattice") -> bool:
        return all(other.contains(b) for b in self.basis)


def _fp_setup(gram, shift, bound: Fraction):
    """Integer data for the exact Fincke-Pohst kernel.

    Writes ``Q(x + c) = sum_i d_i (x_i - center_i)^2`` with
    ``center_i = -(s_i + sum_{j>i} mu_ij x_j)`` and rescales so that the kernel
    only needs integers: ``X_i = M x_i + Mmu_i . x + Ms_i`` and the condition
    becomes ``sum D_i X_i^2 <= budget``.
    """
    n = gram.shape[0]
    Q = [[Fraction(gram[i, j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            Q[j][i] = Q[i][j]
            Q[i][j] = Q[i][j] / Q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                Q[k][l] -= Q[k][i] * Q[i][l]
    d = [Q[i][i] for i in range(n)]
    if any(x <= 0 for x in d):
        raise ValueError("Gram matrix is not positive definite")
    mu = [[Q[i][j] if j > i else Fraction(0) for j in range(n)] for i in range(n)]
    s = [shift[i] + sum(mu[i][j] * shift[j] for j in range(i + 1, n)) for i in range(n)]
    M = 1
    for i in range(n):
        M = lcm(M, s[i].denominator, *(mu[i][j].denominator for j in range(i + 1, n)))
    P = bound.denominator
    for x in d:
        P = lcm(P, x.denominator)
    D = [int(x * P) for x in d]
    mu_s = [[int(mu[i][j] * M) for j in range(n)] for i in range(n)]
    s_s = [int(x * M) for x in s]
    budget = int(bound * P * M * M)
    return D, mu_s, s_s, M, budget, P * M * M


def short_vectors(L: Lattice, bound):
    return L.short_vectors(bound)


def dual(L: Lattice) -> Lattice:
    return L.dual()


def index_in(M: Lattice, L: Lattice) -> int:
    """Group index ``|M : L|`` for a full-rank sublattice ``L`` of ``M``."""
    if L.rank != M.rank:
        raise ValueError("lattices have different rank")
    if not L.is_sublattice_of(M):
        raise ValueError("L is not a sublattice of M")
    ratio = Fraction(L.det) / Fraction(M.det)
    r = isqrt(ratio.numerator)
    if ratio.denominator != 1 or r * r != ratio.numerator:
        raise ArithmeticError("determinant ratio is not a square integer")
    return r


def fixed_and_coinvariant(L: Lattice, g) -> tuple[Lattice, Lattice]:
    """Fixed-point sublattice ``L^g`` and its orthogonal complement ``L_g``.

    ``g`` is the isometry matrix in basis coordinates (row convention).
    """
    g = la.imat(np.asarray(g, dtype=object).tolist())
    n = L.rank
    fixed = la.left_kernel_int(g - la.identity(n))
    if fixed.shape[0] == 0:
        return Lattice(np.zeros((0, L.ambient_dim), dtype=object), L.form), L
    F = L.sublattice(fixed)
    # x in L with (x B | F) = 0  <=>  x @ (B Phi F^T) = 0
    pair = L.ip(L.basis, F.basis)
    co = la.left_kernel_int(la.to_int(pair * la.denominator(pair)))
    if co.shape[0] == 0:
        return F, Lattice(np.zeros((0, L.ambient_dim), dtype=object), L.form)
    return F, L.sublattice(co)
