"""Root-block glue construction of the coinvariant lattices.

Every ``A_{k-1}`` block lives in ``Z^k`` as the sum-zero sublattice with the
standard form.  A glue digit ``d`` in a block stands for the class of the
fundamental weight ``lambda_d``, represented by ``d * lambda_1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

import numpy as np

from . import linalg as la
from .lattice import Lattice


@dataclass(frozen=True)
class RootBlock:
    """The root lattice ``A_{k-1}`` inside ``Z^k``."""

    k: int

    @property
    def rank(self) -> int:
        return self.k - 1

    def simple_roots(self) -> np.ndarray:
        r = la.zeros(self.k - 1, self.k)
        for i in range(self.k - 1):
            r[i, i], r[i, i + 1] = 1, -1
        return la.rmat(r)

    def fundamental_weight(self, j: int) -> np.ndarray:
        """``lambda_j`` for ``0 <= j < k`` (``lambda_0 = 0``)."""
        j %= self.k
        return la.rmat([Fraction(int(i < j)) - Fraction(j, self.k) for i in range(self.k)])

    def weyl_vector(self) -> np.ndarray:
        return la.rmat([Fraction(self.k - 1 - 2 * i, 2) for i in range(self.k)])

    def coxeter(self) -> np.ndarray:
        """Coxeter element ``r_1 r_2 ... r_{k-1}`` acting on row vectors of ``Z^k``.

        It is the cyclic coordinate shift ``e_i -> e_{i+1}`` (indices mod k).
        """
        m = la.zeros(self.k, self.k)
        for i in range(self.k):
            m[i, (i + 1) % self.k] = 1
        return m


def _reflection(alpha) -> np.ndarray:
    a = la.rmat(alpha).reshape(1, -1)
    n = a.shape[1]
    return la.rmat(la.identity(n)) - Fraction(2) / a.dot(a.T)[0, 0] * a.T.dot(a)


def block_diag(*mats) -> np.ndarray:
    r = sum(m.shape[0] for m in mats)
    c = sum(m.shape[1] for m in mats)
    out = la.zeros(r, c)
    i = j = 0
    for m in mats:
        out[i : i + m.shape[0], j : j + m.shape[1]] = m
        i += m.shape[0]
        j += m.shape[1]
    return out


@dataclass(frozen=True)
class GlueSpec:
    """Block sizes ``k_i`` of the ``A_{k_i - 1}`` components and one glue word."""

    name: str
    ks: tuple[int, ...]
    digits: tuple[int, ...]
    doubled: bool = False

    def __post_init__(self):
        if len(self.ks) != len(self.digits):
            raise ValueError("one glue digit per block required")
        if any(k < 2 for k in self.ks):
            raise ValueError("blocks need k >= 2")
        if any(gcd(d, k) != 1 for k, d in zip(self.ks, self.digits)):
            raise ValueError("every glue digit must be a unit modulo its block size")

    @property
    def n(self) -> int:
        return lcm(*self.ks)

    @property
    def blocks(self) -> tuple[RootBlock, ...]:
        return tuple(RootBlock(k) for k in self.ks)

    @property
    def ambient_dim(self) -> int:
        return sum(self.ks)

    def root_type(self) -> str:
        parts = []
        for k in sorted(set(self.ks), reverse=True):
            c = self.ks.count(k)
            parts.append(f"A{k - 1}" + (f"^{c}" if c > 1 else ""))
        return " ".join(parts)


TABLE2: dict[str, GlueSpec] = {
    "4C": GlueSpec("4C", (4, 4, 4, 4, 2, 2), (1, 1, 1, 1, 1, 1)),
    "6E": GlueSpec("6E", (6, 6, 3, 3, 2, 2), (1, 1, 1, 1, 1, 1)),
    "6G": GlueSpec("6G", (6, 6, 6, 2, 2, 2), (1, 1, 1, 1, 1, 1), doubled=True),
    "8E": GlueSpec("8E", (8, 8, 4, 2), (1, 3, 1, 1)),
    "10F": GlueSpec("10F", (10, 10, 2, 2), (1, 3, 1, 1), doubled=True),
}


@dataclass
class BConstruction:
    """Everything derived from one glue specification.

    ``L`` is LLL-reduced and ``g`` is given on its basis (row convention);
    ``g_ambient`` acts on row vectors of the ambient space.
    """

    spec: GlueSpec
    R: Lattice
    N: Lattice
    L: Lattice
    chi: np.ndarray
    gamma: np.ndarray
    lambda_e: np.ndarray
    g_ambient: np.ndarray
    g: np.ndarray
    glue_vector: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.spec.n

    @cached_property
    def discriminant(self):
        from .fqm import FqModule

        return FqModule.discriminant_of(self.L)

    def g_order(self) -> int:
        I = la.identity(self.L.rank)
        A = la.imat(self.g.tolist())
        P = A.copy()
        for k in range(1, 4 * self.n + 1):
            if np.array_equal(P, I):
                return k
            P = P.dot(A)
        raise ArithmeticError("g has no small finite order")

    def fixed_point_free(self) -> bool:
        """``g - 1`` is invertible on the ambient span of ``L``."""
        A = la.rmat(self.g.tolist()) - la.rmat(la.identity(self.L.rank).tolist())
        return la.det(A) != 0

    def one_minus_g_dual(self) -> Lattice:
        """``(1 - g) L*`` as a lattice in the ambient space."""
        Ld = self.L.dual()
        imgs = Ld.basis - Ld.basis.dot(self.g_ambient)
        return Lattice(la.row_basis(imgs))

    def checks(self) -> dict[str, bool]:
        L = self.L
        img = self.one_minus_g_dual()
        return {
            "N_even": self.N.is_even(),
            "L_even": L.is_even(),
            "rootless": L.is_rootless(),
            "g_order_n": self.g_order() == self.n,
            "fixed_point_free": self.fixed_point_free(),
            "chi_in_N_dual_over_n": _chi_condition(self.N, self.chi, self.n),
            "lambda_e_norm_even": Fraction(self.R.ip(self.lambda_e, self.lambda_e)) % 2 == 0,
            "gamma_pairing": (Fraction(self.N.ip(self.gamma, self.chi)) - Fraction(1, self.n)) % 1 == 0,
            "index_N_L": abs(L.det / self.N.det) == self.n**2,
            "one_minus_g_dual_in_L": img.is_sublattice_of(L),
            "one_minus_g_dual_is_L": img.same_as(L),
            "eq_gchi": verify_eq_gchi(self),
        }

    def to_json(self) -> dict:
        return {
            "class": self.spec.name,
            "ks": list(self.spec.ks),
            "digits": list(self.spec.digits),
            "n": self.n,
            "L": self.L.to_json(),
            "N": self.N.to_json(),
            "chi": [str(x) for x in self.chi],
            "gamma": [str(x) for x in self.gamma],
            "lambda_e": [str(x) for x in self.lambda_e],
            "g": [[int(x) for x in row] for row in self.g],
        }


def build_block(k: int) -> RootBlock:
    return RootBlock(k)


def glue_vector(spec: GlueSpec) -> np.ndarray:
    parts = [RootBlock(k).fundamental_weight(1) * d for k, d in zip(spec.ks, spec.digits)]
    return np.concatenate(parts)


def _integer_kernel_mod(weights, modulus) -> np.ndarray:
    """Basis of ``{x in Z^r : sum w_i x_i = 0 mod n}`` as integer rows."""
    r = len(weights)
    m = la.zeros(r + 1, 1)
    for i, w in enumerate(weights):
        m[i, 0] = int(w)
    m[r, 0] = modulus
    K = la.left_kernel_int(m)
    return la.row_basis(la.rmat(K[:, :r]))


def build_LA_LB(spec: GlueSpec, gamma_choice: int = 0) -> BConstruction:
    """``gamma_choice`` selects among the shortest valid ``gamma`` in lexicographic order."""
    blocks = spec.blocks
    d = spec.ambient_dim
    R = Lattice(block_diag(*[b.simple_roots() for b in blocks]))
    c = glue_vector(spec)
    N = Lattice(la.row_basis(np.vstack([R.basis, c.reshape(1, -1)])))
    chi = np.concatenate([b.weyl_vector() / b.k for b in blocks])
    n = spec.n
    if not N.is_even():
        raise ArithmeticError(f"glue code {spec.digits} gives an odd lattice N")
    if not _chi_condition(N, chi, n):
        raise ArithmeticError("assumption (i) fails: chi is not in (1/n) N*")
    # L = {v in N : (v | chi) in Z}
    w = N.ip(N.basis, chi)
    rows = _integer_kernel_mod([x * n for x in w], n)
    L = N.sublattice(rows).lll()
    lam = np.concatenate([b.fundamental_weight(e) for b, e in zip(blocks, spec.digits)])
    if Fraction(R.ip(lam, lam)) % 2 != 0:
        raise ArithmeticError("assumption (ii) fails: lambda_e has odd norm")
    g_amb = block_diag(*[np.linalg.matrix_power(b.coxeter(), e % b.k) if e % b.k else la.identity(b.k) for b, e in zip(blocks, spec.digits)])
    g_amb = la.imat(g_amb)
    gL = L.transport(g_amb)
    if not la.is_integral(gL):
        raise ArithmeticError("g does not preserve L")
    gL = la.to_int(gL)
    gamma = _find_gamma(N, chi, n, gamma_choice)
    bc = BConstruction(spec, R, N, L, chi, gamma, lam, g_amb, gL, c)
    assert d == L.ambient_dim
    return bc


def _chi_condition(N: Lattice, chi, n: int) -> bool:
    return all(Fraction(x * n).denominator == 1 for x in N.ip(N.basis, chi))


def _find_gamma(N: Lattice, chi, n: int, choice: int = 0) -> np.ndarray:
    """Shortest vectors of ``N`` with ``(gamma|chi) = 1/n mod 1``, lexicographically; returns entry ``choice``."""
    target = Fraction(1, n)
    bound = 2
    while True:
        cands = [
            (nm, tuple(v))
            for v, nm in N.short_vectors(bound)
            if (Fraction(N.ip(v, chi)) - target) % 1 == 0
        ]
        if cands:
            best = min(nm for nm, _ in cands)
            vecs = sorted(v for nm, v in cands if nm == best)
            if choice >= len(vecs):
                raise IndexError(f"only {len(vecs)} shortest choices of gamma")
            return la.rmat(list(vecs[choice]))
        bound *= 2


def verify_eq_gchi(bc: BConstruction) -> bool:
    """``g`` acts on ``chi`` through the glue weight: ``g(chi) - chi + lambda_e`` lies in ``R``."""
    gchi = bc.chi.dot(bc.g_ambient)
    return bc.R.contains(gchi - bc.chi + bc.lambda_e)


def table2_build(name: str, gamma_choice: int = 0) -> BConstruction:
    return build_LA_LB(TABLE2[name], gamma_choice)
