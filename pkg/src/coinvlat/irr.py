"""The quadratic space of irreducible-module labels of the cyclic orbifold.

Two layouts are supported.  In the *plain* layout a label is
``(lambda, i, j)`` with ``lambda`` in ``D(L)`` and ``i, j`` mod ``n``, and

    q(lambda, i, j) = (lambda|lambda)/2 + ij/n.

In the *doubled* layout (``g`` lifts to an automorphism of order ``2n``) a
label is ``(lambda, i, j)`` with ``lambda`` in ``Y/L`` and ``i, j`` mod ``2n``:

    q(lambda, i, j) = (lambda|lambda)/2 + ij/(2n) + (3/4) * ((i + j) mod 2).

Module rows are always ``[lambda coordinates..., i, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from . import linalg as la
from .fqm import DiscriminantForm, FqMap, FqModule, QuotientForm, primary_decompose
from .glue import BConstruction
from .lattice import Lattice

PLAIN = "plain"
DOUBLED = "doubled"


@dataclass
class DoubledFrame:
    """The vectors ``h`` and ``u`` and the lattice ``Y = {v in L* : (v|u), (v|h) in Z}``."""

    h: np.ndarray
    u: np.ndarray
    Y: Lattice
    widened: bool = False

    def check(self, L: Lattice) -> None:
        ip = L.ip
        if ip(self.h, self.h) != 2 or ip(self.u, self.u) != Fraction(3, 2) or ip(self.u, self.h) != Fraction(1, 2):
            raise AssertionError("h, u do not have the required inner products")
        Ld = L.dual()
        for v in (self.h, self.u):
            if not Ld.contains(v):
                raise AssertionError("h and u must lie in the dual lattice")
        if abs(Ld.det / self.Y.det) != Fraction(1, 16):
            raise AssertionError("L*/Y is not of order 4")
        if self.Y.contains(self.h) or self.Y.contains(self.u) or self.Y.contains(self.h + self.u):
            raise AssertionError("u + Y and h + Y do not generate a Klein four-group")


@dataclass
class IrrSpace:
    bc: BConstruction
    case: str
    lam: FqModule
    module: FqModule
    frame: DoubledFrame | None = None

    @property
    def n(self) -> int:
        return self.bc.n

    @property
    def m(self) -> int:
        """Modulus of the ``(i, j)`` coordinates."""
        return self.n if self.case == PLAIN else 2 * self.n

    @property
    def lam_rank(self) -> int:
        return self.lam.rank

    def label(self, lam=None, i: int = 0, j: int = 0) -> np.ndarray:
        x = np.zeros(self.module.rank, np.int64)
        if lam is not None:
            x[: self.lam_rank] = np.asarray(lam, np.int64)
        x[-2], x[-1] = i, j
        return self.module.action.normalize(x[None])[0]

    def split(self, X):
        X = np.atleast_2d(X)
        return X[:, : self.lam_rank], X[:, -2], X[:, -1]

    def vacuum_label(self) -> np.ndarray:
        """Label of the weight-one untwisted component, ``V_L(1)``."""
        return self.label(i=0, j=1 if self.case == PLAIN else 2)

    def gamma_bar(self) -> np.ndarray:
        if self.case != PLAIN:
            raise ValueError("gamma is addressed in the plain layout only")
        return self.lam.coords_of(self.bc.L.coords(self.bc.gamma))[0]


def _ij_block(m: int, doubled: bool) -> FqModule:
    if doubled:
        off = Fraction(1, 2 * m) + Fraction(1, 4)
        return FqModule((m, m), [[Fraction(3, 4), off], [off, Fraction(3, 4)]])
    half = Fraction(1, 2 * m)
    return FqModule((m, m), [[0, half], [half, 0]])


def build_irr_plain(bc: BConstruction) -> IrrSpace:
    if bc.spec.doubled:
        raise ValueError(f"class {bc.spec.name} needs the doubled layout")
    D = bc.discriminant
    M = D.orthogonal_sum(_ij_block(bc.n, False))
    return IrrSpace(bc, PLAIN, D, M)


def _a1_roots(bc: BConstruction):
    """Positive roots ``e_a - e_{a+1}`` of every rank-one block, in block order."""
    out, off = [], 0
    for k in bc.spec.ks:
        if k == 2:
            v = la.rmat([0] * bc.spec.ambient_dim)
            v[off], v[off + 1] = 1, -1
            out.append(v)
        off += k
    return out


def _frame_candidates(bc: BConstruction, h):
    """Norm 3/2 vectors ``u`` of ``L*`` in ``(n/2) chi + N*`` with ``2u`` in ``L``,
    negated by ``g^(n/2)`` and with ``(u|h) = +-1/2``; lexicographic order."""
    L, n = bc.L, bc.n
    half = bc.chi * Fraction(n, 2)
    Nd = bc.N.dual()
    gp = np.linalg.matrix_power(np.asarray(bc.g_ambient, dtype=object), n // 2)
    out = []
    for v, nm in L.dual().short_vectors(Fraction(3, 2)):
        if nm != Fraction(3, 2) or abs(L.ip(v, h)) != Fraction(1, 2):
            continue
        if not (L.contains(2 * v) and Nd.contains(v - half)):
            continue
        if any(a != -b for a, b in zip(v.dot(gp), v)):
            continue
        out.append(v)
    return out


def doubled_frame(bc: BConstruction) -> DoubledFrame:
    """``h`` is the first rank-one block root in ``(n/2) gamma + L``.

    ``u`` is the lex-least norm 3/2 vector of ``(n/2) chi + L``; when that
    coset has larger minimum, the search widens to ``(n/2) chi + N*`` under the
    conditions of :func:`_frame_candidates`.
    """
    L, n = bc.L, bc.n
    shift = bc.gamma * Fraction(n, 2)
    hs = [h for h in _a1_roots(bc) if L.contains(h - shift)]
    if not hs:
        raise AssertionError("no rank-one block root lies in (n/2) gamma + L")
    h = hs[0]
    us = [v for v, nm in L.short_vectors(Fraction(3, 2), shift=bc.chi * Fraction(n, 2)) if nm == Fraction(3, 2)]
    widened = not us
    if widened:
        us = _frame_candidates(bc, h)
    if not us:
        raise AssertionError("no vector u of norm 3/2 found")
    u = us[0]
    s = L.ip(u, h)
    if s == Fraction(-1, 2):
        h = -h
    elif s != Fraction(1, 2):
        raise AssertionError(f"(u|h) = {s}, expected +-1/2")
    Y = L.dual().pairing_sublattice(np.vstack([u, h]))
    frame = DoubledFrame(h, u, Y, widened)
    frame.check(L)
    return frame


def build_irr_doubled(bc: BConstruction) -> IrrSpace:
    if not bc.spec.doubled:
        raise ValueError(f"class {bc.spec.name} uses the plain layout")
    frame = doubled_frame(bc)
    lam = QuotientForm(frame.Y, bc.L)
    M = lam.orthogonal_sum(_ij_block(2 * bc.n, True))
    return IrrSpace(bc, DOUBLED, lam, M, frame)


def build_irr(bc: BConstruction) -> IrrSpace:
    return build_irr_doubled(bc) if bc.spec.doubled else build_irr_plain(bc)


# ---------------------------------------------------------------------------
# distinguished sets
# ---------------------------------------------------------------------------


def sg_set(S: IrrSpace) -> np.ndarray:
    """Rows of ``S_g`` in key order."""
    M = S.module
    X = M.elements()
    if S.case == PLAIN:
        return X[(M.q_num(X) == 0) & (M.orders_of(X) == S.n)]
    A = X[M.orders_of(X) == 2 * S.n]
    Y = M.action.normalize(2 * A)
    Y = Y[M.q_num(Y) == 0]
    keys, first = np.unique(M.index_of(Y), return_index=True)
    return Y[first]


def sg_split(S: IrrSpace):
    """``(S_g(2), S_g(p))`` for the doubled layout, as rows of ``M``."""
    if S.case != DOUBLED:
        raise ValueError("the split is defined for the doubled layout")
    M = S.module
    dec = primary_decompose(M)
    out = {}
    for part in dec.parts:
        P = part.module
        X = P.elements()
        if part.p == 2:
            A = X[P.orders_of(X) == 4]
            Y = P.action.normalize(2 * A)
            Y = Y[P.q_num(Y) == 0]
            _, first = np.unique(P.index_of(Y), return_index=True)
            Y = Y[first]
        else:
            Y = X[(P.orders_of(X) == part.p) & (P.q_num(X) == 0)]
        out[part.p] = M.action.normalize(Y @ part.embed)
    p = S.n // 2
    return out[2], out[p]


# ---------------------------------------------------------------------------
# label permutations of known automorphisms
# ---------------------------------------------------------------------------


def sigma_label_action(S: IrrSpace, alpha) -> FqMap:
    """Label map of the inner automorphism attached to ``alpha`` in ``L*`` (ambient vector).

    On the untwisted sector ``(lambda, 0, j) -> (lambda, 0, j - n b(alpha, lambda))``; a
    twisted sector ``i`` is moved to ``lambda + i alpha``.  The ``j``-shift
    ``- i n q(alpha)`` on twisted labels is the unique linear choice that
    keeps ``q``; it needs ``n q(alpha)`` integral, which holds for every
    element of ``D(L)`` in the plain classes.
    """
    if S.case != PLAIN:
        raise ValueError("sigma_label_action is defined for the plain layout")
    D, M, n = S.lam, S.module, S.n
    a = D.coords_of(S.bc.L.coords(la.rmat(alpha)))[0]
    qa = D.q(a)
    if (qa * n).denominator != 1:
        raise ValueError("n q(alpha) is not integral; the twisted sectors admit no linear extension")
    c = int(qa * n)
    r = D.rank
    images = np.zeros((M.rank, M.rank), np.int64)
    for k in range(r):
        e = D.action.unit(k)
        s = D.b(a, e) * n
        images[k, k] = 1
        images[k, r + 1] = -int(s)
    images[r, :r] = a
    images[r, r] = 1
    images[r, r + 1] = -c
    images[r + 1, r + 1] = 1
    return FqMap(M, images)


@dataclass
class PartialLabelMap:
    """A map given on an explicit list of labels."""

    module: FqModule
    domain: np.ndarray
    image: np.ndarray

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, np.int64))
        keys = self.module.index_of(self.domain)
        where = {int(k): t for t, k in enumerate(keys)}
        out = []
        for k in self.module.index_of(X):
            if int(k) not in where:
                raise KeyError("label outside the domain")
            out.append(self.image[where[int(k)]])
        return np.array(out, np.int64).reshape(len(X), self.module.rank)

    def preserves_q(self) -> bool:
        return bool(np.array_equal(self.module.q_num(self.domain), self.module.q_num(self.image)))

    def is_injective(self) -> bool:
        return len(np.unique(self.module.index_of(self.image))) == len(self.image)


def hk_untwisted_action(S: IrrSpace, k: int) -> PartialLabelMap:
    """``(j gamma, 0, i) -> (i gamma, 0, ik - j)`` on the subgroup generated by ``gamma`` and ``(0, 0, 1)``."""
    if S.case != PLAIN:
        raise ValueError("hk_untwisted_action is defined for the plain layout")
    n = S.n
    gb = S.gamma_bar()
    dom, img = [], []
    for j in range(n):
        for i in range(n):
            dom.append(S.label(j * gb, 0, i))
            img.append(S.label(i * gb, 0, i * k - j))
    return PartialLabelMap(S.module, np.array(dom), np.array(img))


# ---------------------------------------------------------------------------
# twisted-sector vacuum anomaly
# ---------------------------------------------------------------------------


def eigen_dimensions(A, m: int) -> list[int]:
    """``dim`` of the ``exp(2 pi i j/m)``-eigenspace of an integer matrix of order dividing ``m``."""
    cp = la.charpoly(A)
    mult = {}
    for d in range(1, m + 1):
        if m % d:
            continue
        phi = la.cyclotomic(d)
        e = 0
        p = cp
        while True:
            q, r = la.poly_divmod(p, phi)
            if any(r):
                break
            p, e = q, e + 1
        mult[d] = e
    return [mult[m // gcd(j, m)] for j in range(m)]


def vacuum_anomaly(bc: BConstruction, i: int) -> Fraction:
    """``(1/4m^2) sum_j j(m-j) dim h_(j)`` for the fixed-point-free power ``g^i``."""
    n = bc.n
    if gcd(i, n) != 1:
        raise ValueError("only powers coprime to n are supported")
    A = np.linalg.matrix_power(np.asarray(bc.g, dtype=object), i % n)
    dims = eigen_dimensions(A, n)
    return sum((Fraction(j * (n - j) * dims[j]) for j in range(1, n)), Fraction(0)) / (4 * n * n)


def twisted_q_values(S: IrrSpace, i: int) -> set[Fraction]:
    """``{q((0, i, j))}`` over all ``j``."""
    M = S.module
    return {M.q(S.label(None, i, j)) for j in range(S.m)}
