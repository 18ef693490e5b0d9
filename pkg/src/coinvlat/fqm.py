"""Finite quadratic modules and their orthogonal groups."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm, prod

import numpy as np

from . import linalg as la
from .groups import Group, ModuleAction, backtrack_automorphisms, chain_from_search, schreier_sims


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def _reduce_q(Q) -> np.ndarray:
    """Diagonal mod 1, off-diagonal mod 1/2 (the values that matter)."""
    Q = la.rmat(np.asarray(Q, dtype=object))
    r = Q.shape[0]
    out = la.rmat(la.zeros(r, r))
    for i in range(r):
        for j in range(r):
            out[i, j] = Q[i, j] % 1 if i == j else Q[i, j] % Fraction(1, 2)
    return out


class FqModule:
    """``Z/d_1 x ... x Z/d_r`` with ``q(x) = x Q x^T mod 1``.

    ``orders`` are the orders of the chosen generators (no divisibility chain
    required); ``q_gram`` holds ``q(e_i)`` on the diagonal and half of the
    pairing ``b(e_i, e_j)`` off the diagonal, so ``b(x, y) = 2 x Q y^T mod 1``.
    """

    def __init__(self, orders, q_gram):
        self.orders = tuple(int(d) for d in orders)
        self.rank = len(self.orders)
        self.q_gram = _reduce_q(q_gram) if self.rank else la.rmat(la.zeros(0, 0))
        for i, di in enumerate(self.orders):
            if di < 1:
                raise ValueError("generator orders must be positive")
            if Fraction(di * di * self.q_gram[i, i]).denominator != 1:
                raise ValueError("q(d_i e_i) must vanish")
            for j in range(self.rank):
                if Fraction(2 * di * self.q_gram[i, j]).denominator != 1:
                    raise ValueError("b(d_i e_i, e_j) must vanish")
        self.level = la.denominator(self.q_gram) if self.rank else 1
        self._Qn = np.array(la.to_int(self.q_gram * self.level).tolist(), dtype=np.int64).reshape(self.rank, self.rank)
        self.action = ModuleAction(self.orders)

    # -- basic data ---------------------------------------------------------------

    @property
    def size(self) -> int:
        return prod(self.orders)

    @property
    def exponent(self) -> int:
        return lcm(1, *self.orders)

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        D, _, _ = la.snf(la.imat(np.diag(self.orders).tolist()) if self.rank else la.zeros(0, 0))
        return tuple(int(D[i, i]) for i in range(self.rank) if D[i, i] != 1)

    def structure(self) -> str:
        """Elementary-divisor string such as ``2^2 4^6`` or ``2^4 4^2 3^5``."""
        counts: dict[int, int] = {}
        for d in self.orders:
            for p in _prime_factors(d):
                pk = 1
                while d % (pk * p) == 0:
                    pk *= p
                counts[pk] = counts.get(pk, 0) + 1
        keys = sorted(counts, key=lambda q: (_prime_factors(q)[0], q))
        return " ".join(f"{q}^{counts[q]}" if counts[q] > 1 else f"{q}" for q in keys)

    def __repr__(self):
        return f"FqModule({self.structure() or 'trivial'}, |M|={self.size})"

    def elements(self) -> np.ndarray:
        return self.action.elements()

    def index_of(self, X) -> np.ndarray:
        return self.action.keys(self.action.normalize(np.atleast_2d(np.asarray(X, np.int64))))

    # -- form evaluation ------------------------------------------------------------

    def q_num(self, X) -> np.ndarray:
        """``level * q(x) mod level`` for each row."""
        X = np.atleast_2d(np.asarray(X, np.int64))
        return np.mod(np.einsum("mi,ij,mj->m", X, self._Qn, X), self.level)

    def b_num(self, X, Y) -> np.ndarray:
        """``level * b(x, y) mod level`` row by row (broadcasting ``Y``)."""
        X = np.atleast_2d(np.asarray(X, np.int64))
        Y = np.atleast_2d(np.asarray(Y, np.int64))
        return np.mod(2 * np.einsum("mi,ij,mj->m", X, self._Qn, np.broadcast_to(Y, X.shape)), self.level)

    def q(self, x) -> Fraction:
        return Fraction(int(self.q_num(x)[0]), self.level)

    def b(self, x, y) -> Fraction:
        return Fraction(int(self.b_num(x, y)[0]), self.level)

    def orders_of(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, np.int64))
        d = np.asarray(self.orders, np.int64)
        per = d // np.gcd(X, d)
        return np.lcm.reduce(per, axis=1) if self.rank else np.ones(len(X), np.int64)

    def is_nondegenerate(self) -> bool:
        X = self.elements()
        rad = np.ones(len(X), bool)
        for k in range(self.rank):
            rad &= self.b_num(X, self.action.unit(k)) == 0
        return int(rad.sum()) == 1

    def check_quadratic(self, sample: int | None = None, seed: int = 0) -> bool:
        """``q(x+y) - q(x) - q(y) = b(x, y)`` and ``q(kx) = k^2 q(x)``."""
        X = self.elements()
        if sample is not None and len(X) > sample:
            X = X[np.random.default_rng(seed).choice(len(X), sample, replace=False)]
        Y = np.roll(X, 1, axis=0)
        lhs = np.mod(self.q_num(self.action.normalize(X + Y)) - self.q_num(X) - self.q_num(Y), self.level)
        if not np.array_equal(lhs, self.b_num(X, Y)):
            return False
        for k in (2, 3, 5):
            if not np.array_equal(self.q_num(self.action.normalize(k * X)), np.mod(k * k * self.q_num(X), self.level)):
                return False
        return True

    # -- constructions ----------------------------------------------------------

    @classmethod
    def discriminant_of(cls, L) -> "DiscriminantForm":
        return DiscriminantForm(L)

    def orthogonal_sum(self, other: "FqModule") -> "FqModule":
        r, s = self.rank, other.rank
        Q = la.rmat(la.zeros(r + s, r + s))
        Q[:r, :r] = self.q_gram
        Q[r:, r:] = other.q_gram
        return FqModule(self.orders + other.orders, Q)

    def submodule_form(self, gens) -> "FqModule":
        """The form restricted to elements ``gens`` regarded as independent generators of the given orders."""
        G = np.atleast_2d(np.asarray(gens, np.int64))
        Q = la.rmat(G.tolist()).dot(self.q_gram).dot(la.rmat(G.T.tolist()))
        return FqModule([int(o) for o in self.orders_of(G)], Q)

    def to_json(self) -> dict:
        return {
            "orders": list(self.orders),
            "q_gram": [[str(v) for v in row] for row in self.q_gram],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FqModule":
        return cls(data["orders"], [[Fraction(v) for v in row] for row in data["q_gram"]])


class DiscriminantForm(FqModule):
    """``L*/L`` with ``q(v + L) = (v|v)/2``, generators read off the Smith form of the Gram matrix."""

    def __init__(self, L):
        G = L.gram
        if not L.is_even():
            raise ValueError("discriminant form needs an even lattice")
        Gi = la.to_int(G)
        D, U, V = la.snf(Gi)
        r = Gi.shape[0]
        keep = [i for i in range(r) if D[i, i] != 1]
        self.lattice = L
        ds = [int(D[i, i]) for i in keep]
        # generator i in L-coordinates (row): column i of V divided by d_i
        self.reps = la.rmat([[Fraction(int(V[k, i]), ds[n]) for k in range(r)] for n, i in enumerate(keep)]).reshape(len(keep), r)
        Vinv = la.inverse(V)
        self._extract = la.rmat([[Vinv[i, k] * ds[n] for k in range(r)] for n, i in enumerate(keep)]).reshape(len(keep), r)
        Q = self.reps.dot(la.rmat(G)).dot(self.reps.T) / 2 if keep else la.rmat(la.zeros(0, 0))
        super().__init__(ds, Q)

    def coords_of(self, y) -> np.ndarray:
        """Module coordinates of dual vectors given as rows of L-coordinates."""
        Y = la.rmat(np.atleast_2d(np.asarray(y, dtype=object)))
        Z = Y.dot(self._extract.T)
        Z = la.to_int(Z)
        return np.mod(np.array(Z.tolist(), np.int64).reshape(len(Y), self.rank), np.asarray(self.orders, np.int64))

    def induced_map(self, A) -> np.ndarray:
        """Matrix on module coordinates induced by an isometry ``A`` (L-coordinates, rows)."""
        img = self.reps.dot(la.imat(np.asarray(A, dtype=object)))
        return self.coords_of(img)


class QuotientForm(FqModule):
    """``Y/L`` for lattices ``L <= Y <= L*`` with ``q(y + L) = (y|y)/2``.

    Generators come from the Smith form of ``L``'s basis written in ``Y``-coordinates;
    ``reps`` holds them as ambient vectors.
    """

    def __init__(self, Y, L):
        if not L.is_even():
            raise ValueError("quotient form needs an even lattice L")
        C = la.rmat([Y.coords(v) for v in L.basis]).reshape(L.rank, Y.rank)
        if not la.is_integral(C):
            raise ValueError("L is not contained in Y")
        D, _, V = la.snf(la.to_int(C))
        r = Y.rank
        keep = [i for i in range(r) if D[i, i] != 1]
        Vinv = la.inverse(V)
        self.outer, self.inner = Y, L
        self._V = la.to_int(la.rmat(V[:, keep]).reshape(r, len(keep)))
        ds = [int(D[i, i]) for i in keep]
        self.reps = la.rmat(Vinv[keep]).reshape(len(keep), r).dot(Y.basis) if keep else la.zeros(0, Y.ambient_dim)
        if keep and not la.is_integral(Y.ip(self.reps, L.basis)):
            raise ValueError("Y is not contained in the dual of L")
        Q = la.rmat(Y.ip(self.reps, self.reps)) / 2 if keep else la.zeros(0, 0)
        super().__init__(ds, Q)

    def coords_of(self, v) -> np.ndarray:
        """Module coordinates of ambient vectors lying in ``Y``."""
        V = np.atleast_2d(np.asarray(v, dtype=object))
        rows = []
        for x in V:
            y = self.outer.coords(x)
            if not la.is_integral(y):
                raise la.NoSolution("vector not in Y")
            rows.append(la.to_int(y))
        Z = la.imat(rows).reshape(len(V), self.outer.rank).dot(self._V)
        return np.mod(np.array(Z.tolist(), np.int64).reshape(len(V), self.rank), np.asarray(self.orders, np.int64))


# ---------------------------------------------------------------------------
# maps
# ---------------------------------------------------------------------------


@dataclass
class FqMap:
    """Endomorphism of ``M`` given by generator images (row ``i`` is ``f(e_i)``)."""

    module: FqModule
    images: np.ndarray

    def __post_init__(self):
        self.images = self.module.action.normalize(np.asarray(self.images, np.int64).reshape(self.module.rank, self.module.rank))
        if not self.module.action.is_endomorphism(self.images):
            raise ValueError("generator images violate the generator orders")

    def __call__(self, X) -> np.ndarray:
        return self.module.action.apply(np.atleast_2d(X), self.images)

    def is_bijective(self) -> bool:
        img = self.module.index_of(self(self.module.elements()))
        return len(np.unique(img)) == self.module.size

    def is_orthogonal(self) -> bool:
        X = self.module.elements()
        return self.is_bijective() and bool(np.array_equal(self.module.q_num(self(X)), self.module.q_num(X)))

    def compose(self, other: "FqMap") -> "FqMap":
        """``self`` then ``other``."""
        return FqMap(self.module, self.module.action.mul(self.images, other.images))

    def permutation(self) -> np.ndarray:
        """Image index of every element (elements in key order)."""
        return self.module.index_of(self(self.module.elements()))


# ---------------------------------------------------------------------------
# primary decomposition
# ---------------------------------------------------------------------------


@dataclass
class PrimaryPart:
    p: int
    module: FqModule
    embed: np.ndarray  # rows: images of the part's generators in M-coordinates
    project: np.ndarray  # M-coordinates -> part coordinates (x @ project)


@dataclass
class PrimaryDecomposition:
    module: FqModule
    parts: list[PrimaryPart] = field(default_factory=list)

    def split(self, X) -> list[np.ndarray]:
        X = np.atleast_2d(np.asarray(X, np.int64))
        return [part.module.action.apply(X, part.project) for part in self.parts]

    def join(self, pieces) -> np.ndarray:
        total = 0
        for part, Y in zip(self.parts, pieces):
            total = total + np.atleast_2d(np.asarray(Y, np.int64)) @ part.embed
        return self.module.action.normalize(total)

    def lift(self, mats) -> np.ndarray:
        """Matrix on M from one matrix per part (block-diagonal in the decomposed basis)."""
        M = self.module
        rows = []
        for k in range(M.rank):
            e = M.action.unit(k)[None]
            pieces = [part.module.action.apply(Y, A) for Y, A, part in zip(self.split(e), mats, self.parts)]
            rows.append(self.join(pieces)[0])
        return np.array(rows, np.int64).reshape(M.rank, M.rank)

    def restrict(self, X) -> list[np.ndarray]:
        """Inverse of :meth:`lift`: the matrix of ``X`` on each part."""
        out = []
        for i, part in enumerate(self.parts):
            pieces = [np.zeros((part.module.rank, q.module.rank), np.int64) for q in self.parts]
            pieces[i] = np.eye(part.module.rank, dtype=np.int64)
            Y = self.module.action.apply(self.join(pieces), X)
            out.append(part.module.action.normalize(self.split(Y)[i]))
        return out


def primary_decompose(M: FqModule) -> PrimaryDecomposition:
    """Split ``M`` into orthogonal p-primary parts."""
    out = PrimaryDecomposition(M)
    primes = sorted({p for d in M.orders for p in _prime_factors(d)})
    for p in primes:
        gens, orders, proj_cols = [], [], []
        for i, d in enumerate(M.orders):
            pk = 1
            while d % (pk * p) == 0:
                pk *= p
            if pk == 1:
                continue
            cof = d // pk
            g = np.zeros(M.rank, np.int64)
            g[i] = cof
            gens.append(g)
            orders.append(pk)
            col = np.zeros(M.rank, np.int64)
            col[i] = pow(cof, -1, pk)
            proj_cols.append(col)
        embed = np.array(gens, np.int64).reshape(len(gens), M.rank)
        Q = la.rmat(embed.tolist()).reshape(len(gens), M.rank).dot(M.q_gram).dot(la.rmat(embed.T.tolist()).reshape(M.rank, len(gens)))
        part = FqModule(orders, Q)
        out.parts.append(PrimaryPart(p, part, embed, np.array(proj_cols, np.int64).reshape(len(gens), M.rank).T.copy()))
    return out


# ---------------------------------------------------------------------------
# census and orbits
# ---------------------------------------------------------------------------


def isotropic_census(M: FqModule, k: int) -> np.ndarray:
    """All elements with ``q(x) = 0`` and order exactly ``k`` (rows, key order)."""
    X = M.elements()
    sel = (M.q_num(X) == 0) & (M.orders_of(X) == k)
    return X[sel]


def orbits(G: Group, S) -> list[np.ndarray]:
    """Orbit partition of a G-invariant point set (lists of row indices of ``S``)."""
    return G.orbits(S)


# ---------------------------------------------------------------------------
# orthogonal groups
# ---------------------------------------------------------------------------


def _heights(M: FqModule, p: int, X) -> np.ndarray:
    """Largest ``h`` with ``x in p^h M`` (large sentinel for 0)."""
    X = np.asarray(X, np.int64)
    big = 64
    v = np.full(X.shape, big, np.int64)
    for j, d in enumerate(M.orders):
        col = X[:, j]
        vv = np.full(len(col), big, np.int64)
        nz = col % d != 0
        c = col[nz]
        e = np.zeros(len(c), np.int64)
        while True:
            m = (c % p == 0) & (c != 0)
            if not m.any():
                break
            e[m] += 1
            c = np.where(m, c // p, c)
        vv[nz] = e
        v[:, j] = vv
    return v.min(axis=1)


def _fingerprints(M: FqModule, focus=None) -> np.ndarray:
    """Automorphism invariants of every element: order, q, height and the q-histogram of its p-th roots."""
    X = M.elements()
    ords = M.orders_of(X)
    qn = M.q_num(X)
    cols = [ords, qn]
    for p in _prime_factors(M.exponent):
        cols.append(_heights(M, p, X))
        tgt = M.index_of(p * X)
        # histogram of q over the preimages of each element under multiplication by p
        pairs = tgt * M.level + qn
        uniq, cnt = np.unique(pairs, return_counts=True)
        hist_hash = np.zeros(M.size, np.int64)
        with np.errstate(over="ignore"):
            contrib = (uniq % M.level + 1) * 1_000_003 + cnt * 7919
            contrib = contrib * (contrib + 0x9E3779B1)
            np.add.at(hist_hash, uniq // M.level, contrib)
        cols.append(hist_hash)
    F = np.stack(cols, axis=1)
    _, inv = np.unique(F, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    return inv if focus is None else _refine(M, X, inv, focus)


def _refine(M: FqModule, X, fp, focus, chunk: int = 1024) -> np.ndarray:
    """One colour-refinement round on the classes of the ``focus`` elements.

    Rows in those classes are split by the multiset of ``(class(y), b(x, y))``
    over all ``y``; multisets are compared through sums of random 64-bit keys,
    so isometric elements always agree and distinct multisets separate with
    overwhelming probability.  Other rows keep their class.
    """
    rows = np.nonzero(np.isin(fp, fp[np.asarray(focus)]))[0]
    rng = np.random.default_rng(0x5EED)
    table = rng.integers(1, 1 << 62, size=(int(fp.max()) + 1) * M.level, dtype=np.int64)
    XQ = 2 * X[rows] @ M._Qn
    Xt = X.T.copy()
    base = fp[None, :] * M.level
    sig = np.zeros(len(X), np.int64)
    with np.errstate(over="ignore"):
        for lo in range(0, len(rows), chunk):
            B = np.mod(XQ[lo : lo + chunk] @ Xt, M.level)
            sig[rows[lo : lo + chunk]] = table[base + B].sum(axis=1)
    _, new = np.unique(np.stack([fp, sig], axis=1), axis=0, return_inverse=True)
    return new.reshape(-1)


@dataclass
class OrthogonalGroupResult:
    module: FqModule
    group: Group
    order: int
    parts: list = field(default_factory=list)  # (p, part module, Group, order)
    decomposition: PrimaryDecomposition | None = None


def _orthogonal_group_primary(M: FqModule, log=None):
    X = M.elements()
    base_idx = [int(M.index_of(M.action.unit(k))[0]) for k in range(M.rank)]
    fp = _fingerprints(M, focus=base_idx)

    def pair(y):
        return M.b_num(X, X[y])

    res = backtrack_automorphisms(M.action, X, base_idx, pair, fp, log=log)
    chain = chain_from_search(M.action, res)
    G = Group(M.action, res.gens, res.invs, base=chain.base, chain=chain)
    return G, res.order


def orthogonal_group(M: FqModule, log=None, seed: int = 0) -> OrthogonalGroupResult:
    """``O(M, q)`` computed prime by prime and reassembled on ``M``'s coordinates."""
    if M.rank == 0:
        return OrthogonalGroupResult(M, Group(M.action, [], []), 1)
    dec = primary_decompose(M)
    parts = []
    for part in dec.parts:
        G, order = _orthogonal_group_primary(part.module, log=log)
        parts.append((part.p, part.module, G, order))
    total = prod(o for *_, o in parts)
    if len(parts) == 1 and np.array_equal(dec.parts[0].embed, np.eye(M.rank, dtype=np.int64)):
        G = parts[0][2]
        return OrthogonalGroupResult(M, G, total, parts, dec)
    gens = []
    ident = [part.module.action.identity() for part in dec.parts]
    for k, (_, _, Gp, _) in enumerate(parts):
        for A in Gp.gens:
            mats = list(ident)
            mats[k] = A
            gens.append(dec.lift(mats))
    base = [dec.join([(part.module.action.unit(j)[None] if n == k else np.zeros((1, part.module.rank), np.int64)) for n, part in enumerate(dec.parts)])[0] for k, part in enumerate(dec.parts) for j in range(part.module.rank)]
    G = Group(M.action, gens, base=base, seed=seed, upper_bound=total)
    return OrthogonalGroupResult(M, G, total, parts, dec)


def orthogonal_group_bruteforce(M: FqModule) -> int:
    """Count isometries by enumerating generator-image tuples (small modules only).

    Images are chosen generator by generator, keeping only those with the right
    order, ``q`` value and pairings with the images already chosen.
    """
    X = M.elements()
    qn = M.q_num(X)
    ords = M.orders_of(X)
    E = np.eye(M.rank, dtype=np.int64)
    bE = [[M.b_num(E[i : i + 1], E[j : j + 1])[0] for j in range(M.rank)] for i in range(M.rank)]
    cands = [np.nonzero((ords == M.orders_of(E[k : k + 1])[0]) & (qn == M.q_num(E[k : k + 1])[0]))[0] for k in range(M.rank)]
    count = 0

    def rec(k, chosen):
        nonlocal count
        if k == M.rank:
            f = FqMap(M, X[chosen])
            if f.is_bijective() and np.array_equal(M.q_num(f(X)), qn):
                count += 1
            return
        ok = np.ones(len(cands[k]), bool)
        for i, y in enumerate(chosen):
            ok &= M.b_num(X[cands[k]], X[y][None]) == bE[k][i]
        for y in cands[k][ok]:
            rec(k + 1, chosen + [int(y)])

    rec(0, [])
    return count


def image_and_index(H, M: FqModule, full_order: int | None = None, seed: int = 0):
    """Subgroup of ``O(M)`` generated by the maps ``H`` and its index in ``O(M)``."""
    mats = []
    for f in H:
        f = f if isinstance(f, FqMap) else FqMap(M, f)
        if not f.is_orthogonal():
            raise ValueError("map does not preserve q")
        mats.append(f.images)
    if full_order is None:
        full_order = orthogonal_group(M).order
    if mats:
        chain = schreier_sims(M.action, mats, seed=seed)
        G = Group(M.action, mats, chain=chain)
    else:
        G = Group(M.action, [], [])
    order = G.order()
    if full_order % order:
        raise AssertionError("subgroup order does not divide the group order")
    return G, full_order // order
