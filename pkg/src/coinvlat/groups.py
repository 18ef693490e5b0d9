"""Stabilizer chains for finite groups acting linearly on integer points.

Group elements are square int64 matrices acting on row vectors, ``x -> x @ A``
(right action; ``a * b`` means apply ``a`` first).  Two kinds of point space
are supported:

* :class:`LatticeAction` -- integer coordinate vectors of a lattice; the
  group preserves a positive definite Gram matrix.
* :class:`ModuleAction` -- elements of ``Z/d_1 x ... x Z/d_r`` written in
  coordinates, arithmetic reduced mod ``d_j`` column by column.

Permutation groups on ``{0..n-1}`` are the special case of permutation
matrices acting on unit vectors (:meth:`Group.from_perms`).  Keeping elements
as matrices rather than image arrays keeps transversals small even when the
point set has tens of thousands of elements.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import prod

import numpy as np

from . import linalg as la
from ._accel import sift_kernel

_BATCH = 16384


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


class Action:
    dim: int
    exact_keys: bool = True

    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.int64)

    def normalize(self, X: np.ndarray) -> np.ndarray:
        return X

    def apply(self, X, A) -> np.ndarray:
        return self.normalize(np.asarray(X, np.int64) @ A)

    def apply_each(self, X, As) -> np.ndarray:
        return self.normalize(np.einsum("mi,mij->mj", X, As))

    def mul(self, A, B) -> np.ndarray:
        return self.normalize(np.matmul(A, B))

    def keys(self, X) -> np.ndarray:
        raise NotImplementedError

    def inverse(self, A) -> np.ndarray:
        raise NotImplementedError

    def unit(self, k: int) -> np.ndarray:
        e = np.zeros(self.dim, np.int64)
        e[k] = 1
        return e

    def moduli(self) -> np.ndarray:
        """Per-column modulus (0 = no reduction), used by compiled kernels."""
        return np.zeros(self.dim, np.int64)

    def is_identity(self, A) -> bool:
        return bool(np.array_equal(A, self.identity()))


class LatticeAction(Action):
    """Isometries of an integral positive definite Gram matrix."""

    exact_keys = False

    def __init__(self, gram):
        self.gram = la.imat(np.asarray(gram, dtype=object))
        self.dim = self.gram.shape[0]
        self._gram_inv = la.inverse(self.gram)
        rng = np.random.default_rng(0x5EED)
        self._hash = rng.integers(1, 2**62, size=self.dim, dtype=np.int64) | 1

    def keys(self, X) -> np.ndarray:
        with np.errstate(over="ignore"):
            return (np.asarray(X, np.int64) * self._hash).sum(axis=-1)

    def inverse(self, A) -> np.ndarray:
        a = la.imat(np.asarray(A, dtype=object))
        inv = self.gram.dot(a.T).dot(self._gram_inv)
        return la.to_int64(inv)

    def is_isometry(self, A) -> bool:
        a = la.imat(np.asarray(A, dtype=object))
        return bool(np.array_equal(a.dot(self.gram).dot(a.T), self.gram))


class ModuleAction(Action):
    """Automorphisms of ``Z/d_1 x ... x Z/d_r``; row ``i`` of a matrix is the image of ``e_i``."""

    def __init__(self, orders):
        self.orders = np.asarray(orders, np.int64)
        self.dim = len(self.orders)
        self.size = int(prod(int(d) for d in self.orders))
        if self.size >= 2**62:
            raise ValueError("module too large for integer keys")
        radix = np.ones(self.dim, np.int64)
        for i in range(self.dim - 2, -1, -1):
            radix[i] = radix[i + 1] * self.orders[i + 1]
        self.radix = radix

    def normalize(self, X):
        return np.mod(X, self.orders)

    def keys(self, X) -> np.ndarray:
        return np.asarray(X, np.int64) @ self.radix

    def moduli(self) -> np.ndarray:
        return self.orders.copy()

    def elements(self) -> np.ndarray:
        """All elements in key order (row ``k`` has key ``k``)."""
        if self.dim == 0:
            return np.zeros((1, 0), np.int64)
        grids = np.indices(tuple(int(d) for d in self.orders)).reshape(self.dim, -1).T
        return grids.astype(np.int64)

    def inverse(self, A) -> np.ndarray:
        A = self.normalize(np.asarray(A, np.int64))
        X = self.elements()
        img = self.keys(self.apply(X, A))
        if len(np.unique(img)) != self.size:
            raise ValueError("matrix is not invertible on the module")
        pre = np.empty(self.size, np.int64)
        pre[img] = np.arange(self.size)
        rows = [X[pre[int(self.keys(self.unit(k)))]] for k in range(self.dim)]
        return np.array(rows, np.int64).reshape(self.dim, self.dim)

    def is_endomorphism(self, A) -> bool:
        """Row ``i`` must have order dividing ``d_i``."""
        A = np.asarray(A, np.int64)
        return all(np.all(np.mod(A[i] * self.orders[i], self.orders) == 0) for i in range(self.dim))


# ---------------------------------------------------------------------------
# point tables and orbits
# ---------------------------------------------------------------------------


class PointIndex:
    """Batched lookup of points in a fixed table."""

    def __init__(self, action: Action, pts: np.ndarray):
        self.action = action
        self.pts = np.asarray(pts, np.int64)
        k = action.keys(self.pts)
        self.order = np.argsort(k, kind="stable")
        self.sorted_keys = k[self.order]
        if len(self.sorted_keys) > 1 and np.any(self.sorted_keys[1:] == self.sorted_keys[:-1]):
            raise ValueError("duplicate points (or key collision) in table")

    def __len__(self):
        return len(self.pts)

    def find(self, X) -> np.ndarray:
        """Indices of the rows of ``X`` in the table, ``-1`` where absent."""
        X = np.asarray(X, np.int64)
        if not len(self.pts):
            return np.full(len(X), -1, np.int64)
        k = self.action.keys(X)
        pos = np.searchsorted(self.sorted_keys, k)
        pos = np.minimum(pos, len(self.sorted_keys) - 1)
        hit = self.sorted_keys[pos] == k
        idx = np.where(hit, self.order[pos], -1)
        if not self.action.exact_keys and hit.any():
            h = np.nonzero(hit)[0]
            bad = ~np.all(self.pts[idx[h]] == X[h], axis=1)
            idx[h[bad]] = -1
        return idx


def orbit(action: Action, gens, point, transversal=False, inverses=None):
    """Orbit of ``point`` under ``gens`` by breadth-first search.

    Returns ``pts`` (first row is ``point``) and, when ``transversal`` is set,
    ``(T, Tinv)`` with ``point @ T[t] == pts[t]``.
    """
    start = action.normalize(np.asarray(point, np.int64).reshape(1, -1))
    blocks = [start]
    parent_blocks = [np.array([-1])]
    via_blocks = [np.array([-1])]
    known = action.keys(start)
    frontier = start
    frontier_idx = np.array([0])
    n = 1
    while len(frontier) and gens:
        Ys, Ps, Gs = [], [], []
        for gi, s in enumerate(gens):
            Ys.append(action.apply(frontier, s))
            Ps.append(frontier_idx)
            Gs.append(np.full(len(frontier), gi))
        Y = np.concatenate(Ys)
        K = action.keys(Y)
        par = np.concatenate(Ps)
        via = np.concatenate(Gs)
        uk, first = np.unique(K, return_index=True)
        fresh = ~np.isin(uk, known, assume_unique=True)
        sel = first[fresh]
        if not len(sel):
            break
        frontier = Y[sel]
        frontier_idx = np.arange(n, n + len(sel))
        n += len(sel)
        blocks.append(frontier)
        parent_blocks.append(par[sel])
        via_blocks.append(via[sel])
        known = np.union1d(known, uk[fresh])
    pts = np.concatenate(blocks)
    if not transversal:
        return pts
    parents = np.concatenate(parent_blocks)
    vias = np.concatenate(via_blocks)
    d = action.dim
    T = np.empty((n, d, d), np.int64)
    Tinv = np.empty((n, d, d), np.int64)
    T[0] = Tinv[0] = action.identity()
    # blocks are in BFS order, so parents are always filled first
    start_i = 1
    for blk in blocks[1:]:
        stop = start_i + len(blk)
        p = parents[start_i:stop]
        v = vias[start_i:stop]
        for gi in np.unique(v):
            m = np.nonzero(v == gi)[0] + start_i
            T[m] = action.mul(T[parents[m]], gens[gi])
            Tinv[m] = action.mul(inverses[gi], Tinv[parents[m]])
        start_i = stop
    return pts, T, Tinv


def orbits_of(action: Action, gens, points) -> list[np.ndarray]:
    """Partition a finite invariant point set into orbits (lists of row indices)."""
    points = np.asarray(points, np.int64)
    index = PointIndex(action, points)
    seen = np.zeros(len(points), bool)
    parts = []
    for i in range(len(points)):
        if seen[i]:
            continue
        pts = orbit(action, gens, points[i])
        idx = index.find(pts)
        if np.any(idx < 0):
            raise ValueError("point set is not invariant under the group")
        seen[idx] = True
        parts.append(np.sort(idx))
    return parts


# ---------------------------------------------------------------------------
# stabilizer chain
# ---------------------------------------------------------------------------


@dataclass
class _Level:
    point: np.ndarray
    pts: np.ndarray
    index: PointIndex
    T: np.ndarray
    Tinv: np.ndarray


class StabChain:
    """Base, strong generators and orbit transversals (as matrices)."""

    def __init__(self, action: Action, base=()):
        self.action = action
        self.base: list[np.ndarray] = [action.normalize(np.asarray(b, np.int64)) for b in base]
        self.gens: list[np.ndarray] = []
        self.invs: list[np.ndarray] = []
        self.gen_level: list[int] = []
        self.levels: list[_Level] = []
        self._rebuild(len(self.base) - 1)

    # -- structure ---------------------------------------------------------------

    def level_gens(self, i: int):
        sel = [k for k, lv in enumerate(self.gen_level) if lv >= i]
        return [self.gens[k] for k in sel], [self.invs[k] for k in sel]

    def _rebuild(self, upto: int):
        while len(self.levels) < len(self.base):
            b = self.base[len(self.levels)]
            I = self.action.identity()[None]
            self.levels.append(_Level(b, b[None], PointIndex(self.action, b[None]), I.copy(), I.copy()))
        for i in range(min(upto, len(self.base) - 1) + 1):
            g, gi = self.level_gens(i)
            pts, T, Tinv = orbit(self.action, g, self.base[i], transversal=True, inverses=gi)
            self.levels[i] = _Level(self.base[i], pts, PointIndex(self.action, pts), T, Tinv)

    def order(self) -> int:
        return prod(len(lv.pts) for lv in self.levels)

    def orbit_lengths(self) -> list[int]:
        return [len(lv.pts) for lv in self.levels]

    # -- sifting ----------------------------------------------------------------

    def sift(self, A, start: int = 0):
        """Return ``(residue, level)``; ``level == len(base)`` means it passed every level."""
        R = np.asarray(A, np.int64)
        for i in range(start, len(self.levels)):
            lv = self.levels[i]
            t = lv.index.find(self.action.apply(lv.point[None], R))[0]
            if t < 0:
                return R, i
            R = self.action.mul(R, lv.Tinv[t])
        return R, len(self.levels)

    def sift_batch(self, As, start: int = 0):
        """Vectorized :meth:`sift`; returns ``(residues, levels, is_identity)``."""
        As = np.asarray(As, np.int64)
        if not len(As):
            return As, np.zeros(0, np.int64), np.zeros(0, bool)
        tables = [(lv.point, lv.index, lv.Tinv) for lv in self.levels[start:]]
        R, lev = sift_kernel(self.action, As, tables)
        lev = lev + start
        ident = (lev == len(self.levels)) & np.all(R == self.action.identity(), axis=(1, 2))
        return R, lev, ident

    def contains(self, A) -> bool:
        R, lev = self.sift(A)
        return lev == len(self.levels) and self.action.is_identity(R)

    # -- growth ------------------------------------------------------------------

    def _moved_unit(self, R) -> int:
        for k in range(self.action.dim):
            e = self.action.unit(k)
            if not np.array_equal(self.action.apply(e[None], R)[0], e):
                return k
        raise AssertionError("non-identity element fixes every unit vector")

    def add_residue(self, R, Rinv, level: int) -> int:
        """Add a sifted non-identity residue; returns its level."""
        if level == len(self.base):
            self.base.append(self.action.unit(self._moved_unit(R)))
        self.gens.append(R)
        self.invs.append(Rinv)
        self.gen_level.append(level)
        self._rebuild(level)
        return level

    def add_generator(self, A, Ainv=None) -> bool:
        """Sift ``A`` and add its residue as a strong generator if non-trivial."""
        R, lev = self.sift(A)
        if lev == len(self.levels) and self.action.is_identity(R):
            return False
        Rinv = self.action.inverse(R)
        self.add_residue(R, Rinv, lev)
        return True

    def verify(self, jobs_batch: int = _BATCH) -> int:
        """Deterministic strong-generation check by sifting all Schreier generators.

        Adds any missing strong generators; returns how many were added.
        """
        added = 0
        i = len(self.levels) - 1
        while i >= 0:
            lv = self.levels[i]
            gens, _ = self.level_gens(i)
            restart = None
            for s in gens:
                img = self.action.apply(lv.pts, s)
                idx = lv.index.find(img)
                if np.any(idx < 0):
                    raise AssertionError("orbit not closed under its generators")
                for lo in range(0, len(lv.pts), jobs_batch):
                    hi = min(lo + jobs_batch, len(lv.pts))
                    H = self.action.mul(self.action.mul(lv.T[lo:hi], s), lv.Tinv[idx[lo:hi]])
                    R, lev, ok = self.sift_batch(H, start=i + 1)
                    if not ok.all():
                        k = int(np.nonzero(~ok)[0][0])
                        self.add_residue(R[k], self.action.inverse(R[k]), int(lev[k]))
                        added += 1
                        restart = int(lev[k])
                        break
                if restart is not None:
                    break
            if restart is not None:
                i = min(restart, len(self.levels) - 1)
                continue
            i -= 1
        return added


class ProductReplacer:
    """Product-replacement random elements, carrying inverses along."""

    def __init__(self, action: Action, gens, invs, rng: np.random.Generator, slots: int = 10, warmup: int = 60):
        self.action = action
        self.rng = rng
        base = list(zip(gens, invs)) or [(action.identity(), action.identity())]
        self.state = [base[i % len(base)] for i in range(max(slots, len(base)))]
        self.acc = (action.identity(), action.identity())
        for _ in range(warmup):
            self.next()

    def next(self):
        n = len(self.state)
        i, j = self.rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        a, ai = self.state[i]
        b, bi = self.state[j]
        if self.rng.random() < 0.5:
            self.state[i] = (self.action.mul(a, b), self.action.mul(bi, ai))
        else:
            self.state[i] = (self.action.mul(b, a), self.action.mul(ai, bi))
        x, xi = self.state[i]
        r, ri = self.acc
        self.acc = (self.action.mul(r, x), self.action.mul(xi, ri))
        return self.acc


def schreier_sims(action: Action, gens, invs=None, base=(), seed: int = 0, upper_bound=None, verify=True, patience=40) -> StabChain:
    """Randomized Schreier-Sims followed (unless certified by ``upper_bound``) by deterministic verification.

    ``upper_bound`` must be a proven upper bound for the group order; when the
    chain reaches it the chain is complete, because a partial chain never
    overestimates the order.
    """
    gens = [action.normalize(np.asarray(g, np.int64)) for g in gens]
    if invs is None:
        invs = [action.inverse(g) for g in gens]
    chain = StabChain(action, base)
    for g, gi in zip(gens, invs):
        if chain.add_generator(g, gi) and upper_bound is not None and chain.order() == upper_bound:
            return chain
    if not gens:
        return chain
    rng = np.random.default_rng(seed)
    pr = ProductReplacer(action, gens, invs, rng)
    miss = 0
    while miss < patience:
        if upper_bound is not None and chain.order() >= upper_bound:
            break
        A, Ai = pr.next()
        R, lev = chain.sift(A)
        if lev == len(chain.levels) and action.is_identity(R):
            miss += 1
            continue
        chain.add_residue(R, action.inverse(R), lev)
        miss = 0
    if upper_bound is not None and chain.order() == upper_bound:
        return chain
    if upper_bound is not None and chain.order() > upper_bound:
        raise AssertionError("chain order exceeds the stated upper bound")
    if verify:
        chain.verify()
    return chain


# ---------------------------------------------------------------------------
# groups
# ---------------------------------------------------------------------------


class Group:
    """A finite group given by generators in a given action, with a lazy chain."""

    def __init__(self, action: Action, gens, invs=None, base=(), seed: int = 0, upper_bound=None, chain: StabChain | None = None):
        self.action = action
        self.gens = [action.normalize(np.asarray(g, np.int64)) for g in gens]
        self.invs = [action.inverse(g) for g in self.gens] if invs is None else [np.asarray(v, np.int64) for v in invs]
        self.base = [np.asarray(b, np.int64) for b in base]
        self.seed = seed
        self.upper_bound = upper_bound
        self._chain = chain

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_perms(cls, perms, degree: int | None = None, **kw) -> "Group":
        """Permutation group on ``{0..n-1}``; ``perm[i]`` is the image of ``i``."""
        perms = [list(p) for p in perms]
        n = degree if degree is not None else (len(perms[0]) if perms else 0)
        action = LatticeAction(np.eye(n, dtype=np.int64))
        mats = []
        for p in perms:
            m = np.zeros((n, n), np.int64)
            m[np.arange(n), p] = 1
            mats.append(m)
        return cls(action, mats, [m.T.copy() for m in mats], **kw)

    def perm(self, A) -> list[int]:
        """Permutation of unit vectors induced by ``A`` (permutation groups only)."""
        return [int(np.nonzero(A[i])[0][0]) for i in range(self.action.dim)]

    # -- chain-backed queries -----------------------------------------------------

    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = schreier_sims(self.action, self.gens, self.invs, self.base, seed=self.seed, upper_bound=self.upper_bound)
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, A) -> bool:
        return self.chain.contains(self.action.normalize(np.asarray(A, np.int64)))

    def orbit(self, point) -> np.ndarray:
        return orbit(self.action, self.gens, point)

    def stabilizer_order(self, point) -> int:
        return self.order() // len(self.orbit(point))

    def orbits(self, points) -> list[np.ndarray]:
        return orbits_of(self.action, self.gens, points)

    def transitive_on(self, points) -> bool:
        points = np.asarray(points, np.int64)
        if not len(points):
            return True
        idx = PointIndex(self.action, points)
        for g in self.gens:
            if np.any(idx.find(self.action.apply(points, g)) < 0):
                raise ValueError("the group does not preserve the point set")
        return len(self.orbit(points[0])) == len(points)

    def random_elements(self, count: int, seed: int | None = None):
        pr = ProductReplacer(self.action, self.gens, self.invs, np.random.default_rng(self.seed if seed is None else seed))
        return [pr.next() for _ in range(count)]

    def subgroup(self, gens, invs=None, **kw) -> "Group":
        kw.setdefault("base", [lv.point for lv in self.chain.levels] if self._chain is not None else self.base)
        kw.setdefault("seed", self.seed)
        return Group(self.action, gens, invs, **kw)

    def is_identity(self, A) -> bool:
        return self.action.is_identity(A)

    # -- element arithmetic ----------------------------------------------------

    def mul(self, a, b):
        return self.action.mul(a, b)

    def conj(self, x, g, ginv):
        """``g^-1 x g``."""
        return self.action.mul(self.action.mul(ginv, x), g)

    def commutator(self, a, ai, b, bi):
        """``a^-1 b^-1 a b``."""
        m = self.action.mul
        return m(m(ai, bi), m(a, b))

    # -- small generating sets -----------------------------------------------------

    def small_generating_set(self, max_tries: int = 200, seed: int | None = None) -> "Group":
        """Same group, regenerated by a few random elements (verified by order)."""
        target = self.order()
        rng_seed = self.seed if seed is None else seed
        elts = self.random_elements(max_tries, seed=rng_seed + 1)
        gens, invs = [], []
        chain = StabChain(self.action, [lv.point for lv in self.chain.levels])
        for A, Ai in elts:
            if chain.contains(A):
                continue
            gens.append(A)
            invs.append(Ai)
            sub = schreier_sims(self.action, gens, invs, [lv.point for lv in self.chain.levels], seed=rng_seed, upper_bound=target)
            if sub.order() == target:
                return Group(self.action, gens, invs, base=self.base, seed=self.seed, upper_bound=target, chain=sub)
            chain = sub
        return self


# ---------------------------------------------------------------------------
# subgroup utilities
# ---------------------------------------------------------------------------


def derived_subgroup(G: Group) -> Group:
    """Normal closure of the commutators of the generators."""
    m = G.action.mul
    gens, invs = [], []
    for (a, ai), (b, bi) in itertools.combinations(zip(G.gens, G.invs), 2):
        c = G.commutator(a, ai, b, bi)
        if not G.action.is_identity(c):
            gens.append(c)
            invs.append(G.commutator(b, bi, a, ai))
    base = [lv.point for lv in G.chain.levels]
    if not gens:
        return Group(G.action, [], [], base=base, seed=G.seed)
    bound = G.order()
    changed = True
    while changed:
        changed = False
        chain = schreier_sims(G.action, gens, invs, base, seed=G.seed)
        if chain.order() == bound:
            break
        for x, xi in list(zip(gens, invs)):
            for g, gi in zip(G.gens, G.invs):
                y = m(m(gi, x), g)
                if not chain.contains(y):
                    gens.append(y)
                    invs.append(m(m(gi, xi), g))
                    chain.add_generator(y, invs[-1])
                    changed = True
    return Group(G.action, gens, invs, base=base, seed=G.seed, chain=chain)


def kernel_generators(G: Group, signs):
    """Reidemeister-Schreier generators of the kernel of ``G -> Z/2`` given on generators.

    ``signs[k]`` is 1 when generator ``k`` maps to the non-trivial element.
    If the signs do not define a homomorphism the result generates ``G``.
    """
    m = G.action.mul
    odd = [k for k, s in enumerate(signs) if s]
    if not odd:
        raise ValueError("need at least one odd generator")
    t, ti = G.gens[odd[0]], G.invs[odd[0]]
    out = []
    for k, (s, si) in enumerate(zip(G.gens, G.invs)):
        if signs[k]:
            out.append((m(s, ti), m(t, si)))  # s t^-1
            out.append((m(t, s), m(si, ti)))  # t s
        else:
            out.append((s, si))
            out.append((m(m(t, s), ti), m(m(t, si), ti)))  # t s t^-1
    return [a for a, _ in out if not G.action.is_identity(a)], [b for a, b in out if not G.action.is_identity(a)]


def index2_subgroups(G: Group) -> list[Group]:
    """All subgroups of index 2, by sign assignments on the generators."""
    order = G.order()
    if order % 2:
        return []
    base = [lv.point for lv in G.chain.levels]
    found: list[Group] = []
    k = len(G.gens)
    for signs in itertools.product((0, 1), repeat=k):
        if not any(signs):
            continue
        gens, invs = kernel_generators(G, signs)
        chain = schreier_sims(G.action, gens, invs, base, seed=G.seed)
        if chain.order() != order // 2:
            continue
        H = Group(G.action, gens, invs, base=base, seed=G.seed, chain=chain)
        # distinct homomorphisms give distinct kernels, but guard anyway
        if any(all(F.contains(g) for g in H.gens) for F in found):
            continue
        found.append(H)
    return found


def point_stabilizer(G: Group, point, seed: int | None = None, batch: int = 8, max_rounds: int = 200) -> Group:
    """``Stab_G(point)`` from random Schreier generators.

    The target order ``|G| / |orbit|`` is exact, so reaching it certifies the chain.
    """
    act = G.action
    seed = G.seed if seed is None else seed
    pts, T, Tinv = orbit(act, G.gens, point, transversal=True, inverses=G.invs)
    index = PointIndex(act, pts)
    target = G.order() // len(pts)
    base = [lv.point for lv in G.chain.levels]
    if target == 1:
        return Group(act, [], [], base=base, seed=seed, upper_bound=1)
    pr = ProductReplacer(act, G.gens, G.invs, np.random.default_rng(seed + 7))
    start = act.normalize(np.asarray(point, np.int64).reshape(1, -1))
    gens, invs = [], []
    chain = StabChain(act, base)
    for _ in range(max_rounds):
        for _ in range(batch):
            r, ri = pr.next()
            t = int(index.find(act.apply(start, r))[0])
            h, hi = act.mul(r, Tinv[t]), act.mul(T[t], ri)
            if act.is_identity(h) or chain.contains(h):
                continue
            gens.append(h)
            invs.append(hi)
            chain.add_generator(h, hi)
        if chain.order() == target:
            return Group(act, gens, invs, base=base, seed=seed, upper_bound=target, chain=chain)
    raise RuntimeError("stabilizer generation did not reach the orbit-stabilizer order")


def is_normal(G: Group, H: Group) -> bool:
    m = G.action.mul
    return all(H.contains(m(m(gi, h), g)) for h in H.gens for g, gi in zip(G.gens, G.invs))


# ---------------------------------------------------------------------------
# backtrack search for automorphism groups
# ---------------------------------------------------------------------------


@dataclass
class SearchResult:
    gens: list
    invs: list
    gen_level: list
    orbit_lengths: list
    nodes: int

    @property
    def order(self) -> int:
        return prod(self.orbit_lengths)


def backtrack_automorphisms(action: Action, points, base_idx, pair_values, fingerprint, log=None) -> SearchResult:
    """Automorphism group of a structure on a finite point table.

    ``points`` must contain the unit vectors ``e_0..e_{r-1}`` at ``base_idx``
    and be invariant under every automorphism.  A map is determined by the
    images ``f_i`` of the unit vectors; it is an automorphism exactly when the
    images have the same ``fingerprint`` and the same pairwise values
    ``pair_values(f_j)[f_l] == pair_values(e_j)[e_l]`` (the caller guarantees
    that these conditions are sufficient).

    The group is computed level by level from the deepest stabilizer upwards;
    a candidate image outside the orbit of the already-known group is either
    realized by a new generator or, if no extension exists, its whole orbit is
    discarded.  The orbit lengths are exact, so their product is the order.
    """
    points = np.asarray(points, np.int64)
    r = len(base_idx)
    index = PointIndex(action, points)
    fingerprint = np.asarray(fingerprint)
    cache: dict[int, np.ndarray] = {}

    def pv(y):
        v = cache.get(y)
        if v is None:
            v = np.asarray(pair_values(y))
            if len(cache) > 4096:
                cache.clear()
            cache[y] = v
        return v

    target = [[pv(base_idx[j])[base_idx[l]] for l in range(r)] for j in range(r)]
    init = [fingerprint == fingerprint[base_idx[l]] for l in range(r)]
    nodes = 0

    def dfs(level, masks, chosen):
        nonlocal nodes
        if level == r:
            return list(chosen)
        for y in np.nonzero(masks[0])[0]:
            nodes += 1
            row = pv(int(y))
            nxt = []
            for off, m in enumerate(masks[1:], start=1):
                mm = m & (row == target[level][level + off])
                mm[y] = False
                if not mm.any():
                    break
                nxt.append(mm)
            else:
                chosen.append(int(y))
                sol = dfs(level + 1, nxt, chosen)
                if sol is not None:
                    return sol
                chosen.pop()
        return None

    def extend(prefix):
        k = len(prefix)
        masks = []
        for l in range(k, r):
            m = init[l].copy()
            for j, f in enumerate(prefix):
                m &= pv(f) == target[j][l]
            m[list(prefix)] = False
            if not m.any():
                return None
            masks.append(m)
        return dfs(k, masks, list(prefix))

    gens, invs, levels = [], [], []
    lengths = [0] * r
    for i in range(r - 1, -1, -1):
        hg = [g for g, lv in zip(gens, levels) if lv >= i]
        cand = init[i].copy()
        for j in range(i):
            cand &= pv(base_idx[j]) == target[j][i]
        done = np.zeros(len(points), bool)
        orb = index.find(orbit(action, hg, points[base_idx[i]]))
        done[orb] = True
        for x in np.nonzero(cand)[0]:
            if done[x]:
                continue
            sol = extend([int(b) for b in base_idx[:i]] + [int(x)])
            if sol is None:
                excl = index.find(orbit(action, hg, points[x]))
                done[excl] = True
                continue
            A = points[sol]
            gens.append(A)
            invs.append(action.inverse(A))
            levels.append(i)
            hg.append(A)
            orb = index.find(orbit(action, hg, points[base_idx[i]]))
            if np.any(orb < 0):
                raise AssertionError("point table is not invariant")
            done[orb] = True
        lengths[i] = len(orb)
        if log:
            log(f"level {i}: orbit {lengths[i]}, generators {len(gens)}, nodes {nodes}")
    return SearchResult(gens, invs, levels, lengths, nodes)


def chain_from_search(action: Action, res: SearchResult) -> StabChain:
    """Stabilizer chain on the unit-vector base from a backtrack result."""
    chain = StabChain(action, [])
    chain.base = [action.unit(k) for k in range(len(res.orbit_lengths))]
    chain.gens = list(res.gens)
    chain.invs = list(res.invs)
    chain.gen_level = list(res.gen_level)
    chain.levels = []
    chain._rebuild(len(chain.base) - 1)
    if chain.orbit_lengths() != list(res.orbit_lengths):
        raise AssertionError("chain orbits disagree with the search")
    return chain
