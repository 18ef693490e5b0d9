"""Isometry groups of lattices, centralizers, and the action on discriminant forms."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import linalg as la
from .fqm import DiscriminantForm
from .groups import (
    Group,
    LatticeAction,
    ModuleAction,
    PointIndex,
    SearchResult,
    backtrack_automorphisms,
    chain_from_search,
    schreier_sims,
)
from .lattice import Lattice


@dataclass
class MatrixGroup:
    """A group of isometries of ``lattice`` (basis coordinates, row convention).

    ``points`` is an invariant, spanning set of lattice vectors (coordinates);
    :meth:`perm` gives the permutation view on it.
    """

    lattice: Lattice
    group: Group
    points: np.ndarray

    @property
    def gens(self):
        return self.group.gens

    def order(self) -> int:
        return self.group.order()

    def contains(self, A) -> bool:
        return self.group.contains(A)

    def perm(self, A) -> np.ndarray:
        idx = PointIndex(self.group.action, self.points).find(self.group.action.apply(self.points, A))
        if np.any(idx < 0):
            raise ValueError("matrix does not permute the action points")
        return idx


def _lattice_key(L: Lattice) -> str:
    payload = json.dumps([[str(v) for v in row] for row in L.gram], separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:24]


def action_points(L: Lattice) -> np.ndarray:
    """All vectors of norm at most the largest basis norm (contains the basis, spans, invariant)."""
    bound = max(L.gram[i, i] for i in range(L.rank))
    xs, _ = L.short_coords(bound)
    return np.asarray(xs, np.int64)


def _fingerprint(X, G) -> np.ndarray:
    """Norm plus the histogram of inner products against the whole point set."""
    Gm = np.asarray(la.to_int64(G))
    XG = X @ Gm
    norms = np.einsum("ij,ij->i", XG, X)
    vals = []
    step = 2048
    lo_v = -int(norms.max())
    width = 2 * int(norms.max()) + 1
    hist = np.zeros((len(X), width), np.int64)
    for lo in range(0, len(X), step):
        ip = XG[lo : lo + step] @ X.T
        for v in range(width):
            hist[lo : lo + step, v] = (ip == v + lo_v).sum(axis=1)
    F = np.concatenate([norms[:, None], hist], axis=1)
    _, inv = np.unique(F, axis=0, return_inverse=True)
    return inv.reshape(-1)


def aut_group(L: Lattice, cache_dir: str | os.PathLike | None = None, log=None) -> MatrixGroup:
    """Full isometry group of a positive definite integral lattice by backtracking."""
    gram = la.to_int(L.gram)
    action = LatticeAction(gram)
    X = action_points(L)
    res = None
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"aut-{_lattice_key(L)}.json"
        if path.exists():
            data = json.loads(path.read_text())
            gens = [np.array(g, np.int64) for g in data["gens"]]
            res = SearchResult(gens, [action.inverse(g) for g in gens], data["gen_level"], data["orbit_lengths"], data["nodes"])
    if res is None:
        Gm = la.to_int64(gram)
        XG = X @ Gm
        base_idx = [int(i) for i in PointIndex(action, X).find(np.eye(L.rank, dtype=np.int64))]
        if min(base_idx) < 0:
            raise AssertionError("basis vectors missing from the action points")
        fp = _fingerprint(X, gram)

        def pair(y):
            return XG @ X[y]

        res = backtrack_automorphisms(action, X, base_idx, pair, fp, log=log)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(
                json.dumps(
                    {
                        "gens": [g.tolist() for g in res.gens],
                        "gen_level": res.gen_level,
                        "orbit_lengths": res.orbit_lengths,
                        "nodes": res.nodes,
                    }
                )
            )
    for g in res.gens:
        if not action.is_isometry(g):
            raise AssertionError("backtrack produced a non-isometry")
    chain = chain_from_search(action, res)
    G = Group(action, res.gens, res.invs, base=chain.base, chain=chain)
    return MatrixGroup(L, G, X)


def conjugation_orbit(G: Group, g):
    """Conjugates ``u^-1 g u`` with transversal pairs ``(u, u^-1)``."""
    act = G.action
    g = act.normalize(np.asarray(g, np.int64))
    elts = [g]
    trans = [(act.identity(), act.identity())]
    keys = {g.tobytes(): 0}
    i = 0
    while i < len(elts):
        x = elts[i]
        u, ui = trans[i]
        for s, si in zip(G.gens, G.invs):
            y = act.mul(act.mul(si, x), s)
            k = y.tobytes()
            if k not in keys:
                keys[k] = len(elts)
                elts.append(y)
                trans.append((act.mul(u, s), act.mul(si, ui)))
        i += 1
    return elts, trans, keys


def centralizer(MG: MatrixGroup, g, seed: int = 0) -> MatrixGroup:
    """``C_G(g)`` from Schreier generators of the conjugation-orbit stabilizer."""
    G = MG.group
    act = G.action
    if not G.contains(g):
        raise ValueError("element is not in the group")
    elts, trans, keys = conjugation_orbit(G, g)
    gens, invs = [], []
    seen = set()
    for t, (u, ui) in enumerate(trans):
        for s, si in zip(G.gens, G.invs):
            y = act.mul(act.mul(si, elts[t]), s)
            v, vi = trans[keys[y.tobytes()]]
            h = act.mul(act.mul(u, s), vi)
            if act.is_identity(h) or h.tobytes() in seen:
                continue
            seen.add(h.tobytes())
            gens.append(h)
            invs.append(act.mul(act.mul(v, si), ui))
    order = G.order() // len(elts)
    base = [lv.point for lv in G.chain.levels]
    chain = schreier_sims(act, gens, invs, base, seed=seed, upper_bound=order)
    if chain.order() != order:
        raise AssertionError("centralizer chain did not reach the orbit-stabilizer order")
    C = Group(act, gens, invs, base=base, seed=seed, chain=chain)
    C.conjugation_orbit_length = len(elts)
    return MatrixGroup(MG.lattice, C, MG.points)


@dataclass
class DiscriminantAction:
    form: DiscriminantForm
    image: Group
    kernel_order: int
    maps: list


def discriminant_action(MG: MatrixGroup, L: Lattice | None = None, form: DiscriminantForm | None = None, seed: int = 0) -> DiscriminantAction:
    """Image of the group in ``O(D(L), q)`` and the kernel order of the action."""
    L = L or MG.lattice
    D = form or DiscriminantForm(L)
    maps = [D.induced_map(A) for A in MG.gens]
    act = ModuleAction(D.orders)
    nontrivial = [m for m in maps if not act.is_identity(m)]
    if nontrivial:
        chain = schreier_sims(act, nontrivial, seed=seed)
        image = Group(act, nontrivial, chain=chain)
    else:
        image = Group(act, [], [])
    kernel = MG.order() // image.order()
    return DiscriminantAction(D, image, kernel, maps)
