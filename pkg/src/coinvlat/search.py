"""Low-index subgroups of a direct product ``A x B`` of module automorphism groups.

A subgroup of index ``d`` is the stabilizer of a point in a transitive action
on ``d`` points, and an action of ``A x B`` is a pair of actions of the
factors whose images commute.  This is Goursat's description read through
permutation representations: the fibre product over ``A1/A2 = B1/B2`` is the
stabilizer for the action on the cosets.

Permutations of ``d`` points are realized as permutation matrices on
``(Z/2)^d`` (a faithful representation for ``d >= 3``, and for ``d = 2`` on
the non-zero vectors), so graphs of homomorphisms ``A -> S_d`` are again
groups of block-diagonal module automorphisms and the ordinary stabilizer
chain code applies.
"""

from __future__ import annotations

import itertools
import time

import numpy as np

from .groups import Group, ModuleAction, point_stabilizer, schreier_sims


def _perm_matrix(p) -> np.ndarray:
    d = len(p)
    m = np.zeros((d, d), np.int64)
    m[np.arange(d), list(p)] = 1
    return m


def _compose(p, q):
    """``p`` then ``q`` (right action)."""
    return tuple(q[p[i]] for i in range(len(p)))


def _perm_order(p) -> int:
    k, x, e = 1, tuple(p), tuple(range(len(p)))
    while x != e:
        x = _compose(x, p)
        k += 1
    return k


def _element_order(G: Group, A) -> int:
    k, X = 1, A
    while not G.action.is_identity(X):
        X = G.action.mul(X, A)
        k += 1
    return k


def _block(*mats) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), np.int64)
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i : i + k, i : i + k] = m
        i += k
    return out


def _word_tests(G: Group, per_level: int = 24, seed: int = 0):
    """Random positive words grouped by their largest generator, with element orders."""
    rng = np.random.default_rng(seed)
    k = len(G.gens)
    tests = [[] for _ in range(k)]
    for top in range(k):
        for _ in range(per_level if top else 1):
            length = int(rng.integers(1, 7))
            word = [top] + [int(x) for x in rng.integers(0, top + 1, size=length - 1)]
            rng.shuffle(word)
            X = G.gens[word[0]]
            for i in word[1:]:
                X = G.action.mul(X, G.gens[i])
            tests[top].append((word, _element_order(G, X)))
    return tests


def homomorphisms_to_sym(G: Group, d: int) -> list[tuple]:
    """All homomorphisms ``G -> S_d`` as tuples of generator images.

    Partial tuples are pruned with the necessary condition that the order of
    ``w(images)`` divides the order of ``w(gens)`` for random words ``w``;
    survivors are confirmed exactly by computing the order of the graph.
    """
    perms = list(itertools.permutations(range(d)))
    tests = _word_tests(G, seed=G.seed)
    act = ModuleAction(list(G.action.orders) + [2] * d)
    target = G.order()
    homs = []

    def ok(imgs, top):
        for word, order in tests[top]:
            x = imgs[word[0]]
            for i in word[1:]:
                x = _compose(x, imgs[i])
            if order % _perm_order(x):
                return False
        return True

    def rec(imgs):
        k = len(imgs)
        if k == len(G.gens):
            if all(p == perms[0] for p in imgs):
                homs.append(tuple(imgs))
                return
            gens = [_block(A, _perm_matrix(p)) for A, p in zip(G.gens, imgs)]
            if schreier_sims(act, gens, seed=G.seed).order() == target:
                homs.append(tuple(imgs))
            return
        for p in perms:
            if ok(imgs + [p], k):
                rec(imgs + [p])

    rec([])
    return homs


def _transitive(perms, d: int) -> bool:
    seen, todo = {0}, [0]
    while todo:
        x = todo.pop()
        for p in perms:
            if p[x] not in seen:
                seen.add(p[x])
                todo.append(p[x])
    return len(seen) == d


def _canonical(imgs, d: int):
    """Smallest relabelling by permutations fixing the point 0."""
    best = None
    for rest in itertools.permutations(range(1, d)):
        t = (0,) + rest
        tinv = [0] * d
        for i, x in enumerate(t):
            tinv[x] = i
        conj = tuple(tuple(t[p[tinv[i]]] for i in range(d)) for p in imgs)
        if best is None or conj < best:
            best = conj
    return best


def hom_images(G: Group, hom, elements, d: int) -> list[tuple]:
    """Images of arbitrary elements of ``G`` under a homomorphism given on generators.

    The image of ``x`` is the unique ``p`` with ``(x, p)`` in the graph group.
    """
    act = ModuleAction(list(G.action.orders) + [2] * d)
    graph = Group(act, [_block(A, _perm_matrix(p)) for A, p in zip(G.gens, hom)], upper_bound=G.order(), seed=G.seed)
    perms = list(itertools.permutations(range(d)))
    out = []
    for x in elements:
        for p in perms:
            if graph.contains(_block(x, _perm_matrix(p))):
                out.append(p)
                break
        else:
            raise AssertionError("element not in the group")
    return out


def low_index_subgroups_product(A: Group, B: Group, d: int, log=None, screen=None, stats: dict | None = None) -> list[Group]:
    """Every subgroup of index ``d`` in ``A x B``, on the direct-sum module.

    With ``screen``, a list of pairs ``(a, b)`` generating a subgroup ``K``,
    only the subgroups ``H`` with ``A x B = H K`` are built, i.e. those whose
    coset action restricted to ``K`` is still transitive.  ``stats`` receives
    the number of index-``d`` subgroups and how many passed the screen.
    """
    orders = list(A.action.orders) + list(B.action.orders)
    act = ModuleAction(orders)
    ra, rb = A.action.dim, B.action.dim
    total = A.order() * B.order()
    if d == 1:
        gens = [_block(X, np.eye(rb, dtype=np.int64)) for X in A.gens] + [_block(np.eye(ra, dtype=np.int64), Y) for Y in B.gens]
        if stats is not None:
            stats.update(subgroups=1, screened=1)
        return [Group(act, gens, upper_bound=total)]
    t = time.perf_counter()
    hA = homomorphisms_to_sym(A, d)
    hB = homomorphisms_to_sym(B, d)
    if log:
        log(f"homomorphisms to Sym_{d}: {len(hA)} and {len(hB)} ({time.perf_counter() - t:.1f}s)")
    img_cache: dict = {}

    def images(G, hom, elems, tag):
        if (tag, hom) not in img_cache:
            img_cache[tag, hom] = hom_images(G, hom, elems, d)
        return img_cache[tag, hom]

    seen = set()
    pairs = []
    n_all = 0
    for pa in hA:
        for pb in hB:
            if not all(_compose(x, y) == _compose(y, x) for x in pa for y in pb):
                continue
            if not _transitive(pa + pb, d):
                continue
            key = _canonical(pa + pb, d)
            if key in seen:
                continue
            seen.add(key)
            n_all += 1
            if screen is not None:
                ia = images(A, pa, [a for a, _ in screen], "A")
                ib = images(B, pb, [b for _, b in screen], "B")
                if not _transitive([_compose(x, y) for x, y in zip(ia, ib)], d):
                    continue
            pairs.append((pa, pb))
    if stats is not None:
        stats.update(subgroups=n_all, screened=len(pairs))
    if log:
        log(f"index-{d} subgroups: {n_all}, passing the screen: {len(pairs)} ({time.perf_counter() - t:.1f}s)")
    Ia, Ib = np.eye(ra, dtype=np.int64), np.eye(rb, dtype=np.int64)
    gens = [_block(X, Ib) for X in A.gens] + [_block(Ia, Y) for Y in B.gens]
    out = []
    for pa, pb in pairs:
        H = Group(act, coset_stabilizer_gens(act, gens, list(pa) + list(pb)), upper_bound=total // d, seed=A.seed)
        if H.order() != total // d:
            raise AssertionError("point stabilizer has the wrong order")
        out.append(H)
    return out


def coset_stabilizer_gens(act, gens, perms) -> list[np.ndarray]:
    """Schreier generators of the stabilizer of point 0 under ``gens[k] -> perms[k]``."""
    d = len(perms[0])
    ident = tuple(range(d))
    T = {0: (act.identity(), ident)}
    todo = [0]
    while todo:
        i = todo.pop()
        X, x = T[i]
        for g, p in zip(gens, perms):
            j = p[i]
            if j not in T:
                T[j] = (act.mul(X, g), _compose(x, p))
                todo.append(j)
    if len(T) != d:
        raise ValueError("action is not transitive")
    inv = {i: act.inverse(X) for i, (X, _) in T.items()}
    out = []
    for i, (X, _) in T.items():
        for g, p in zip(gens, perms):
            Y = act.mul(act.mul(X, g), inv[p[i]])
            if not act.is_identity(Y):
                out.append(Y)
    return out


def same_subgroup(H: Group, K: Group) -> bool:
    return H.order() == K.order() and all(K.contains(h) for h in H.gens)


def _sample(G: Group, k: int = 24, length: int = 10) -> list[np.ndarray]:
    rng = np.random.default_rng(G.seed)
    out = []
    for _ in range(k):
        X = G.action.identity()
        for w in rng.integers(0, len(G.gens), size=length):
            X = G.action.mul(X, G.gens[int(w)])
        out.append(X)
    return out


def conjugacy_classes(G: Group, subgroups: list[Group]) -> list[list[int]]:
    """Partition ``subgroups`` into ``G``-conjugacy classes.

    Conjugates are enumerated exactly: a subgroup of index ``d`` has at most
    ``d`` of them, reached by conjugating with the generators of ``G``.
    Membership of a fixed random sample serves as a hash before the exact
    comparison.
    """
    m = G.action.mul
    sample = _sample(G)

    def sig(K):
        return tuple(K.contains(x) for x in sample)

    sigs = [sig(H) for H in subgroups]
    classes: list[list[int]] = []
    assigned = [False] * len(subgroups)
    for i, H in enumerate(subgroups):
        if assigned[i]:
            continue
        orbit = [(H, sigs[i])]
        k = 0
        while k < len(orbit):
            X = orbit[k][0]
            for g, gi in zip(G.gens, G.invs):
                Y = Group(G.action, [m(m(gi, h), g) for h in X.gens], upper_bound=H.order(), seed=H.seed)
                sy = sig(Y)
                if not any(sz == sy and same_subgroup(Y, Z) for Z, sz in orbit):
                    orbit.append((Y, sy))
            k += 1
        cls = [
            j
            for j in range(i, len(subgroups))
            if not assigned[j] and any(sz == sigs[j] and same_subgroup(subgroups[j], Z) for Z, sz in orbit)
        ]
        for j in cls:
            assigned[j] = True
        classes.append(cls)
    return classes


def product_search(ctx, d: int, log=None, footprint=None) -> dict:
    """Index-``d`` subgroups of ``O(Irr)`` that are transitive on ``S_g`` with the lifted-centralizer stabilizer order.

    ``H`` of index ``d`` is transitive on ``S_g`` iff the vacuum stabilizer
    ``G_v`` is transitive on ``G/H``; then ``|H_v| = |G_v|/d`` is forced.
    That screen runs on all candidates, and the survivors are built and
    checked directly.  ``footprint(ctx, Hv)``, if given, is an additional
    necessary condition on the vacuum stabilizer.
    """
    from .pipeline import c_voa_order

    res = ctx.orth_irr
    if len(res.parts) != 2:
        raise ValueError("the product search needs exactly two primary parts")
    (_, _, A, _), (_, _, B, _) = res.parts
    A, B = A.small_generating_set(), B.small_generating_set()
    S = ctx.irr
    M = S.module
    dec = res.decomposition
    ra = A.action.dim
    v = S.vacuum_label()
    nsg = len(ctx.sg)
    target = c_voa_order(ctx)
    Gv = point_stabilizer(res.group, v, seed=ctx.seed).small_generating_set()
    screen = [tuple(dec.restrict(X)) for X in Gv.gens]
    stats: dict = {}
    cands = low_index_subgroups_product(A, B, d, log=log, screen=screen, stats=stats)
    rows, lifted = [], []
    for k, H in enumerate(cands):
        gens = [dec.lift([X[:ra, :ra], X[ra:, ra:]]) for X in H.gens]
        HL = Group(M.action, gens, upper_bound=res.order // d, seed=ctx.seed)
        orbit_len = len(HL.orbit(v))
        stab = HL.order() // orbit_len
        row = {"candidate": k, "order": HL.order(), "transitive": orbit_len == nsg, "stabilizer": stab}
        row["order_test"] = row["transitive"] and stab == target
        row["footprint"] = None
        if row["order_test"] and footprint is not None:
            row["footprint"] = bool(footprint(ctx, point_stabilizer(HL, v, seed=ctx.seed)))
        row["selected"] = row["order_test"] and row["footprint"] is not False
        rows.append(row)
        lifted.append(HL)
        if log:
            log(f"  candidate {k}: {row}")
    chosen = [k for k, r in enumerate(rows) if r["selected"]]
    t = time.perf_counter()
    classes = conjugacy_classes(res.group, [lifted[k] for k in chosen]) if chosen else []
    if log:
        log(f"conjugacy classes: {len(classes)} ({time.perf_counter() - t:.1f}s)")
    return {
        "method": f"index{d}-product",
        "candidates": stats["subgroups"],
        "screened": stats["screened"],
        "order_only": sum(r["order_test"] for r in rows),
        "footprint": None if footprint is None else len(chosen),
        "classes": len(classes),
        "class_sizes": [len(c) for c in classes],
        "selected_orders": [lifted[chosen[c[0]]].order() for c in classes],
        "rows": rows,
    }
