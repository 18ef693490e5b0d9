"""Acceptance criteria, one test per criterion, each printing pass/fail lines in the terminal summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from coinvlat.fqm import isotropic_census, orthogonal_group, orthogonal_group_bruteforce, primary_decompose
from coinvlat.irr import PLAIN, hk_untwisted_action, sigma_label_action, twisted_q_values, vacuum_anomaly
from coinvlat.pipeline import CLASSES, ClassReport, c_voa_order, elementary_divisors, select_index2, stage_theorem
from coinvlat.shapes import abelian_invariants, shape_order

RANKS = {"4C": 14, "6E": 16, "6G": 18, "8E": 18, "10F": 20}
INDEX = {"4C": 2, "6E": 1, "6G": 4, "8E": 2, "10F": 3}


def _budget(acceptance, criterion, t0, seconds):
    dt = time.perf_counter() - t0
    return acceptance(criterion, f"wall time {dt:.1f}s within {seconds}s", dt <= seconds)


def test_criterion_1_lattice_facts(contexts, expectations, acceptance):
    ok = True
    for name in CLASSES:
        t0 = time.perf_counter()
        ctx = contexts(name)
        bc = ctx.bc
        c = bc.checks()
        exp = expectations["classes"][name]
        inv = elementary_divisors(ctx.disc)
        items = {
            "even": c["L_even"],
            "rootless": c["rootless"],
            f"rank {bc.L.rank}": bc.L.rank == RANKS[name] == exp["rank"],
            f"D(Lambda_g) = {exp['discriminant']}": inv == abelian_invariants(exp["discriminant"]),
            "fixed-point free": c["fixed_point_free"],
            f"order {bc.g_order()}": bc.g_order() == bc.n,
            "(1-g)Lambda_g* = Lambda_g": c["one_minus_g_dual_is_L"],
        }
        for label, good in items.items():
            ok &= acceptance(1, f"{name} {label}", bool(good))
        ok &= _budget(acceptance, 1, t0, 60)
    assert ok


def test_criterion_2_group_orders(contexts, expectations, acceptance):
    t0 = time.perf_counter()
    ok = True
    for name in CLASSES:
        ctx = contexts(name)
        exp = expectations["classes"][name]
        a, c = ctx.aut.order(), ctx.cent.order()
        orbit = ctx.cent.group.conjugation_orbit_length
        for label, got, want in [
            ("|O(Lambda_g)|", a, shape_order(exp["aut_lattice"]["shape"])),
            ("|C(g)|", c, shape_order(exp["centralizer"]["shape"])),
            ("orbit x centralizer", orbit * c, a),
        ]:
            ok &= acceptance(2, f"{name} {label} = {got}", got == want, f"expected {want}")
    ok &= _budget(acceptance, 2, t0, 30 * 60)
    assert ok


def test_criterion_3_orbit_claims(contexts, expectations, acceptance):
    t0 = time.perf_counter()
    ok = True
    for name in CLASSES:
        ctx = contexts(name)
        da = ctx.disc_action
        g_trivial = ctx.disc.action.is_identity(ctx.disc.induced_map(ctx.bc.g))
        ok &= acceptance(3, f"{name} C/<g> faithful on D(Lambda_g)", da.kernel_order == ctx.n and g_trivial)
        ks = expectations["classes"][name]["transitive_k"]
        want = [k for k in range(1, ctx.n + 1) if ctx.n % k == 0] if name in ("4C", "6E", "8E") else [ctx.n // 2]
        assert ks == want
        for k in ks:
            census = isotropic_census(ctx.disc, k)
            ok &= acceptance(3, f"{name} transitive on L_(g,{k}) ({len(census)} elements)", len(census) > 0 and da.image.transitive_on(census))
    ok &= _budget(acceptance, 3, t0, 5 * 60)
    assert ok


def test_criterion_4_table3(contexts, expectations, acceptance):
    t0 = time.perf_counter()
    ok = True
    for name, want_idx in zip(CLASSES, (2, 1, 4, 2, 3)):
        ctx = contexts(name)
        exp = expectations["classes"][name]
        od = ctx.orth_disc.order
        cb = ctx.disc_action.image.order()
        ok &= acceptance(4, f"{name} |O(D)| = {od}", od == shape_order(exp["orth_disc"]["shape"]))
        ok &= acceptance(4, f"{name} index of C/<g> = {Fraction(od, cb)}", Fraction(od, cb) == want_idx)
    ok &= _budget(acceptance, 4, t0, 20 * 60)
    assert ok


def test_criterion_5_table4(contexts, expectations, acceptance):
    t0 = time.perf_counter()
    ok = True
    for name in CLASSES:
        ctx = contexts(name)
        exp = expectations["classes"][name]
        S = ctx.irr
        M = S.module
        ok &= acceptance(5, f"{name} Irr = {M.structure()}", elementary_divisors(M) == abelian_invariants(exp["irr"]))
        order = ctx.orth_irr.order
        ok &= acceptance(5, f"{name} |O(Irr)| = {order}", order == shape_order(exp["orth_irr"]["shape"]))
        orb = ctx.orth_irr.group.orbit(S.vacuum_label())
        sg = ctx.sg
        trans = len(orb) == len(sg) and np.array_equal(np.sort(M.index_of(orb)), np.sort(M.index_of(sg)))
        ok &= acceptance(5, f"{name} O(Irr) transitive on S_g ({len(sg)} labels)", trans)
        stab = order // len(orb)
        ok &= acceptance(5, f"{name} stabilizer order {stab}", stab == shape_order(exp["stabilizer"]["shape"]))
        ratio = Fraction(stab, c_voa_order(ctx))
        ok &= acceptance(5, f"{name} stabilizer / c_voa = {ratio}", ratio == INDEX[name])
    ok &= _budget(acceptance, 5, t0, 2 * 3600)
    assert ok


def test_criterion_6_index2_and_index1(contexts, expectations, acceptance):
    ok = True
    for name in ("4C", "8E"):
        t0 = time.perf_counter()
        ctx = contexts(name)
        exp = expectations["classes"][name]
        res = select_index2(ctx)
        ok &= acceptance(6, f"{name} unique selected index-2 subgroup", len(res["selected"]) == 1, f"{res['candidates']} index-2 subgroups, {res['order_only']} pass the order test")
        got = res["selected_orders"][0] if len(res["selected"]) == 1 else None
        ok &= acceptance(6, f"{name} order {got}", got == shape_order(exp["aut_voa"]["shape"]))
        ok &= _budget(acceptance, 6, t0, 2 * 3600)
    ctx = contexts("6E")
    want = shape_order(expectations["classes"]["6E"]["aut_voa"]["shape"])
    ok &= acceptance(6, "6E index 1, Aut = O(Irr)", ctx.orth_irr.order == want)
    assert ok


def test_criterion_7_property_suites(contexts, acceptance):
    ok = True
    rho_ok = sig_ok = hk_ok = nondeg = True
    brute = 0
    brute_ok = True
    for name in CLASSES:
        ctx = contexts(name)
        S = ctx.irr
        if S.case == PLAIN:
            M = S.module
            X = M.elements()
            qn = M.q_num(X)
            for x in S.lam.reps:
                f = sigma_label_action(S, ctx.bc.L.vector(x))
                sig_ok &= f.is_bijective() and bool(np.array_equal(M.q_num(f(X)), qn))
            for k in range(S.n):
                h = hk_untwisted_action(S, k)
                hk_ok &= h.preserves_q() and h.is_injective()
        for M in (ctx.disc, S.lam, S.module):
            mods = [M] + [p.module for p in primary_decompose(M).parts]
            for N in mods:
                nondeg &= N.is_nondegenerate() and N.check_quadratic()
                if N.size <= 64:
                    brute += 1
                    brute_ok &= orthogonal_group(N).order == orthogonal_group_bruteforce(N)
        rho = vacuum_anomaly(ctx.bc, 1)
        rho_ok &= rho in twisted_q_values(S, 1)
    rho4c = vacuum_anomaly(contexts("4C").bc, 1)
    ok &= acceptance(7, "sigma_label_action preserves q exhaustively", sig_ok)
    ok &= acceptance(7, "hk_untwisted_action preserves q on its domain", hk_ok)
    ok &= acceptance(7, "every built FqModule is nondegenerate", nondeg)
    ok &= acceptance(7, f"orthogonal_group equals brute force on {brute} modules of size <= 64", brute_ok and brute > 0)
    ok &= acceptance(7, f"rho_1 cross-check (4C value {rho4c})", rho_ok and rho4c == Fraction(3, 4))
    assert ok


@pytest.mark.deep
@pytest.mark.parametrize("name", ["10F", "6G"])
def test_criterion_8_deep_product_search(name, contexts, expectations, acceptance):
    ctx = contexts(name)
    exp = expectations["classes"][name]
    rep = ClassReport(name)
    t0 = time.perf_counter()
    stage_theorem(ctx, exp, rep, deep=True)
    res = rep.search
    ok = acceptance(8, f"{name} index-{INDEX[name]} subgroups: one conjugacy class", res["classes"] == 1, f"{res['candidates']} subgroups, {res['order_only']} pass the order test, {res['footprint']} the odd footprint, {res['classes']} classes")
    got = res["selected_orders"][0] if res["classes"] == 1 else None
    ok &= acceptance(8, f"{name} order {got}", got == shape_order(exp["aut_voa"]["shape"]), f"{time.perf_counter() - t0:.0f}s")
    assert ok
