import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strathom.centerfun import (
    FUSION_LIBRARY,
    CenterError,
    FusionOverE,
    ModuleCatOverPointed,
    base_category,
    center_over_E,
    check_center_monoidal,
    drinfeld_center_map,
    drinfeld_center_pointed,
    fun_cat_rank,
    is_nondegenerate_over_E,
    morita_test,
    regular_module,
    verify_cylinder,
)
from strathom.metricgrp import (
    LIBRARY,
    TRIVIAL_GROUP,
    FiniteAbelianGroup,
    all_subgroups,
    direct_sum,
    is_isotropic,
    is_nondegenerate,
    isometry_exists,
    radical,
    restrict,
)

REP, SVEC, TC = LIBRARY["rep-z2"], LIBRARY["svec"], LIBRARY["toric-code"]
ALL_CATS = [(b, n, c) for b, cats in FUSION_LIBRARY.items() for n, c in cats.items()]


def cat(name, base="trivial"):
    return FUSION_LIBRARY[base][name]


def orbit_rank(G, X, Y, act):
    """Oracle: simple equivariant objects on X x Y, one per (orbit, stabilizer character)."""
    seen, total = set(), 0
    for p in ((x, y) for x in X for y in Y):
        if p in seen:
            continue
        orbit = {act(g, p) for g in G}
        seen |= orbit
        total += len(G) // len(orbit)
    return total


def cosets(G, H):
    return sorted({min(G.add(x, h) for h in H) for x in G.elements})


def coset_action(G, H):
    def act(g, p):
        return tuple(min(G.add(G.add(c, g), h) for h in H) for c in p)
    return act


# ---- drinfeld centers


def test_drinfeld_center_of_z2_is_toric_code():
    Z = drinfeld_center_pointed(FiniteAbelianGroup((2,)))
    assert Z.order == 4
    assert sorted(Z.q_table) == [0, 0, 0, Fraction(1, 2)]
    assert isometry_exists(Z, TC) is not None


def test_drinfeld_center_of_trivial_group():
    assert drinfeld_center_pointed(TRIVIAL_GROUP).order == 1


def test_drinfeld_center_of_z4():
    Z, coords = drinfeld_center_map(FiniteAbelianGroup((4,)))
    assert Z.order == 16
    assert Z.q(coords[((1,), (1,))]) == Fraction(1, 4)
    assert Z.q(coords[((2,), (3,))]) == Fraction(1, 2)


@pytest.mark.parametrize("factors", [(2,), (3,), (4,), (2, 2), (2, 4)])
def test_drinfeld_center_nondegenerate_with_lagrangian(factors):
    G = FiniteAbelianGroup(factors)
    Z, coords = drinfeld_center_map(G)
    assert is_nondegenerate(Z)
    lag = [coords[(g, G.zero)] for g in G.elements]
    assert is_isotropic(Z, lag) and len(lag) ** 2 == Z.order


# ---- centers over E


def test_center_over_trivial_base_is_full_center():
    z = center_over_E(cat("vec-z2"))
    assert isometry_exists(z.metric, TC) is not None


def test_center_of_base_over_itself():
    z = center_over_E(cat("vec-z2", "rep-z2"))
    assert z.metric.order == 2 and isometry_exists(z.metric, REP) is not None
    z = center_over_E(base_category(SVEC))
    assert isometry_exists(z.metric, SVEC) is not None


def test_center_of_z4_over_rep():
    z = center_over_E(cat("vec-z4", "rep-z2"))
    assert z.metric.order == 8
    # centralizer of (2, 0) in Z4 x Z4 with q = g y / 4 is {y even}: q = 0 or g / 2
    assert sorted(z.metric.q_table) == [0] * 6 + [Fraction(1, 2)] * 2


def test_invalid_lift_is_rejected():
    with pytest.raises(CenterError, match="not a category over E"):
        FusionOverE(SVEC, FiniteAbelianGroup((2,)), ((1,),), ((0,),))
    with pytest.raises(CenterError, match="not a category over E"):
        FusionOverE(SVEC, FiniteAbelianGroup((4,)), ((2,),), ((Fraction(1, 4),),))
    with pytest.raises(CenterError, match="not a category over E"):
        FusionOverE(REP, FiniteAbelianGroup((2,)), ((0,),), ((0,),))


@pytest.mark.parametrize("base,name,c", ALL_CATS)
def test_center_is_nondegenerate_over_E(base, name, c):
    z = center_over_E(c)
    assert is_nondegenerate_over_E(z)
    assert isometry_exists(muger_center(z), c.base) is not None


def muger_center(z):
    return restrict(z.metric, radical(z.metric))


@pytest.mark.parametrize("base,name,c", ALL_CATS)
def test_center_order(base, name, c):
    assert center_over_E(c).metric.order * c.base.order == c.group.order ** 2


# ---- monoidal check


def test_monoidal_base_with_itself():
    E = cat("vec-z2", "rep-z2")
    r = check_center_monoidal(E, E)
    assert r.passed and r.left.order == 2


def test_monoidal_z2_z2_over_trivial():
    r = check_center_monoidal(cat("vec-z2"), cat("vec-z2"))
    assert r.passed
    assert isometry_exists(r.left, direct_sum(TC, TC)) is not None


@pytest.mark.parametrize("base", sorted(FUSION_LIBRARY))
def test_monoidal_random_pairs(base):
    rng = random.Random(7)
    cats = list(FUSION_LIBRARY[base].values())
    for _ in range(10):
        r = check_center_monoidal(rng.choice(cats), rng.choice(cats))
        assert r.passed, str(r)


# ---- morita


def test_morita_examples():
    assert morita_test(cat("vec-z2"), cat("vec-z2")).equivalent
    assert not morita_test(cat("vec-z2"), cat("vec-z3")).equivalent
    # order-16 doubles: Z4 x Z4 against (Z2)^4
    assert not morita_test(cat("vec-z4"), cat("vec-z2xz2")).equivalent


@pytest.mark.parametrize("base,name,c", ALL_CATS)
def test_morita_reflexive(base, name, c):
    assert morita_test(c, c).equivalent


def test_morita_over_rep_separates_z4_from_klein():
    a, b = cat("vec-z4", "rep-z2"), cat("vec-z2xz2", "rep-z2")
    assert not morita_test(a, b).equivalent


# ---- functor ranks


def test_fun_rank_examples():
    G = FiniteAbelianGroup((2,))
    reg = regular_module(G)
    assert fun_cat_rank(cat("vec-z2"), reg, reg) == 2
    full = ModuleCatOverPointed(tuple(G.elements))
    assert fun_cat_rank(cat("vec-z2"), full, full) == 2
    assert fun_cat_rank(cat("vec-z2"), reg, full) == 1


@pytest.mark.parametrize("name", ["vec-1", "vec-z2", "vec-z3", "vec-z4", "vec-z2xz2"])
def test_fun_rank_matches_orbit_oracle(name):
    c = cat(name)
    G = c.group
    subs = all_subgroups(G)
    for H1 in subs:
        for H2 in subs:
            M, N = ModuleCatOverPointed(tuple(H1)), ModuleCatOverPointed(tuple(H2))
            X, Y = cosets(G, H1), cosets(G, H2)

            def act(g, p):
                return (coset_action(G, H1)(g, (p[0],))[0], coset_action(G, H2)(g, (p[1],))[0])

            assert fun_cat_rank(c, M, N) == orbit_rank(G.elements, X, Y, act)
            assert fun_cat_rank(c, M, N) == fun_cat_rank(c, N, M)
    assert fun_cat_rank(c, regular_module(G), regular_module(G)) == G.order


def test_fun_rank_with_nondegenerate_psi():
    c = cat("vec-z2xz2")
    G = c.group
    H = tuple(G.elements)
    psi = {(h, k): Fraction(h[0] * k[1] - h[1] * k[0], 2) for h in H for k in H}
    twisted = ModuleCatOverPointed(H, psi)
    plain = ModuleCatOverPointed(H)
    assert fun_cat_rank(c, twisted, twisted) == 4
    assert fun_cat_rank(c, twisted, plain) == 1


def test_bad_psi_is_rejected():
    c = cat("vec-z2")
    H = tuple(c.group.elements)
    with pytest.raises(CenterError, match="alternating"):
        fun_cat_rank(c, ModuleCatOverPointed(H, {((1,), (1,)): Fraction(1, 2)}), regular_module(c.group))


# ---- cylinder


def fun_E_oracle(c, N):
    G, E = c.group, c.base
    X = cosets(G, N.subgroup)
    tE = [c.t_of(e) for e in E.elements]
    return orbit_rank(tE, X, X, coset_action(G, N.subgroup))


@pytest.mark.parametrize("base,name,c", ALL_CATS)
def test_cylinder_all_subgroups(base, name, c):
    for H in all_subgroups(c.group):
        N = ModuleCatOverPointed(tuple(H))
        r = verify_cylinder(c, N)
        assert r.passed, str(r)
        assert r.rhs == fun_E_oracle(c, N)


# ---- properties


@given(st.sampled_from(ALL_CATS), st.sampled_from(ALL_CATS))
@settings(max_examples=25, deadline=None)
def test_monoidal_same_base_property(a, b):
    if a[0] != b[0]:
        return
    assert check_center_monoidal(a[2], b[2]).passed
