"""Centers over E for pointed fusion categories, and rank-level functor checks.

A pointed fusion category over E is Vec_G (trivial associator) with a
braided central functor E -> Z(Vec_G) = G x dual(G).  It is given by an
injective homomorphism t: G_E -> G and a lift e -> chi_e into characters
of G, subject to

    chi_f(t(e)) = r_E(e, f),

where r_E is the canonical braiding of E (r(g_i, g_i) = q_E(g_i) on the
invariant-factor generators, zero off the diagonal).  In particular
chi_e(t(e)) = q_E(e), so the image is a braided copy of E.

Module categories over Vec_G are (H, psi) with psi an alternating
bicharacter on H; the regular module is H = 0.  Functor categories are
compared by rank only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .braidedmod import double_braiding_module, relative_tensor
from .metricgrp import (
    LIBRARY as METRIC_LIBRARY,
    TRIVIAL_GROUP,
    Element,
    FiniteAbelianGroup,
    MetricEmbedding,
    MetricGroup,
    abstract_metric_group,
    classify_symmetric,
    isometry_exists,
    orthogonal_complement,
    present,
    radical,
    restrict_map,
    subgroup_generated,
)

Character = tuple[Fraction, ...]


class CenterError(ValueError):
    pass


def _frac(v: Fraction) -> Fraction:
    return v - math.floor(v)


def eval_character(chi: Character, x: Element) -> Fraction:
    return _frac(sum((c * a for c, a in zip(chi, x)), Fraction(0)))


def canonical_braiding(base: MetricGroup, e: Element, f: Element) -> Fraction:
    G = base.group
    return _frac(sum((e[i] * f[i] * base.q_table[G.index(g)] for i, g in enumerate(G.generators)), Fraction(0)))


@dataclass(frozen=True)
class FusionOverE:
    base: MetricGroup
    group: FiniteAbelianGroup
    t: tuple[Element, ...]
    lift: tuple[Character, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", tuple(self.group.normalize(x) for x in self.t))
        object.__setattr__(self, "lift", tuple(tuple(_frac(Fraction(v)) for v in chi) for chi in self.lift))
        problems = self.problems()
        if problems:
            raise CenterError("not a category over E: " + "; ".join(problems))

    def problems(self) -> list[str]:
        E, G = self.base, self.group
        out = []
        if classify_symmetric(E) == "not-symmetric":
            return ["base not symmetric"]
        if len(self.t) != E.group.rank or len(self.lift) != E.group.rank:
            return ["need one image and one character per generator of E"]
        for chi in self.lift:
            if len(chi) != G.rank:
                return ["character has wrong length"]
            for v, n in zip(chi, G.invariant_factors):
                if _frac(v * n) != 0:
                    return [f"character value {v} is not an {n}-th root"]
        for n, x, chi in zip(E.group.invariant_factors, self.t, self.lift):
            if G.scale(n, x) != G.zero:
                out.append(f"t image {x} has order not dividing {n}")
            if any(_frac(n * v) for v in chi):
                out.append("lift is not a homomorphism")
        if out:
            return out
        images = {}
        for e in E.elements:
            y = self.t_of(e)
            if y in images:
                return [f"t not injective: {images[y]} and {e}"]
            images[y] = e
        for e in E.elements:
            for f in E.elements:
                if eval_character(self.chi_of(f), self.t_of(e)) != canonical_braiding(E, e, f):
                    return [f"central lift incompatible with the braiding of E at {(e, f)}"]
        return out

    def t_of(self, e: Element) -> Element:
        return self.group.combine(e, self.t)

    def chi_of(self, e: Element) -> Character:
        return tuple(_frac(sum((a * chi[i] for a, chi in zip(e, self.lift)), Fraction(0))) for i in range(self.group.rank))

    @property
    def rank(self) -> int:
        return self.group.order


def _char_coords(G: FiniteAbelianGroup, chi: Character) -> Element:
    return tuple(int(v * n) % n for v, n in zip(chi, G.invariant_factors))


def drinfeld_center_map(G: FiniteAbelianGroup) -> tuple[MetricGroup, dict[tuple[Element, Element], Element]]:
    """Z(Vec_G) = G x dual(G), q(g, chi) = chi(g); characters are coordinate tuples y,
    chi_y(g) = sum g_i y_i / n_i.  Returns the metric group and (g, y) -> coordinates."""
    nf = G.invariant_factors
    pairs = [(g, y) for g in G.elements for y in G.elements]

    def add(u, v):
        return (G.add(u[0], v[0]), G.add(u[1], v[1]))

    def q(u):
        return sum((Fraction(a * b, n) for a, b, n in zip(u[0], u[1], nf)), Fraction(0))

    return abstract_metric_group(pairs, add, (G.zero, G.zero), q)


def drinfeld_center_pointed(G: FiniteAbelianGroup) -> MetricGroup:
    return drinfeld_center_map(G)[0]


@dataclass(frozen=True)
class CenterOverE:
    metric: MetricGroup
    embed: MetricEmbedding


def center_over_E(C: FusionOverE) -> CenterOverE:
    """Centralizer of the image of E in Z(Vec_G), with its E-embedding."""
    Z, coords = drinfeld_center_map(C.group)
    E = C.base
    image_of = {e: coords[(C.t_of(e), _char_coords(C.group, C.chi_of(e)))] for e in E.elements}
    for e, z in image_of.items():
        if Z.q(z) != E.q(e):
            raise CenterError("not a category over E")
    cent = orthogonal_complement(Z, image_of.values())
    sub, to_old = restrict_map(Z, cent)
    back = {v: k for k, v in to_old.items()}
    emb = MetricEmbedding(E, sub, tuple(back[image_of[g]] for g in E.group.generators))
    return CenterOverE(sub, emb)


def is_nondegenerate_over_E(center: CenterOverE) -> bool:
    return sorted(radical(center.metric)) == sorted(center.embed.image())


# ---------------------------------------------------------------------------
# relative products and the monoidal check


def relative_product(C: FusionOverE, D: FusionOverE) -> FusionOverE:
    """Vec_G boxtimes_E Vec_H = Vec of (G x H) / {(t_C e, -t_D e)}."""
    if C.base != D.base:
        raise CenterError("different bases")
    E = C.base
    G, H = C.group, D.group
    anti = {(C.t_of(e), H.neg(D.t_of(e))) for e in E.elements}

    def add(u, v):
        return (G.add(u[0], v[0]), H.add(u[1], v[1]))

    rep = {}
    for g in G.elements:
        for h in H.elements:
            rep[(g, h)] = min(add((g, h), a) for a in anti)
    reps = sorted(set(rep.values()))
    zero = (G.zero, H.zero)

    def qadd(u, v):
        return rep[add(u, v)]

    factors, gens = present(reps, qadd, rep[zero])
    P = FiniteAbelianGroup(factors)
    to_pair = {}
    for c in P.elements:
        acc = rep[zero]
        for k, g in zip(c, gens):
            for _ in range(k):
                acc = qadd(acc, g)
        to_pair[c] = acc
    t = tuple(next(c for c, p in to_pair.items() if p == rep[(C.t_of(e), H.zero)]) for e in E.group.generators)
    lift = []
    for e in E.group.generators:
        cg, ch = C.chi_of(e), D.chi_of(e)
        lift.append(tuple(_frac(eval_character(cg, to_pair[g][0]) + eval_character(ch, to_pair[g][1]))
                          for g in P.generators))
    return FusionOverE(E, P, t, tuple(lift), f"{C.name}*{D.name}")


@dataclass(frozen=True)
class MonoidalReport:
    passed: bool
    left: MetricGroup
    right: MetricGroup
    witness: Optional[MetricEmbedding]

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        w = self.witness.images if self.witness is not None else None
        return f"center monoidal: {status} (orders {self.left.order} and {self.right.order}, witness {w})"


def check_center_monoidal(C: FusionOverE, D: FusionOverE) -> MonoidalReport:
    """Compare Z(C,E) boxtimes_E Z(D,E) with Z(C boxtimes_E D, E) over E."""
    zc, zd = center_over_E(C), center_over_E(D)
    E = C.base
    left = relative_tensor(double_braiding_module(E, zc.metric, zc.embed),
                           double_braiding_module(E, zd.metric, zd.embed))
    right = center_over_E(relative_product(C, D))
    cons = [(left.embed(g), right.embed(g)) for g in E.group.generators]
    witness = isometry_exists(left.carrier, right.metric, cons)
    return MonoidalReport(witness is not None, left.carrier, right.metric, witness)


@dataclass(frozen=True)
class MoritaVerdict:
    equivalent: bool
    witness: Optional[MetricEmbedding]

    def __str__(self) -> str:
        return "Morita equivalent" if self.equivalent else "not Morita equivalent"


def morita_test(C: FusionOverE, D: FusionOverE) -> MoritaVerdict:
    if C.base != D.base:
        raise CenterError("different bases")
    zc, zd = center_over_E(C), center_over_E(D)
    cons = [(zc.embed(g), zd.embed(g)) for g in C.base.group.generators]
    w = isometry_exists(zc.metric, zd.metric, cons)
    return MoritaVerdict(w is not None, w)


# ---------------------------------------------------------------------------
# module categories and functor ranks


@dataclass(frozen=True)
class ModuleCatOverPointed:
    subgroup: tuple[Element, ...]
    psi: Mapping[tuple[Element, Element], Fraction] = field(default_factory=dict)

    def psi_value(self, h: Element, k: Element) -> Fraction:
        return _frac(Fraction(self.psi.get((h, k), 0)))

    def problems(self, G: FiniteAbelianGroup) -> list[str]:
        H = self.subgroup
        if sorted(subgroup_generated(G, H)) != sorted(H):
            return ["not a subgroup"]
        for h in H:
            if self.psi_value(h, h):
                return [f"psi not alternating at {h}"]
            for k in H:
                for l in H:
                    if self.psi_value(G.add(h, k), l) != _frac(self.psi_value(h, l) + self.psi_value(k, l)):
                        return ["psi not biadditive"]
        return []


def regular_module(G: FiniteAbelianGroup) -> ModuleCatOverPointed:
    return ModuleCatOverPointed((G.zero,))


def fun_cat_rank(C: FusionOverE, M: ModuleCatOverPointed, N: ModuleCatOverPointed) -> int:
    """Rank of Fun_C(M, N): |G / (H1 + H2)| * |radical of psi1 - psi2 on H1 & H2|."""
    G = C.group
    for mod in (M, N):
        bad = mod.problems(G)
        if bad:
            raise CenterError(bad[0])
    H1, H2 = set(M.subgroup), set(N.subgroup)
    total = subgroup_generated(G, list(H1 | H2))
    K = sorted(H1 & H2)
    rad = [k for k in K if all(_frac(M.psi_value(k, l) - N.psi_value(k, l)) == 0 for l in K)]
    return G.order // len(total) * len(rad)


def module_over_base(C: FusionOverE, N: ModuleCatOverPointed) -> tuple[list[Element], list[int]]:
    """Orbit sizes of t(E) acting on the cosets G/H of N."""
    G = C.group
    H = N.subgroup
    cosets = sorted({min(G.add(x, h) for h in H) for x in G.elements})
    tE = [C.t_of(e) for e in C.base.elements]
    seen, sizes = set(), []
    for c in cosets:
        if c in seen:
            continue
        orbit = {min(G.add(G.add(c, y), h) for h in H) for y in tE}
        seen |= orbit
        sizes.append(len(orbit))
    return cosets, sizes


@dataclass(frozen=True)
class CylinderReport:
    passed: bool
    lhs: Fraction
    rhs: int

    def __str__(self) -> str:
        return f"cylinder: {'pass' if self.passed else 'FAIL'} (lhs {self.lhs}, rhs {self.rhs})"


def verify_cylinder(D: FusionOverE, N: ModuleCatOverPointed) -> CylinderReport:
    """Rank check of D boxtimes_{Z(D,E)} Fun_D(N, N) = Fun_E(N, N).

    Left side: the balanced rank rule rank(X) rank(Y) |S|^2 / rank(Z) with
    S the characters of G trivial on H + t(E).  Right side: pairs of t(E)
    orbits on G/H, each contributing |E| simple functors.
    """
    G = D.group
    if psi_nontrivial(N):
        raise CenterError("cylinder check needs psi = 0")
    zrank = center_over_E(D).metric.order
    funD = fun_cat_rank(D, N, N)
    HtE = subgroup_generated(G, list(N.subgroup) + [D.t_of(e) for e in D.base.elements])
    stab = G.order // len(HtE)
    lhs = Fraction(D.rank * funD * stab * stab, zrank)
    _, sizes = module_over_base(D, N)
    rhs = len(sizes) ** 2 * D.base.order
    return CylinderReport(lhs == rhs, lhs, rhs)


def psi_nontrivial(N: ModuleCatOverPointed) -> bool:
    return any(_frac(Fraction(v)) for v in N.psi.values())


# ---------------------------------------------------------------------------
# library


def _lib() -> dict[str, dict[str, FusionOverE]]:
    trivial = METRIC_LIBRARY["trivial"]
    rep, svec = METRIC_LIBRARY["rep-z2"], METRIC_LIBRARY["svec"]
    half = Fraction(1, 2)

    def vec(factors, base, t=(), lift=(), name=""):
        return FusionOverE(base, FiniteAbelianGroup(factors) if factors else TRIVIAL_GROUP, t, lift, name)

    out = {
        "trivial": {
            "vec-1": vec((), trivial, name="vec-1"),
            "vec-z2": vec((2,), trivial, name="vec-z2"),
            "vec-z3": vec((3,), trivial, name="vec-z3"),
            "vec-z4": vec((4,), trivial, name="vec-z4"),
            "vec-z2xz2": vec((2, 2), trivial, name="vec-z2xz2"),
        },
        "rep-z2": {
            "vec-z2": vec((2,), rep, ((1,),), ((0,),), "vec-z2"),
            "vec-z4": vec((4,), rep, ((2,),), ((0,),), "vec-z4"),
            "vec-z2xz2": vec((2, 2), rep, ((1, 0),), ((0, 0),), "vec-z2xz2"),
        },
        "svec": {
            "vec-z2": vec((2,), svec, ((1,),), ((half,),), "vec-z2"),
            "vec-z2xz2": vec((2, 2), svec, ((1, 0),), ((half, 0),), "vec-z2xz2"),
        },
    }
    return out


FUSION_LIBRARY: dict[str, dict[str, FusionOverE]] = _lib()


def get_fusion(name: str, base: str = "trivial") -> FusionOverE:
    try:
        return FUSION_LIBRARY[base][name]
    except KeyError:
        raise CenterError(f"unknown category {name!r} over {base!r}") from None


def base_category(base: MetricGroup) -> FusionOverE:
    """E itself as a category over E (t = id, lift from the canonical braiding)."""
    G = base.group
    lift = tuple(tuple(canonical_braiding(base, g, e) for g in G.generators) for e in G.generators)
    return FusionOverE(base, G, G.generators, lift, base.name or "E")
