"""Braided E-modules in the pointed scalar model.

Objects of E and C are group elements and ``e . x`` is iota(e) + x, so every
structure morphism is a phase in Q/Z.  A braided E-module stores

* ``r(e, e')``    the braiding of E, bilinear and antisymmetric,
* ``tau1(e, x)``  the first half  e.x -> x.e,
* ``tau2(x, e)``  the second half x.e -> e.x,

and tau(e, x) = tau1(e, x) + tau2(x, e).  The defining diagrams and the
derived coherence diagrams become linear identities among these phases and
are checked over every tuple.

Only tau is observable; the split into tau1 and tau2, and the gauge of r, are
bookkeeping.  ``double_braiding_module`` takes tau1 = b_C(iota e, x),
tau2 = 0 and r = 0.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping, Optional

from .exactnum import RationalMod1
from .metricgrp import (
    Element,
    MetricEmbedding,
    MetricGroup,
    MetricGroupError,
    classify_symmetric,
    condense_map,
    direct_sum_map,
    is_isotropic,
    orthogonal_complement,
    restrict,
    subgroup_generated,
)

Phase = RationalMod1


class BraidedModuleError(ValueError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: Optional[tuple] = None

    def __str__(self) -> str:
        status = "ok" if self.passed else f"FAILED at {self.witness}"
        return f"{self.name}: {status}"


@dataclass(frozen=True, eq=False)
class BraidedEModule:
    base: MetricGroup
    carrier: MetricGroup
    embed: MetricEmbedding
    tau1: Mapping[tuple[Element, Element], Phase]
    tau2: Mapping[tuple[Element, Element], Phase]
    r: Mapping[tuple[Element, Element], Phase] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.embed.source != self.base or self.embed.target != self.carrier:
            raise BraidedModuleError("embedding does not match base and carrier")
        if classify_symmetric(self.base) == "not-symmetric":
            raise BraidedModuleError("base not symmetric")
        E, C = self.base.elements, self.carrier.elements
        for name, table, keys in (("tau1", self.tau1, [(e, x) for e in E for x in C]),
                                  ("tau2", self.tau2, [(x, e) for x in C for e in E])):
            missing = [k for k in keys if k not in table]
            if missing:
                raise BraidedModuleError(f"{name} table missing entry {missing[0]}")
        object.__setattr__(self, "tau1", {k: RationalMod1(v) for k, v in self.tau1.items()})
        object.__setattr__(self, "tau2", {k: RationalMod1(v) for k, v in self.tau2.items()})
        object.__setattr__(self, "r", {(e, f): RationalMod1(self.r.get((e, f), 0)) for e in E for f in E})

    def act(self, e: Element, x: Element) -> Element:
        return self.carrier.group.add(self.embed(e), x)

    def tau(self, e: Element, x: Element) -> Phase:
        return self.tau1[(e, x)] + self.tau2[(x, e)]

    @cached_property
    def tau_table(self) -> dict[tuple[Element, Element], Phase]:
        return {(e, x): self.tau(e, x) for e in self.base.elements for x in self.carrier.elements}


def double_braiding_module(base: MetricGroup, carrier: MetricGroup, embed: MetricEmbedding) -> BraidedEModule:
    """The E-module braiding given by the double braiding of C."""
    if classify_symmetric(base) == "not-symmetric":
        raise BraidedModuleError("base not symmetric")
    tau1 = {(e, x): carrier.b(embed(e), x) for e in base.elements for x in carrier.elements}
    tau2 = {(x, e): RationalMod1(0) for x in carrier.elements for e in base.elements}
    return BraidedEModule(base, carrier, embed, tau1, tau2, {})


def _first_failure(name: str, cases: Iterator[tuple[tuple, Phase, Phase]]) -> CheckResult:
    for witness, lhs, rhs in cases:
        if lhs != rhs:
            return CheckResult(name, False, witness)
    return CheckResult(name, True)


def check_braided_module_axioms(m: BraidedEModule) -> list[CheckResult]:
    """Defining and derived diagrams as exact phase identities.

    Witnesses are (e, e', x) tuples (or (e, x) for the unit condition).
    """
    E, C = m.base, m.carrier
    Eg, Cg = E.group, C.group
    t1, t2, r = m.tau1, m.tau2, m.r
    iota = m.embed.table
    add_c = Cg.add
    els_e, els_c = E.elements, C.elements

    def triples():
        for e in els_e:
            for f in els_e:
                for x in els_c:
                    yield e, f, x

    def tau(e, x):
        return t1[(e, x)] + t2[(x, e)]

    out = []
    out.append(_first_failure("r bilinear", (
        ((e, f, g), r[(Eg.add(e, f), g)], r[(e, g)] + r[(f, g)])
        for e in els_e for f in els_e for g in els_e)))
    out.append(_first_failure("r antisymmetric", (
        ((e, f), r[(e, f)] + r[(f, e)], RationalMod1(0)) for e in els_e for f in els_e)))
    out.append(_first_failure("unit", (((Eg.zero, x), tau(Eg.zero, x), RationalMod1(0)) for x in els_c)))
    # defining diagrams
    out.append(_first_failure("tau1 through r", (
        ((e, f, x), t1[(e, add_c(iota[f], x))], r[(e, f)] + t1[(e, x)]) for e, f, x in triples())))
    out.append(_first_failure("tau2 through r", (
        ((e, f, x), t2[(add_c(iota[f], x), e)], t2[(x, e)] + r[(f, e)]) for e, f, x in triples())))
    out.append(_first_failure("tau1 additive", (
        ((e, f, x), t1[(Eg.add(e, f), x)], t1[(e, x)] + t1[(f, x)]) for e, f, x in triples())))
    out.append(_first_failure("tau2 additive", (
        ((e, f, x), t2[(x, Eg.add(e, f))], t2[(x, e)] + t2[(x, f)]) for e, f, x in triples())))
    # derived diagrams
    out.append(_first_failure("tau1 right action", (
        ((e, f, x), t1[(e, add_c(x, iota[f]))], t1[(e, x)] + r[(e, f)]) for e, f, x in triples())))
    out.append(_first_failure("tau2 right action", (
        ((e, f, x), t2[(add_c(x, iota[f]), e)], r[(f, e)] + t2[(x, e)]) for e, f, x in triples())))
    out.append(_first_failure("tau1 square", (
        ((e, f, x), t1[(e, add_c(iota[f], x))] + t1[(f, x)], t1[(f, x)] + t1[(e, x)] + r[(e, f)])
        for e, f, x in triples())))
    out.append(_first_failure("tau1 hexagon", (
        ((e, f, x), t1[(Eg.add(e, f), x)], t1[(e, add_c(iota[f], x))] + t1[(f, add_c(x, iota[e]))])
        for e, f, x in triples())))
    out.append(_first_failure("tau2 hexagon", (
        ((e, f, x), t2[(x, Eg.add(e, f))], t2[(add_c(x, iota[e]), f)] + t2[(add_c(iota[f], x), e)])
        for e, f, x in triples())))
    out.append(_first_failure("tau commutes with r", (
        ((e, f, x), tau(e, add_c(iota[f], x)), tau(e, x)) for e, f, x in triples())))
    out.append(_first_failure("tau multiplicative", (
        ((e, f, x), tau(Eg.add(e, f), x), tau(f, x) + tau(e, add_c(iota[f], x))) for e, f, x in triples())))
    return out


def axioms_hold(m: BraidedEModule) -> bool:
    return all(c.passed for c in check_braided_module_axioms(m))


DEFINING = ("r bilinear", "r antisymmetric", "unit", "tau1 through r", "tau2 through r", "tau1 additive",
            "tau2 additive")
DERIVED = ("tau1 right action", "tau2 right action", "tau1 square", "tau1 hexagon", "tau2 hexagon",
           "tau commutes with r", "tau multiplicative")


# ---------------------------------------------------------------------------
# random valid tables


def _coset_reps(m_carrier: MetricGroup, image: tuple[Element, ...]) -> dict[Element, tuple[Element, Element]]:
    """Map x -> (representative, offset in the image) with x = offset + rep."""
    G = m_carrier.group
    out: dict[Element, tuple[Element, Element]] = {}
    for x in G.elements:
        if x in out:
            continue
        for y in image:
            out[G.add(y, x)] = (x, y)
    return out


def _random_character(rng: random.Random, invariant_factors: tuple[int, ...]) -> tuple[Fraction, ...]:
    return tuple(Fraction(rng.randrange(n), n) for n in invariant_factors)


def _eval_character(chi: tuple[Fraction, ...], e: Element) -> Fraction:
    return sum((c * a for c, a in zip(chi, e)), Fraction(0))


def random_r(base: MetricGroup, rng: random.Random) -> dict[tuple[Element, Element], RationalMod1]:
    """A random antisymmetric bilinear form on G_E."""
    nf = base.group.invariant_factors
    k = len(nf)
    mat = [[Fraction(0)] * k for _ in range(k)]
    for i in range(k):
        if nf[i] % 2 == 0 and rng.random() < 0.5:
            mat[i][i] = Fraction(1, 2)
        for j in range(i + 1, k):
            # nf[i] divides nf[j]; values in (1/nf[i]) Z
            v = Fraction(rng.randrange(nf[i]), nf[i])
            mat[i][j] = v
            mat[j][i] = -v
    return {(e, f): RationalMod1(sum((e[i] * f[j] * mat[i][j] for i in range(k) for j in range(k)), Fraction(0)))
            for e in base.elements for f in base.elements}


def random_braided_module(base: MetricGroup, carrier: MetricGroup, embed: MetricEmbedding,
                          rng: random.Random) -> BraidedEModule:
    """Random tau1, tau2, r satisfying the defining diagrams."""
    r = random_r(base, rng)
    image = embed.image()
    inv = {v: k for k, v in embed.table.items()}
    reps = _coset_reps(carrier, image)
    nf = base.group.invariant_factors
    s = {rep: _random_character(rng, nf) for rep, _ in set(reps.values())}
    u = {rep: _random_character(rng, nf) for rep, _ in set(reps.values())}
    tau1, tau2 = {}, {}
    for x, (rep, offset) in reps.items():
        f = inv[offset]
        for e in base.elements:
            tau1[(e, x)] = r[(e, f)] + RationalMod1(_eval_character(s[rep], e))
            tau2[(x, e)] = r[(f, e)] + RationalMod1(_eval_character(u[rep], e))
    return BraidedEModule(base, carrier, embed, tau1, tau2, r)


def perturb(m: BraidedEModule, rng: random.Random) -> tuple[BraidedEModule, str, tuple]:
    """Change a single tau1 or tau2 entry by a nonzero phase."""
    which = rng.choice(["tau1", "tau2"])
    table = dict(getattr(m, which))
    key = rng.choice(sorted(table))
    delta = RationalMod1(Fraction(rng.randrange(1, 8), 8))
    table[key] = table[key] + delta
    kwargs = {"tau1": m.tau1, "tau2": m.tau2, which: table}
    return BraidedEModule(m.base, m.carrier, m.embed, kwargs["tau1"], kwargs["tau2"], m.r), which, key


def resplit(m: BraidedEModule, rng: random.Random) -> BraidedEModule:
    """Move a random phase from tau2 into tau1, keeping tau fixed."""
    shift = {(e, x): RationalMod1(Fraction(rng.randrange(8), 8)) for e in m.base.elements for x in m.carrier.elements}
    tau1 = {k: v + shift[k] for k, v in m.tau1.items()}
    tau2 = {(x, e): v - shift[(e, x)] for (x, e), v in m.tau2.items()}
    return BraidedEModule(m.base, m.carrier, m.embed, tau1, tau2, m.r)


# ---------------------------------------------------------------------------
# relative tensor product


@dataclass(frozen=True)
class RelativeTensor:
    module: BraidedEModule
    project: Mapping[tuple[Element, Element], Element]

    def __call__(self, x: Element, y: Element) -> Element:
        return self.project[(tuple(x), tuple(y))]


def relative_tensor_map(mA: BraidedEModule, mB: BraidedEModule) -> RelativeTensor:
    """C boxtimes_E D as local modules over the antidiagonal copy of E.

    The projection is defined on pairs (x, y) that centralize the antidiagonal.
    """
    if mA.base != mB.base:
        raise BraidedModuleError("modules have different bases")
    E = mA.base
    total, pair = direct_sum_map(mA.carrier, mB.carrier)
    anti = subgroup_generated(total.group, [pair(mA.embed(e), mB.carrier.group.neg(mB.embed(e)))
                                            for e in E.group.generators])
    if not is_isotropic(total, anti):
        raise BraidedModuleError("base not symmetric")
    quotient, proj = condense_map(total, anti)
    images = tuple(proj[pair(mA.embed(g), mB.carrier.group.zero)] for g in E.group.generators)
    try:
        emb = MetricEmbedding(E, quotient, images)
    except MetricGroupError as exc:
        raise BraidedModuleError(f"induced embedding invalid: {exc}") from None
    project = {}
    for x in mA.carrier.elements:
        for y in mB.carrier.elements:
            z = pair(x, y)
            if z in proj:
                project[(x, y)] = proj[z]
    return RelativeTensor(double_braiding_module(E, quotient, emb), project)


def relative_tensor(mA: BraidedEModule, mB: BraidedEModule) -> BraidedEModule:
    return relative_tensor_map(mA, mB).module


def centralized_subcategory(m: BraidedEModule) -> MetricGroup:
    """Objects of C with trivial double braiding against the image of E."""
    return restrict(m.carrier, orthogonal_complement(m.carrier, m.embed.image()))


def base_as_module(base: MetricGroup) -> BraidedEModule:
    from .metricgrp import identity_isometry

    return double_braiding_module(base, base, identity_isometry(base))


def braided_modules_over(base: MetricGroup, carriers: Mapping[str, MetricGroup]) -> list[tuple[str, BraidedEModule]]:
    """Every (carrier, embedding) pair from ``carriers``, as double-braiding modules."""
    from .metricgrp import metric_embeddings

    out = []
    for name in sorted(carriers):
        C = carriers[name]
        for k, emb in enumerate(metric_embeddings(base, C)):
            out.append((f"{name}#{k}", double_braiding_module(base, C, emb)))
    return out
