"""Modular extensions of pointed braided categories over a symmetric base.

A modular extension of C (over E) is a nondegenerate M with an embedding
iota: C -> M such that the centralizer of E inside M is exactly C.  In the
metric-group model this reads: radical(M) = 0 and iota(G_C) equals the
orthogonal complement of iota(iotaE(G_E)).

Two extensions of the same C are equivalent when an isometry phi: M -> M'
satisfies phi o iota = iota'.  When the inner categories are presented
differently, alpha: C -> C' may be any isometry fixing E and the condition
becomes phi o iota = iota' o alpha.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .braidedmod import double_braiding_module, relative_tensor_map
from .exactnum import CyclotomicNumber
from .metricgrp import (
    Element,
    FiniteAbelianGroup,
    MetricEmbedding,
    MetricGroup,
    MetricGroupError,
    abelian_groups,
    abstract_metric_group,
    classify_symmetric,
    conjugate,
    format_embedding,
    format_metric_group,
    identity_isometry,
    is_nondegenerate,
    isometries,
    metric_embeddings,
    normalized_gauss_sum,
    orthogonal_complement,
    quadratic_forms,
)

DEFAULT_MAX_ORDER = 64


class MextError(ValueError):
    pass


class SearchBoundExceeded(RuntimeError):
    pass


def max_order() -> int:
    return int(os.environ.get("STRATHOM_MAX_ORDER", DEFAULT_MAX_ORDER))


@dataclass(frozen=True)
class ModularExtension:
    base: MetricGroup
    inner: MetricGroup
    M: MetricGroup
    iota: MetricEmbedding
    iotaE: MetricEmbedding

    def __post_init__(self) -> None:
        if self.iota.source != self.inner or self.iota.target != self.M:
            raise MextError("iota must map the inner category into M")
        if self.iotaE.source != self.base or self.iotaE.target != self.inner:
            raise MextError("iotaE must map the base into the inner category")

    @property
    def e_image(self) -> tuple[Element, ...]:
        return tuple(sorted({self.iota(self.iotaE(e)) for e in self.base.elements}))

    def sort_key(self) -> tuple:
        return (self.M.group.invariant_factors, self.M.q_table, self.iota.images)


def is_modular_extension(ext: ModularExtension) -> list[tuple[str, bool, str]]:
    """Report rows (name, ok, detail) for the two defining conditions."""
    rad = [x for x in orthogonal_complement(ext.M, ext.M.elements) if x != ext.M.group.zero]
    rows = [("M nondegenerate", not rad, f"transparent element {rad[0]}" if rad else "")]
    cent = set(orthogonal_complement(ext.M, ext.e_image))
    img = set(ext.iota.image())
    detail = ""
    if cent != img:
        extra = sorted(cent - img)
        missing = sorted(img - cent)
        detail = f"centralizer has extra {extra[:1]}" if extra else f"image not centralized: {missing[:1]}"
    rows.append(("E-centralizer equals C", cent == img, detail))
    return rows


def check_candidate(base: MetricGroup, inner: MetricGroup, M: MetricGroup,
                    iota_images: Sequence[Element], iotaE_images: Sequence[Element]) -> list[tuple[str, bool, str]]:
    """Like is_modular_extension but also reports invalid embeddings."""
    try:
        iotaE = MetricEmbedding(base, inner, tuple(iotaE_images))
    except MetricGroupError as exc:
        return [("iotaE is a metric embedding", False, str(exc))]
    try:
        iota = MetricEmbedding(inner, M, tuple(iota_images))
    except MetricGroupError as exc:
        return [("iota is a metric embedding", False, str(exc))]
    return is_modular_extension(ModularExtension(base, inner, M, iota, iotaE))


def passes(ext: ModularExtension) -> bool:
    return all(ok for _, ok, _ in is_modular_extension(ext))


# ---------------------------------------------------------------------------
# group operations


def mext_unit(base: MetricGroup) -> ModularExtension:
    """Z(E) = G_E x dual(G_E) with q(g, chi) = q_E(g) + chi(g)."""
    if classify_symmetric(base) == "not-symmetric":
        raise MextError("base not symmetric")
    G = base.group
    nf = G.invariant_factors
    pairs = [(g, y) for g in G.elements for y in G.elements]

    def add(u, v):
        return (G.add(u[0], v[0]), G.add(u[1], v[1]))

    def q(u):
        g, y = u
        return base.q_table[G.index(g)] + sum((Fraction(a * b, n) for a, b, n in zip(g, y, nf)), Fraction(0))

    M, coords = abstract_metric_group(pairs, add, (G.zero, G.zero), q)
    iota = MetricEmbedding(base, M, tuple(coords[(g, G.zero)] for g in G.generators))
    return ModularExtension(base, base, M, iota, identity_isometry(base))


def mext_inverse(ext: ModularExtension) -> ModularExtension:
    E, C, M = conjugate(ext.base), conjugate(ext.inner), conjugate(ext.M)
    return ModularExtension(E, C, M, MetricEmbedding(C, M, ext.iota.images),
                            MetricEmbedding(E, C, ext.iotaE.images))


def _is_base(ext: ModularExtension) -> bool:
    return ext.inner == ext.base and ext.iotaE.images == ext.base.group.generators


def mext_mul(a: ModularExtension, b: ModularExtension) -> ModularExtension:
    if a.base != b.base:
        raise MextError("base mismatch")
    E = a.base
    ma = double_braiding_module(E, a.M, a.iota.compose(a.iotaE))
    mb = double_braiding_module(E, b.M, b.iota.compose(b.iotaE))
    prodM = relative_tensor_map(ma, mb)
    M = prodM.module.carrier
    # E boxtimes_E C = C through c -> [(0, c)] (and symmetrically)
    if _is_base(a):
        iota = MetricEmbedding(b.inner, M, tuple(prodM(a.M.group.zero, b.iota(g)) for g in b.inner.group.generators))
        return ModularExtension(E, b.inner, M, iota, b.iotaE)
    if _is_base(b):
        iota = MetricEmbedding(a.inner, M, tuple(prodM(a.iota(g), b.M.group.zero) for g in a.inner.group.generators))
        return ModularExtension(E, a.inner, M, iota, a.iotaE)
    ca = double_braiding_module(E, a.inner, a.iotaE)
    cb = double_braiding_module(E, b.inner, b.iotaE)
    prodC = relative_tensor_map(ca, cb)
    C = prodC.module.carrier
    preimage: dict[Element, tuple[Element, Element]] = {}
    for pair in sorted(prodC.project):
        preimage.setdefault(prodC.project[pair], pair)
    images = tuple(prodM(a.iota(preimage[g][0]), b.iota(preimage[g][1])) for g in C.group.generators)
    return ModularExtension(E, C, M, MetricEmbedding(C, M, images), prodC.module.embed)


def equivalence(a: ModularExtension, b: ModularExtension) -> Optional[MetricEmbedding]:
    """An isometry a.M -> b.M compatible with the embeddings, or None."""
    if a.base != b.base or a.M.order != b.M.order:
        return None
    if sorted(a.M.q_table) != sorted(b.M.q_table):
        return None
    if a.inner == b.inner and a.iotaE.images == b.iotaE.images:
        alphas = [identity_isometry(a.inner)]
    else:
        fix_e = [(a.iotaE(g), b.iotaE(g)) for g in a.base.group.generators]
        alphas = isometries(a.inner, b.inner, fix_e)
    for alpha in alphas:
        cons = [(a.iota(g), b.iota(alpha(g))) for g in a.inner.group.generators]
        phi = next(isometries(a.M, b.M, cons), None)
        if phi is not None:
            return phi
    return None


def equivalent(a: ModularExtension, b: ModularExtension) -> bool:
    return equivalence(a, b) is not None


def gauss_character(ext: ModularExtension) -> CyclotomicNumber:
    """Normalized Gauss sum of M, an eighth root of unity.

    For Tannakian E with C = E this is gauss_sum(M) / gauss_sum(E); it stays
    defined for super-Tannakian E, where gauss_sum(E) vanishes.
    """
    return normalized_gauss_sum(ext.M)


# ---------------------------------------------------------------------------
# enumeration


@dataclass(frozen=True)
class MextClassification:
    """Classes of extensions and their multiplication.

    For C = E, ``table[i][j]`` is the class of classes[i] * classes[j].  For
    C != E the product of two extensions of C is not an extension of C, so
    ``table[i][j]`` is instead the class of acting[i] * classes[j], where
    ``acting`` are the classes of extensions of E itself.
    """

    base: MetricGroup
    inner: MetricGroup
    classes: tuple[ModularExtension, ...]
    table: tuple[tuple[int, ...], ...]
    unit: int
    inverse: tuple[int, ...]
    candidates: int
    acting: tuple[ModularExtension, ...] = ()

    @property
    def is_group(self) -> bool:
        return not self.acting

    def group_report(self) -> list[tuple[str, bool, str]]:
        if not self.is_group:
            return self._torsor_report()
        n = len(self.classes)
        t = self.table
        rows = []
        bad = [(i, j, k) for i in range(n) for j in range(n) for k in range(n) if t[t[i][j]][k] != t[i][t[j][k]]]
        rows.append(("associative", not bad, f"{bad[0]}" if bad else ""))
        bad = [(i, j) for i in range(n) for j in range(n) if t[i][j] != t[j][i]]
        rows.append(("commutative", not bad, f"{bad[0]}" if bad else ""))
        bad = [i for i in range(n) if t[self.unit][i] != i]
        rows.append(("unit is mext_unit", not bad, f"{bad[0]}" if bad else ""))
        bad = [i for i in range(n) if t[i][self.inverse[i]] != self.unit]
        rows.append(("inverse is mext_inverse", not bad, f"{bad[0]}" if bad else ""))
        bad = [i for i in range(n) if sorted(t[i]) != list(range(n))]
        rows.append(("rows are permutations", not bad, f"{bad[0]}" if bad else ""))
        return rows

    def _torsor_report(self) -> list[tuple[str, bool, str]]:
        n, t = len(self.classes), self.table
        rows = []
        bad = [j for j in range(n) if t[self.unit][j] != j]
        rows.append(("unit acts trivially", not bad, f"{bad[0]}" if bad else ""))
        bad = [i for i in range(len(t)) if sorted(t[i]) != list(range(n))]
        rows.append(("rows are permutations", not bad, f"{bad[0]}" if bad else ""))
        bad = [j for j in range(n) if sorted(t[i][j] for i in range(len(t))) != list(range(n))]
        rows.append(("action free and transitive", not bad and len(t) == n, f"{bad[0]}" if bad else ""))
        return rows

    def element_order(self, i: int) -> int:
        k, acc = 1, i
        while acc != self.unit:
            acc = self.table[acc][i]
            k += 1
        return k

    def is_cyclic(self) -> bool:
        if not self.is_group:
            return False
        n = len(self.classes)
        return any(self.element_order(i) == n for i in range(n))


def _extensions_for_form(args: tuple[MetricGroup, MetricGroup, MetricGroup, MetricEmbedding]) -> list[ModularExtension]:
    base, inner, M, iotaE = args
    if not is_nondegenerate(M):
        return []
    out = []
    for iota in metric_embeddings(inner, M):
        ext = ModularExtension(base, inner, M, iota, iotaE)
        if passes(ext):
            out.append(ext)
    return out


def candidate_forms(order: int) -> Iterator[MetricGroup]:
    for factors in abelian_groups(order):
        yield from quadratic_forms(FiniteAbelianGroup(factors))


def find_class(classes: Sequence[ModularExtension], ext: ModularExtension) -> int:
    for i, rep in enumerate(classes):
        if equivalent(ext, rep):
            return i
    raise MextError("extension not equivalent to any enumerated class")


def enumerate_mext(base: MetricGroup, inner: Optional[MetricGroup] = None,
                   iotaE: Optional[MetricEmbedding] = None, jobs: int = 1) -> MextClassification:
    """All modular extensions of ``inner`` over ``base`` up to equivalence.

    Classes are ordered by (invariant factors, q table, embedding images) of
    their first member in that order, which is also the representative.
    """
    if classify_symmetric(base) == "not-symmetric":
        raise MextError("base not symmetric")
    inner = base if inner is None else inner
    iotaE = identity_isometry(base) if iotaE is None else iotaE
    order = base.order * inner.order
    if order > max_order():
        raise SearchBoundExceeded(f"search order {order} exceeds bound {max_order()}")
    forms = list(candidate_forms(order))
    work = [(base, inner, M, iotaE) for M in forms]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extensions_for_form, work, chunksize=8))
    else:
        results = [_extensions_for_form(w) for w in work]
    found = sorted((ext for chunk in results for ext in chunk), key=ModularExtension.sort_key)
    classes: list[ModularExtension] = []
    for ext in found:
        if not any(equivalent(ext, rep) for rep in classes):
            classes.append(ext)
    if not classes:
        raise MextError("no modular extension found")
    n = len(classes)
    if inner == base and iotaE.images == base.group.generators:
        table = tuple(tuple(find_class(classes, mext_mul(classes[i], classes[j])) for j in range(n)) for i in range(n))
        unit = find_class(classes, mext_unit(base))
        inverse = tuple(find_class(classes, mext_inverse(c)) for c in classes)
        return MextClassification(base, inner, tuple(classes), table, unit, inverse, len(found))
    group = enumerate_mext(base, jobs=jobs)
    table = tuple(tuple(find_class(classes, mext_mul(g, c)) for c in classes) for g in group.classes)
    return MextClassification(base, inner, tuple(classes), table, group.unit, group.inverse, len(found),
                              group.classes)


def format_classification(result: MextClassification) -> str:
    lines = [f"classes {len(result.classes)}"]
    for i, ext in enumerate(result.classes):
        lines.append(f"class {i}")
        lines.append(format_metric_group(ext.M).rstrip("\n"))
        lines.append(format_embedding(ext.iota))
        lines.append(f"gauss {gauss_character(ext)}")
    lines.append("table" if result.is_group else "action")
    for row in result.table:
        lines.append(" ".join(str(v) for v in row))
    lines.append(f"unit {result.unit}")
    for name, ok, detail in result.group_report():
        lines.append(f"check {name}: {'pass' if ok else 'FAIL ' + detail}")
    if result.is_group:
        lines.append(f"cyclic {'yes' if result.is_cyclic() else 'no'}")
    return "\n".join(lines) + "\n"
