"""Finite abelian metric groups (G, q).

A metric group is the skeletal model of a pointed braided fusion category:
simple objects are the elements of G, the twist of x is exp(2 pi i q(x)) and
the double braiding of x and y is exp(2 pi i b(x, y)) where

    b(x, y) = q(x + y) - q(x) - q(y)  (mod 1).

Groups are always presented by invariant factors n_1 | n_2 | ... | n_r and
elements are coordinate tuples.  The quadratic form is stored as a full
table indexed like ``group.elements``; all checks are exhaustive.

Subgroups are sorted tuples of elements.  Whenever an operation produces a
new group (quotients, direct sums) it is re-presented by invariant factors and
a coordinate map is available through the ``*_map`` variants.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

from .exactnum import CyclotomicNumber, RationalMod1, cyc_sqrt, root_of_unity, ZERO

Element = tuple[int, ...]
Subgroup = tuple[Element, ...]


class MetricGroupError(ValueError):
    pass


class CondensationError(MetricGroupError):
    pass


def _frac_mod1(v: Fraction) -> Fraction:
    return v - math.floor(v)


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class FiniteAbelianGroup:
    invariant_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        nf = tuple(int(n) for n in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", nf)
        for n in nf:
            if n < 2:
                raise MetricGroupError(f"invariant factor {n} < 2")
        for a, b in zip(nf, nf[1:]):
            if b % a:
                raise MetricGroupError(f"invariant factors {nf} are not a divisibility chain")

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    @cached_property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @cached_property
    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    @cached_property
    def elements(self) -> tuple[Element, ...]:
        return tuple(itertools.product(*(range(n) for n in self.invariant_factors)))

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides, acc = [], 1
        for n in reversed(self.invariant_factors):
            strides.append(acc)
            acc *= n
        return tuple(reversed(strides))

    @property
    def zero(self) -> Element:
        return (0,) * self.rank

    @cached_property
    def generators(self) -> tuple[Element, ...]:
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    def index(self, x: Element) -> int:
        return sum(a * s for a, s in zip(x, self._strides))

    def add(self, x: Element, y: Element) -> Element:
        return tuple((a + b) % n for a, b, n in zip(x, y, self.invariant_factors))

    def sub(self, x: Element, y: Element) -> Element:
        return tuple((a - b) % n for a, b, n in zip(x, y, self.invariant_factors))

    def neg(self, x: Element) -> Element:
        return tuple((-a) % n for a, n in zip(x, self.invariant_factors))

    def scale(self, k: int, x: Element) -> Element:
        return tuple((k * a) % n for a, n in zip(x, self.invariant_factors))

    def normalize(self, x: Iterable[int]) -> Element:
        x = tuple(x)
        if len(x) != self.rank:
            raise MetricGroupError(f"element {x} has wrong length for {self.invariant_factors}")
        return tuple(a % n for a, n in zip(x, self.invariant_factors))

    def element_order(self, x: Element) -> int:
        return reduce(lambda acc, t: acc * t // math.gcd(acc, t),
                      (n // math.gcd(a, n) for a, n in zip(x, self.invariant_factors)), 1)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        return tuple(self.element_order(x) for x in self.elements)

    def combine(self, coeffs: Sequence[int], images: Sequence[Element]) -> Element:
        acc = [0] * self.rank
        for c, y in zip(coeffs, images):
            if c:
                for i, a in enumerate(y):
                    acc[i] += c * a
        return tuple(a % n for a, n in zip(acc, self.invariant_factors))


TRIVIAL_GROUP = FiniteAbelianGroup(())


def abelian_groups(order: int) -> list[tuple[int, ...]]:
    """Invariant-factor tuples of all abelian groups of the given order."""
    if order < 1:
        raise ValueError("order must be positive")
    primes: list[tuple[int, int]] = []
    n, p = order, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            primes.append((p, e))
        p += 1
    if n > 1:
        primes.append((n, 1))

    def partitions(e: int, cap: int | None = None) -> Iterator[list[int]]:
        cap = e if cap is None else cap
        if e == 0:
            yield []
            return
        for first in range(min(e, cap), 0, -1):
            for rest in partitions(e - first, first):
                yield [first] + rest

    result = []
    for combo in itertools.product(*(list(partitions(e)) for _, e in primes)):
        length = max((len(part) for part in combo), default=0)
        factors = []
        for i in range(length):
            f = 1
            for (pr, _), part in zip(primes, combo):
                if i < len(part):
                    f *= pr ** part[i]
            factors.append(f)
        result.append(tuple(sorted(factors)))
    return sorted(result)


def present(elements: Sequence[Hashable], add: Callable, zero: Hashable) -> tuple[tuple[int, ...], list]:
    """Find invariant factors and matching generators of an abstract group.

    ``elements`` lists the group, ``add`` is its operation.  The returned
    generators g_1..g_r have orders n_1 | ... | n_r and the map
    (c_i) -> sum c_i g_i is an isomorphism.  The choice is deterministic:
    the lexicographically first valid generator list in the order of
    ``elements``, chosen from the largest factor down.
    """
    order = len(elements)
    if order == 1:
        return (), []

    def mult(k: int, x):
        acc = zero
        for _ in range(k):
            acc = add(acc, x)
        return acc

    orders = {}
    for x in elements:
        k, acc = 1, x
        while acc != zero:
            acc = add(acc, x)
            k += 1
        orders[x] = k

    # p-primary partitions from counts of elements killed by p^k
    factors_by_rank: list[int] = []
    n, p, primes = order, 2, []
    while p * p <= n:
        if n % p == 0:
            primes.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        primes.append(n)
    parts_by_prime = {}
    for p in primes:
        e_total = 0
        m = order
        while m % p == 0:
            m //= p
            e_total += 1
        counts = [0]
        k = 1
        while counts[-1] < e_total:
            killed = sum(1 for x in elements if (p ** k) % orders[x] == 0)
            counts.append(round(math.log(killed, p)))
            k += 1
        ge = [counts[i] - counts[i - 1] for i in range(1, len(counts))]  # parts >= i
        parts = []
        for i in range(len(ge)):
            nxt = ge[i + 1] if i + 1 < len(ge) else 0
            parts.extend([i + 1] * (ge[i] - nxt))
        parts_by_prime[p] = sorted(parts, reverse=True)
    length = max(len(v) for v in parts_by_prime.values())
    for i in range(length):
        f = 1
        for p, parts in parts_by_prime.items():
            if i < len(parts):
                f *= p ** parts[i]
        factors_by_rank.append(f)
    factors = tuple(sorted(factors_by_rank))

    by_order: dict[int, list] = {}
    for x in elements:
        by_order.setdefault(orders[x], []).append(x)

    chosen: list = []

    def extend(span: set, idx: int) -> bool:
        if idx < 0:
            return True
        n_i = factors[idx]
        for g in by_order.get(n_i, []):
            multiples = [zero]
            for _ in range(n_i - 1):
                multiples.append(add(multiples[-1], g))
            if any(m in span for m in multiples[1:]):
                continue
            new_span = {add(s, m) for s in span for m in multiples}
            if len(new_span) != len(span) * n_i:
                continue
            chosen.append(g)
            if extend(new_span, idx - 1):
                return True
            chosen.pop()
        return False

    if not extend({zero}, len(factors) - 1):
        raise MetricGroupError("failed to present abelian group")  # unreachable for valid input
    gens = list(reversed(chosen))
    return factors, gens


# ---------------------------------------------------------------------------
# metric groups


@dataclass(frozen=True, eq=False)
class MetricGroup:
    """A finite abelian group with a quadratic form q: G -> Q/Z."""

    group: FiniteAbelianGroup
    q_table: tuple[Fraction, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if len(self.q_table) != self.group.order:
            raise MetricGroupError("q table length does not match group order")
        object.__setattr__(self, "q_table", tuple(_frac_mod1(Fraction(v)) for v in self.q_table))
        problems = self.problems()
        if problems:
            raise MetricGroupError("; ".join(problems))

    # identity is value identity; names are cosmetic
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricGroup):
            return NotImplemented
        return self.group == other.group and self.q_table == other.q_table

    def __hash__(self) -> int:
        return hash((self.group, self.q_table))

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def elements(self) -> tuple[Element, ...]:
        return self.group.elements

    @cached_property
    def _den(self) -> int:
        return reduce(lambda a, b: a * b // math.gcd(a, b), (v.denominator for v in self.q_table), 1)

    @cached_property
    def _qi(self) -> tuple[int, ...]:
        d = self._den
        return tuple(int(v * d) for v in self.q_table)

    @cached_property
    def _bi(self) -> tuple[tuple[int, ...], ...]:
        G, qi, d = self.group, self._qi, self._den
        els = G.elements
        idx = {x: i for i, x in enumerate(els)}
        rows = []
        for x in els:
            qx = qi[idx[x]]
            rows.append(tuple((qi[idx[G.add(x, y)]] - qx - qi[j]) % d for j, y in enumerate(els)))
        return tuple(rows)

    def q(self, x: Element) -> RationalMod1:
        return RationalMod1(self.q_table[self.group.index(x)])

    def b(self, x: Element, y: Element) -> RationalMod1:
        G = self.group
        return RationalMod1(Fraction(self._bi[G.index(x)][G.index(y)], self._den))

    def b_is_zero(self, x: Element, y: Element) -> bool:
        G = self.group
        return self._bi[G.index(x)][G.index(y)] == 0

    def problems(self) -> list[str]:
        """Violations of the quadratic-form axioms (empty when valid)."""
        G = self.group
        out = []
        qi, d = self._qi, self._den
        if qi[0] != 0:
            out.append("q(0) != 0")
        for i, x in enumerate(G.elements):
            if qi[G.index(G.neg(x))] != qi[i]:
                out.append(f"q(-x) != q(x) at x={x}")
                break
        bi = self._bi
        n = G.order
        for g in G.generators:
            gi = G.index(g)
            for i, x in enumerate(G.elements):
                xg = G.index(G.add(x, g))
                row_x, row_g, row_xg = bi[i], bi[gi], bi[xg]
                for j in range(n):
                    if (row_xg[j] - row_x[j] - row_g[j]) % d:
                        out.append(f"b not additive at x={x}, g={g}, y={G.elements[j]}")
                        return out
        return out

    def restricted_values(self, H: Iterable[Element]) -> list[RationalMod1]:
        return [self.q(h) for h in H]


def metric_group(invariant_factors: Sequence[int], q: Mapping[Element, object] | Callable[[Element], object],
                 name: str = "") -> MetricGroup:
    G = FiniteAbelianGroup(tuple(invariant_factors))
    if callable(q):
        table = [RationalMod1(q(x)).value for x in G.elements]
    else:
        table = [RationalMod1(q[x]).value if x in q else Fraction(0) for x in G.elements]
    return MetricGroup(G, tuple(table), name)


TRIVIAL = MetricGroup(TRIVIAL_GROUP, (Fraction(0),), "trivial")


def bicharacter(mg: MetricGroup) -> dict[tuple[Element, Element], RationalMod1]:
    els = mg.elements
    return {(x, y): mg.b(x, y) for x in els for y in els}


# ---------------------------------------------------------------------------
# subgroups


def subgroup_generated(G: FiniteAbelianGroup, gens: Iterable[Element]) -> Subgroup:
    span = {G.zero}
    for g in gens:
        g = G.normalize(g)
        if g in span:
            continue
        multiples = [G.zero]
        m = g
        while m != G.zero:
            multiples.append(m)
            m = G.add(m, g)
        span = {G.add(s, t) for s in span for t in multiples}
    return tuple(sorted(span))


def is_subgroup(G: FiniteAbelianGroup, H: Iterable[Element]) -> bool:
    Hs = set(H)
    if G.zero not in Hs:
        return False
    return all(G.sub(x, y) in Hs for x in Hs for y in Hs)


def _subgroup_key(H: Subgroup) -> tuple:
    return (len(H), H)


def all_subgroups(G: FiniteAbelianGroup) -> list[Subgroup]:
    """Every subgroup, sorted by (order, elements).  Intended for small groups."""
    seen = {frozenset([G.zero])}
    frontier = [frozenset([G.zero])]
    while frontier:
        nxt = []
        for S in frontier:
            for g in G.elements:
                if g in S:
                    continue
                T = frozenset(subgroup_generated(G, list(S) + [g]))
                if T not in seen:
                    seen.add(T)
                    nxt.append(T)
        frontier = nxt
    return sorted((tuple(sorted(S)) for S in seen), key=_subgroup_key)


def orthogonal_complement(mg: MetricGroup, H: Iterable[Element]) -> Subgroup:
    H = list(H)
    return tuple(x for x in mg.elements if all(mg.b_is_zero(x, h) for h in H))


def radical(mg: MetricGroup) -> Subgroup:
    return orthogonal_complement(mg, mg.elements)


def is_nondegenerate(mg: MetricGroup) -> bool:
    return len(radical(mg)) == 1


def classify_symmetric(mg: MetricGroup) -> str:
    if len(radical(mg)) != mg.order:
        return "not-symmetric"
    if all(v == 0 for v in mg.q_table):
        return "Tannakian"
    return "super-Tannakian"


def is_isotropic(mg: MetricGroup, H: Iterable[Element]) -> bool:
    return all(mg.q_table[mg.group.index(h)] == 0 for h in H)


def isotropic_subgroups(mg: MetricGroup) -> list[Subgroup]:
    G = mg.group
    zero_q = [x for x in G.elements if mg.q_table[G.index(x)] == 0]
    start = frozenset([G.zero])
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for S in frontier:
            for g in zero_q:
                if g in S or not all(mg.b_is_zero(g, s) for s in S):
                    continue
                T = frozenset(subgroup_generated(G, list(S) + [g]))
                if T not in seen:
                    seen.add(T)
                    nxt.append(T)
        frontier = nxt
    return sorted((tuple(sorted(S)) for S in seen), key=_subgroup_key)


def restrict_map(mg: MetricGroup, H: Iterable[Element]) -> tuple[MetricGroup, dict[Element, Element]]:
    """Present a subgroup as a metric group; returns it and the map new -> old."""
    H = tuple(sorted(set(H)))
    G = mg.group
    if not is_subgroup(G, H):
        raise MetricGroupError("not a subgroup")
    factors, gens = present(H, G.add, G.zero)
    sub = FiniteAbelianGroup(factors)
    to_old = {c: G.combine(c, gens) for c in sub.elements}
    table = tuple(mg.q_table[G.index(to_old[c])] for c in sub.elements)
    return MetricGroup(sub, table), to_old


def restrict(mg: MetricGroup, H: Iterable[Element]) -> MetricGroup:
    return restrict_map(mg, H)[0]


# ---------------------------------------------------------------------------
# constructions


def condense_map(mg: MetricGroup, H: Iterable[Element]) -> tuple[MetricGroup, dict[Element, Element]]:
    """Local modules over an isotropic subgroup: (H^perp / H, induced q).

    Returns the quotient and the projection from H^perp to its coordinates.
    """
    G = mg.group
    H = tuple(sorted(set(G.normalize(h) for h in H)))
    if not is_subgroup(G, H):
        raise CondensationError("condensation by a non-subgroup")
    if not is_isotropic(mg, H):
        raise CondensationError("non-isotropic condensation")
    perp = orthogonal_complement(mg, H)
    rep = {x: min(G.add(x, h) for h in H) for x in perp}
    reps = sorted(set(rep.values()))

    def qadd(u: Element, v: Element) -> Element:
        return rep[G.add(u, v)]

    factors, gens = present(reps, qadd, rep[G.zero])
    Q = FiniteAbelianGroup(factors)
    coords: dict[Element, Element] = {}
    for c in Q.elements:
        acc = rep[G.zero]
        for k, g in zip(c, gens):
            for _ in range(k):
                acc = qadd(acc, g)
        coords[acc] = c
    table = [Fraction(0)] * Q.order
    for r, c in coords.items():
        table[Q.index(c)] = mg.q_table[G.index(r)]
    quotient = MetricGroup(Q, tuple(table))
    return quotient, {x: coords[rep[x]] for x in perp}


def condense(mg: MetricGroup, H: Iterable[Element]) -> MetricGroup:
    return condense_map(mg, H)[0]


def direct_sum_map(a: MetricGroup, b: MetricGroup) -> tuple[MetricGroup, Callable[[Element, Element], Element]]:
    """Orthogonal direct sum; returns it and the map (x, y) -> coordinates."""
    fa, fb = a.group.invariant_factors, b.group.invariant_factors
    joint = fa + fb
    chain = all(y % x == 0 for x, y in zip(joint, joint[1:]))
    if chain:
        G = FiniteAbelianGroup(joint)
        table = tuple(_frac_mod1(a.q_table[a.group.index(x[: len(fa)])] + b.q_table[b.group.index(x[len(fa):])])
                      for x in G.elements)
        return MetricGroup(G, table), lambda x, y: tuple(x) + tuple(y)
    pairs = [(x, y) for x in a.elements for y in b.elements]

    def padd(u, v):
        return (a.group.add(u[0], v[0]), b.group.add(u[1], v[1]))

    zero = (a.group.zero, b.group.zero)
    factors, gens = present(pairs, padd, zero)
    G = FiniteAbelianGroup(factors)
    coords = {}
    for c in G.elements:
        x = a.group.combine(c, [g[0] for g in gens])
        y = b.group.combine(c, [g[1] for g in gens])
        coords[(x, y)] = c
    table = [Fraction(0)] * G.order
    for (x, y), c in coords.items():
        table[G.index(c)] = _frac_mod1(a.q_table[a.group.index(x)] + b.q_table[b.group.index(y)])
    return MetricGroup(G, tuple(table)), lambda x, y: coords[(tuple(x), tuple(y))]


def abstract_metric_group(elements: Sequence[Hashable], add: Callable, zero: Hashable,
                          q: Callable[[Hashable], object]) -> tuple[MetricGroup, dict]:
    """Present an abstract abelian group with a quadratic form.

    Returns the metric group and the map from abstract elements to coordinates.
    """
    factors, gens = present(elements, add, zero)
    G = FiniteAbelianGroup(factors)
    coords = {}
    for c in G.elements:
        acc = zero
        for k, g in zip(c, gens):
            for _ in range(k):
                acc = add(acc, g)
        coords[acc] = c
    table = [Fraction(0)] * G.order
    for x, c in coords.items():
        table[G.index(c)] = RationalMod1(q(x)).value
    return MetricGroup(G, tuple(table)), coords


def direct_sum(a: MetricGroup, b: MetricGroup) -> MetricGroup:
    return direct_sum_map(a, b)[0]


def conjugate(mg: MetricGroup) -> MetricGroup:
    name = mg.name[:-4] if mg.name.endswith("-bar") else (mg.name + "-bar" if mg.name else "")
    return MetricGroup(mg.group, tuple(_frac_mod1(-v) for v in mg.q_table), name)


def gauss_sum(mg: MetricGroup) -> CyclotomicNumber:
    counts: dict[Fraction, int] = {}
    for v in mg.q_table:
        counts[v] = counts.get(v, 0) + 1
    total = ZERO
    for v in sorted(counts):
        total = total + root_of_unity(v) * counts[v]
    return total


def normalized_gauss_sum(mg: MetricGroup) -> CyclotomicNumber:
    """Gauss sum divided by sqrt|G|; an eighth root of unity when nondegenerate."""
    return gauss_sum(mg) * cyc_sqrt(Fraction(1, mg.order))


# ---------------------------------------------------------------------------
# homomorphisms, embeddings and isometries


@dataclass(frozen=True)
class MetricEmbedding:
    """A q-preserving injective homomorphism, given by generator images."""

    source: MetricGroup
    target: MetricGroup
    images: tuple[Element, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "images", tuple(self.target.group.normalize(y) for y in self.images))
        problems = self.problems()
        if problems:
            raise MetricGroupError("; ".join(problems))

    def __call__(self, x: Element) -> Element:
        return self.target.group.combine(x, self.images)

    @cached_property
    def table(self) -> dict[Element, Element]:
        return {x: self(x) for x in self.source.elements}

    def image(self) -> Subgroup:
        return tuple(sorted(set(self.table.values())))

    def problems(self) -> list[str]:
        S, T = self.source, self.target
        out = []
        if len(self.images) != S.group.rank:
            return ["wrong number of generator images"]
        for n, y in zip(S.group.invariant_factors, self.images):
            if T.group.scale(n, y) != T.group.zero:
                out.append(f"image {y} does not have order dividing {n}")
        if out:
            return out
        seen = {}
        for x in S.elements:
            y = self(x)
            if y in seen:
                out.append(f"not injective: {seen[y]} and {x} both map to {y}")
                break
            seen[y] = x
        for x in S.elements:
            if S.q_table[S.group.index(x)] != T.q_table[T.group.index(self(x))]:
                out.append(f"q not preserved at {x}")
                break
        return out

    def is_surjective(self) -> bool:
        return self.source.order == self.target.order

    def compose(self, other: "MetricEmbedding") -> "MetricEmbedding":
        """Return ``other`` followed by ``self``."""
        return MetricEmbedding(other.source, self.target, tuple(self(y) for y in other.images))

    def inverse(self) -> "MetricEmbedding":
        if not self.is_surjective():
            raise MetricGroupError("only isometries can be inverted")
        back = {y: x for x, y in self.table.items()}
        return MetricEmbedding(self.target, self.source, tuple(back[g] for g in self.target.group.generators))


def identity_isometry(mg: MetricGroup) -> MetricEmbedding:
    return MetricEmbedding(mg, mg, mg.group.generators)


def trivial_embedding(target: MetricGroup) -> MetricEmbedding:
    return MetricEmbedding(TRIVIAL, target, ())


def _hom_search(src: MetricGroup, tgt: MetricGroup, bijective: bool,
                constraints: Sequence[tuple[Element, Element]] = ()) -> Iterator[tuple[Element, ...]]:
    """Yield q-preserving injective generator images in lexicographic order."""
    S, T = src.group, tgt.group
    if bijective and S.invariant_factors != T.invariant_factors:
        return
    if S.order > T.order or T.order % S.order:
        return
    r = S.rank
    gens = S.generators
    q_src = [src.q_table[S.index(g)] for g in gens]
    cands = [
        [y for k, y in enumerate(T.elements) if T.orders[k] == n and tgt.q_table[k] == q_src[i]]
        for i, n in enumerate(S.invariant_factors)
    ]
    b_src = [[src.b(gens[i], gens[j]) for j in range(r)] for i in range(r)]
    # constraint x is checkable once the last nonzero coordinate is assigned
    by_level: dict[int, list[tuple[Element, Element]]] = {}
    for x, y in constraints:
        x = S.normalize(x)
        nz = [i for i, a in enumerate(x) if a]
        if not nz:
            if T.normalize(y) != T.zero:
                return
            continue
        by_level.setdefault(nz[-1], []).append((x, T.normalize(y)))

    chosen: list[Element] = []

    def rec(i: int, span: frozenset) -> Iterator[tuple[Element, ...]]:
        if i == r:
            yield tuple(chosen)
            return
        n = S.invariant_factors[i]
        for y in cands[i]:
            if any(tgt.b(y, chosen[j]) != b_src[i][j] for j in range(i)):
                continue
            multiples = [T.zero]
            for _ in range(n - 1):
                multiples.append(T.add(multiples[-1], y))
            if any(m in span for m in multiples[1:]):
                continue
            new_span = frozenset(T.add(s, m) for s in span for m in multiples)
            if len(new_span) != len(span) * n:
                continue
            chosen.append(y)
            ok = all(T.combine(x, chosen + [T.zero] * (r - i - 1)) == z for x, z in by_level.get(i, []))
            if ok:
                yield from rec(i + 1, new_span)
            chosen.pop()

    yield from rec(0, frozenset([T.zero]))


def isometries(a: MetricGroup, b: MetricGroup,
               constraints: Sequence[tuple[Element, Element]] = ()) -> Iterator[MetricEmbedding]:
    for images in _hom_search(a, b, True, constraints):
        yield MetricEmbedding(a, b, images)


def isometry_exists(a: MetricGroup, b: MetricGroup,
                    constraints: Sequence[tuple[Element, Element]] = ()) -> Optional[MetricEmbedding]:
    """First isometry a -> b in lexicographic search order, or None.

    ``constraints`` are pairs (x, y) the isometry must send x to y.
    """
    if a.order != b.order:
        return None
    if sorted(a.q_table) != sorted(b.q_table):
        return None
    return next(isometries(a, b, constraints), None)


def metric_embeddings(source: MetricGroup, target: MetricGroup,
                      constraints: Sequence[tuple[Element, Element]] = ()) -> Iterator[MetricEmbedding]:
    for images in _hom_search(source, target, False, constraints):
        yield MetricEmbedding(source, target, images)


# ---------------------------------------------------------------------------
# enumeration of quadratic forms


def quadratic_forms(G: FiniteAbelianGroup) -> Iterator[MetricGroup]:
    """All quadratic forms on G, in lexicographic order of generator data.

    q(g_i) = a_i / (2 n_i) with n_i a_i even, b(g_i, g_j) = c_ij / gcd(n_i, n_j).
    """
    nf = G.invariant_factors
    r = len(nf)
    diag_choices = [[Fraction(a, 2 * n) for a in range(2 * n) if (n * a) % 2 == 0] for n in nf]
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]
    off_choices = [[Fraction(c, math.gcd(nf[i], nf[j])) for c in range(math.gcd(nf[i], nf[j]))] for i, j in pairs]
    for diag in itertools.product(*diag_choices):
        for off in itertools.product(*off_choices):
            bmat = {p: v for p, v in zip(pairs, off)}
            table = []
            for x in G.elements:
                v = sum((x[i] * x[i] * diag[i] for i in range(r)), Fraction(0))
                v += sum((x[i] * x[j] * bmat[(i, j)] for i, j in pairs), Fraction(0))
                table.append(_frac_mod1(v))
            yield MetricGroup(G, tuple(table))


# ---------------------------------------------------------------------------
# text format


def _fmt_elem(x: Element) -> str:
    return "(" + ", ".join(str(a) for a in x) + ")"


def format_metric_group(mg: MetricGroup) -> str:
    lines = [_fmt_elem(mg.group.invariant_factors)]
    for x, v in zip(mg.elements, mg.q_table):
        lines.append(f"{_fmt_elem(x)} : {v.numerator}/{v.denominator}")
    return "\n".join(lines) + "\n"


def parse_element(text: str) -> Element:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise MetricGroupError(f"bad element {text!r}")
    inner = text[1:-1].strip().rstrip(",")
    if not inner:
        return ()
    return tuple(int(t) for t in inner.split(","))


def parse_metric_group(text: str, name: str = "") -> MetricGroup:
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MetricGroupError("empty metric group text")
    G = FiniteAbelianGroup(parse_element(lines[0]))
    table: dict[Element, Fraction] = {}
    for ln in lines[1:]:
        if ":" not in ln:
            raise MetricGroupError(f"bad line {ln!r}")
        left, right = ln.split(":", 1)
        x = G.normalize(parse_element(left))
        if x in table:
            raise MetricGroupError(f"duplicate element {x}")
        table[x] = RationalMod1.parse(right).value
    if len(table) != G.order:
        raise MetricGroupError(f"expected {G.order} elements, got {len(table)}")
    return MetricGroup(G, tuple(table[x] for x in G.elements), name)


def format_embedding(emb: MetricEmbedding) -> str:
    return " ".join(["embed"] + [_fmt_elem(y) for y in emb.images])


# ---------------------------------------------------------------------------
# built-in library


def _lib() -> dict[str, MetricGroup]:
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    out = {
        "trivial": TRIVIAL,
        "rep-z2": metric_group((2,), {(1,): 0}, "rep-z2"),
        "svec": metric_group((2,), {(1,): half}, "svec"),
        "toric-code": metric_group((2, 2), {(1, 0): 0, (0, 1): 0, (1, 1): half}, "toric-code"),
        "semion": metric_group((2,), {(1,): quarter}, "semion"),
        "anti-semion": metric_group((2,), {(1,): 3 * quarter}, "anti-semion"),
        "double-semion": metric_group((2, 2), {(1, 0): quarter, (0, 1): 3 * quarter, (1, 1): 0}, "double-semion"),
        "three-fermion": metric_group((2, 2), {(1, 0): half, (0, 1): half, (1, 1): half}, "three-fermion"),
    }
    for k in (1, 3, 5, 7):
        out[f"z4-{k}"] = metric_group((4,), lambda x, k=k: Fraction(k * x[0] * x[0], 8), f"z4-{k}")
    return out


LIBRARY: dict[str, MetricGroup] = _lib()


def library_names() -> list[str]:
    return sorted(LIBRARY)


def get_metric_group(name: str) -> MetricGroup:
    try:
        return LIBRARY[name]
    except KeyError:
        raise MetricGroupError(f"unknown metric group {name!r}") from None


def parse_embedding(line: str, source: MetricGroup, target: MetricGroup) -> MetricEmbedding:
    line = line.strip()
    if not line.startswith("embed"):
        raise MetricGroupError(f"bad embedding line {line!r}")
    images = tuple(parse_element(m) for m in re.findall(r"\([^()]*\)", line[len("embed"):]))
    return MetricEmbedding(source, target, images)
