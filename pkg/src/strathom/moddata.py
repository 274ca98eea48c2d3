"""Modular data: fusion rules, S and T, checked exactly.

Conventions: ``S`` is the unitary S-matrix (S conj(S)^T = 1) with S_00 > 0
and labels[0] the unit.  The normalized pairing is s~_xy = S_xy / S_00, so
dimensions are d_x = s~_0x and the global dimension is D^2 = 1 / S_00^2.
T is stored as exponents: T_x = exp(2 pi i t_x).  The central charge is not
tracked; (ST)^3 is only required to be proportional to S^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .exactnum import ONE, ZERO, CyclotomicNumber, RationalMod1, cyc_dot, cyc_sqrt, rational, root_of_unity
from .metricgrp import Element, MetricGroup

Matrix = tuple[tuple[CyclotomicNumber, ...], ...]


class ModularDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FusionRingData:
    labels: tuple[str, ...]
    dual: tuple[int, ...]
    N: Mapping[tuple[int, int, int], int]

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise ModularDataError("duplicate labels")
        if sorted(self.dual) != list(range(self.rank)):
            raise ModularDataError("dual is not a permutation of labels")
        object.__setattr__(self, "N", {k: int(v) for k, v in self.N.items() if v})

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def unit(self) -> str:
        return self.labels[0]

    def n(self, i: int, j: int, k: int) -> int:
        return self.N.get((i, j, k), 0)

    def product(self, i: int, j: int) -> dict[int, int]:
        return {k: self.n(i, j, k) for k in range(self.rank) if self.n(i, j, k)}

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ModularDataError(f"unknown label {label!r}") from None

    def problems(self, braided: bool = True) -> list[tuple[str, bool, str]]:
        r = self.rank
        out = []
        bad = [(i, k) for i in range(r) for k in range(r)
               if self.n(i, 0, k) != (i == k) or self.n(0, i, k) != (i == k)]
        out.append(("fusion unit", not bad, f"first failure at {bad[0]}" if bad else ""))
        bad = []
        for i in range(r):
            for j in range(r):
                for l in range(r):
                    for m in range(r):
                        lhs = sum(self.n(i, j, k) * self.n(k, l, m) for k in range(r))
                        rhs = sum(self.n(j, l, k) * self.n(i, k, m) for k in range(r))
                        if lhs != rhs:
                            bad.append((i, j, l, m))
                            break
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(("fusion associativity", not bad, f"first failure at {bad[0]}" if bad else ""))
        bad = [i for i in range(r) if self.n(i, self.dual[i], 0) != 1 or self.dual[self.dual[i]] != i]
        out.append(("duals", not bad, f"label {self.labels[bad[0]]}" if bad else ""))
        if braided:
            bad = [(i, j, k) for (i, j, k) in self.N if self.n(j, i, k) != self.n(i, j, k)]
            out.append(("fusion commutativity", not bad, f"first failure at {bad[0]}" if bad else ""))
        return out


@dataclass(frozen=True, eq=False)
class ModularData:
    ring: FusionRingData
    S: Matrix
    T: tuple[RationalMod1, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        r = self.ring.rank
        if len(self.S) != r or any(len(row) != r for row in self.S):
            raise ModularDataError("S has wrong shape")
        if len(self.T) != r:
            raise ModularDataError("T has wrong length")
        if self.S[0][0].is_zero():
            raise ModularDataError("S_00 must be nonzero")
        object.__setattr__(self, "T", tuple(RationalMod1(t) for t in self.T))

    @property
    def labels(self) -> tuple[str, ...]:
        return self.ring.labels

    @property
    def rank(self) -> int:
        return self.ring.rank

    @cached_property
    def _inv_s00(self) -> CyclotomicNumber:
        return self.S[0][0].reciprocal()

    @cached_property
    def s_tilde(self) -> Matrix:
        k = self._inv_s00
        return tuple(tuple(v * k for v in row) for row in self.S)

    @cached_property
    def dims(self) -> tuple[CyclotomicNumber, ...]:
        return self.s_tilde[0]

    @cached_property
    def global_dim_squared(self) -> CyclotomicNumber:
        return self._inv_s00 * self._inv_s00

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModularData):
            return NotImplemented
        return (self.labels == other.labels and self.ring.dual == other.ring.dual and self.ring.N == other.ring.N
                and self.S == other.S and self.T == other.T)

    def __hash__(self) -> int:
        return hash((self.labels, self.T))


# ---------------------------------------------------------------------------
# matrix helpers


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(cyc_dot(row, col) for col in cols) for row in a)


def _proportional(a: Matrix, b: Matrix) -> bool:
    ratio: Optional[CyclotomicNumber] = None
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            if y.is_zero() != x.is_zero():
                return False
            if y.is_zero():
                continue
            if ratio is None:
                ratio = x / y
            elif x != ratio * y:
                return False
    return True


def verlinde_fusion(md: ModularData) -> dict[tuple[int, int, int], CyclotomicNumber]:
    """N_ij^k = sum_m S_im S_jm conj(S_km) / S_0m, as exact numbers."""
    r = md.rank
    S = md.S
    inv0 = [S[0][m].reciprocal() if not S[0][m].is_zero() else None for m in range(r)]
    if any(v is None for v in inv0):
        raise ModularDataError("S has a zero in the first row")
    conjS = [[S[k][m].conjugate() for m in range(r)] for k in range(r)]
    out = {}
    for i in range(r):
        for j in range(i, r):
            w = [S[i][m] * S[j][m] * inv0[m] for m in range(r)]
            for k in range(r):
                v = cyc_dot(w, conjS[k])
                out[(i, j, k)] = v
                out[(j, i, k)] = v
    return out


def verify_modular_axioms(md: ModularData, braided: bool = True) -> list[tuple[str, bool, str]]:
    """Check every modular-data identity; returns (name, ok, detail) rows."""
    r = md.rank
    S = md.S
    report = list(md.ring.problems(braided))
    bad = [(i, j) for i in range(r) for j in range(i + 1, r) if S[i][j] != S[j][i]]
    report.append(("S symmetric", not bad, f"first failure at {bad[0]}" if bad else ""))
    conjT = tuple(tuple(S[j][i].conjugate() for j in range(r)) for i in range(r))
    prod = _matmul(S, conjT)
    bad = [(i, j) for i in range(r) for j in range(r) if prod[i][j] != (ONE if i == j else ZERO)]
    report.append(("S unitary", not bad, f"first failure at {bad[0]}" if bad else ""))
    s00 = S[0][0]
    report.append(("S_00 positive", s00 == s00.conjugate() and complex(s00).real > 0, str(s00)))
    dims = md.dims
    bad = [j for j in range(r) if S[j][0] != S[0][0] * dims[j]]
    report.append(("first row proportional to dims", not bad, f"label {md.labels[bad[0]]}" if bad else ""))
    try:
        ver = verlinde_fusion(md)
        bad = [key for key, v in ver.items() if v != rational(md.ring.n(*key))]
        detail = ""
        if bad:
            i, j, k = bad[0]
            detail = f"N({md.labels[i]},{md.labels[j]},{md.labels[k]}) stored {md.ring.n(i, j, k)} reconstructed {ver[bad[0]]}"
        report.append(("Verlinde reconstruction", not bad, detail))
    except ModularDataError as exc:
        report.append(("Verlinde reconstruction", False, str(exc)))
    report.append(("T unit", md.T[0] == 0, f"T_0 = {md.T[0]}"))
    S2 = _matmul(S, S)
    bad = [(i, j) for i in range(r) for j in range(r) if S2[i][j] != (ONE if md.ring.dual[i] == j else ZERO)]
    report.append(("S^2 is charge conjugation", not bad, f"first failure at {bad[0]}" if bad else ""))
    Tm = [root_of_unity(t) for t in md.T]
    ST = tuple(tuple(S[i][j] * Tm[j] for j in range(r)) for i in range(r))
    ST3 = _matmul(_matmul(ST, ST), ST)
    report.append(("(ST)^3 proportional to S^2", _proportional(ST3, S2), ""))
    return report


def is_valid(md: ModularData) -> bool:
    return all(ok for _, ok, _ in verify_modular_axioms(md))


# ---------------------------------------------------------------------------
# constructions


def element_label(x: Element) -> str:
    return ".".join(str(a) for a in x) if x else "0"


def from_metric_group(mg: MetricGroup) -> ModularData:
    """S_xy = |G|^(-1/2) exp(-2 pi i b(x, y)), T_x = exp(2 pi i q(x)).

    The negative sign is the one for which (ST)^3 is proportional to S^2.
    """
    G = mg.group
    els = G.elements
    idx = {x: i for i, x in enumerate(els)}
    norm = cyc_sqrt(Fraction(1, G.order))
    S = tuple(tuple(root_of_unity(-mg.b(x, y)) * norm for y in els) for x in els)
    N = {(idx[x], idx[y], idx[G.add(x, y)]): 1 for x in els for y in els}
    ring = FusionRingData(tuple(element_label(x) for x in els), tuple(idx[G.neg(x)] for x in els), N)
    return ModularData(ring, S, tuple(mg.q(x) for x in els), mg.name)


def mueger_centralizer(md: ModularData, A: Iterable[str]) -> list[str]:
    """Labels x with s~_xa = d_x d_a for every a in A."""
    ids = [md.ring.index(a) for a in A]
    st, d = md.s_tilde, md.dims
    return [md.labels[x] for x in range(md.rank) if all(st[x][a] == d[x] * d[a] for a in ids)]


def deligne_product(a: ModularData, b: ModularData) -> ModularData:
    ra, rb = a.rank, b.rank

    def pos(i: int, j: int) -> int:
        return i * rb + j

    labels = tuple(f"({x},{y})" for x in a.labels for y in b.labels)
    dual = tuple(pos(a.ring.dual[i], b.ring.dual[j]) for i in range(ra) for j in range(rb))
    N = {}
    for (i, j, k), u in a.ring.N.items():
        for (p, q, s), v in b.ring.N.items():
            N[(pos(i, p), pos(j, q), pos(k, s))] = u * v
    S = tuple(tuple(a.S[i][k] * b.S[j][l] for k in range(ra) for l in range(rb)) for i in range(ra) for j in range(rb))
    T = tuple(a.T[i] + b.T[j] for i in range(ra) for j in range(rb))
    return ModularData(FusionRingData(labels, dual, N), S, T)


@dataclass(frozen=True)
class GroupLikeAlgebra:
    carrier: tuple[str, ...]


def _check_grouplike(md: ModularData, A: GroupLikeAlgebra) -> list[int]:
    ids = sorted({md.ring.index(a) for a in A.carrier})
    if 0 not in ids:
        raise ModularDataError("unsupported condensation: carrier must contain the unit")
    for a in ids:
        if md.dims[a] != ONE:
            raise ModularDataError(f"unsupported condensation: {md.labels[a]} is not invertible")
        if md.T[a] != 0:
            raise ModularDataError(f"unsupported condensation: {md.labels[a]} has nontrivial twist")
        for b in ids:
            prod = md.ring.product(a, b)
            if len(prod) != 1 or next(iter(prod.values())) != 1 or next(iter(prod)) not in ids:
                raise ModularDataError("unsupported condensation: carrier not closed under fusion")
            if md.s_tilde[a][b] != ONE:
                raise ModularDataError("unsupported condensation: carrier not mutually transparent")
    return ids


def condense_grouplike(md: ModularData, A: GroupLikeAlgebra) -> ModularData:
    """Local modules over a group-like algebra: A-orbits of labels local to A."""
    ids = _check_grouplike(md, A)
    st, d = md.s_tilde, md.dims
    local = [x for x in range(md.rank) if all(st[x][a] == d[x] for a in ids)]

    def act(a: int, x: int) -> int:
        prod = md.ring.product(a, x)
        return next(iter(prod))

    orbit_of: dict[int, int] = {}
    orbits: list[list[int]] = []
    for x in local:
        if x in orbit_of:
            continue
        orb = sorted({act(a, x) for a in ids})
        if len(orb) != len(ids):
            raise ModularDataError("unsupported condensation: orbit with a fixed point")
        for y in orb:
            orbit_of[y] = len(orbits)
        orbits.append(orb)
    reps = [orb[0] for orb in orbits]
    n = len(ids)
    S = tuple(tuple(md.S[x][y] * n for y in reps) for x in reps)
    T = tuple(md.T[x] for x in reps)
    N = {}
    for i, x in enumerate(reps):
        for j, y in enumerate(reps):
            for k, z in enumerate(reps):
                v = sum(md.ring.n(x, y, act(a, z)) for a in ids)
                if v:
                    N[(i, j, k)] = v
    dual = tuple(orbit_of[md.ring.dual[x]] for x in reps)
    ring = FusionRingData(tuple(md.labels[x] for x in reps), dual, N)
    return ModularData(ring, S, T)


def verlinde_genus_dim(md: ModularData, g: int) -> int:
    """sum_i (D^2 / d_i^2)^(g - 1); an integer for valid nondegenerate data."""
    if g < 0:
        raise ValueError("genus must be nonnegative")
    D2 = md.global_dim_squared
    total = ZERO
    for d in md.dims:
        ratio = D2 / (d * d)
        total = total + ratio ** (g - 1)
    if not total.is_rational() or total.to_fraction().denominator != 1 or total.to_fraction() < 0:
        raise ModularDataError(f"oracle inconsistency: {total}")
    return int(total.to_fraction())


def label_bijection(a: ModularData, b: ModularData) -> Optional[dict[str, str]]:
    """A label bijection matching T, S and N exactly (unit to unit), or None."""
    if a.rank != b.rank:
        return None
    r = a.rank
    cands = [[y for y in range(r) if b.T[y] == a.T[x] and b.dims[y] == a.dims[x]] for x in range(r)]
    if 0 not in cands[0]:
        return None
    perm: list[int] = [0]
    used = {0}

    def rec(x: int) -> bool:
        if x == r:
            return all(a.ring.n(i, j, k) == b.ring.n(perm[i], perm[j], perm[k])
                       for i in range(r) for j in range(r) for k in range(r))
        for y in cands[x]:
            if y in used:
                continue
            if a.S[x][x] != b.S[y][y] or any(a.S[x][z] != b.S[y][perm[z]] for z in range(x)):
                continue
            perm.append(y)
            used.add(y)
            if rec(x + 1):
                return True
            perm.pop()
            used.discard(y)
        return False

    if not rec(1):
        return None
    return {a.labels[x]: b.labels[perm[x]] for x in range(r)}


# ---------------------------------------------------------------------------
# library


def ising(nu: int = 1) -> ModularData:
    """Unitary Ising-type data with T_sigma = nu/16, nu odd."""
    if nu % 2 == 0:
        raise ValueError("nu must be odd")
    half = rational(Fraction(1, 2))
    r2 = cyc_sqrt(Fraction(1, 2))
    S = ((half, r2, half), (r2, ZERO, -r2), (half, -r2, half))
    N = {(0, 0, 0): 1, (0, 1, 1): 1, (0, 2, 2): 1, (1, 0, 1): 1, (2, 0, 2): 1,
         (1, 1, 0): 1, (1, 1, 2): 1, (1, 2, 1): 1, (2, 1, 1): 1, (2, 2, 0): 1}
    ring = FusionRingData(("1", "sigma", "psi"), (0, 1, 2), N)
    return ModularData(ring, S, (RationalMod1(0), RationalMod1(Fraction(nu, 16)), RationalMod1(Fraction(1, 2))),
                       "ising" if nu == 1 else f"ising-{nu}")


def modular_library() -> dict[str, ModularData]:
    from .metricgrp import LIBRARY, is_nondegenerate

    out = {name: from_metric_group(mg) for name, mg in LIBRARY.items() if is_nondegenerate(mg)}
    out["ising"] = ising(1)
    for nu in range(3, 16, 2):
        out[f"ising-{nu}"] = ising(nu)
    return out


# ---------------------------------------------------------------------------
# text format


def format_modular_data(md: ModularData) -> str:
    lines = [f"rank {md.rank}", "labels " + " ".join(md.labels),
             "dual " + " ".join(md.labels[i] for i in md.ring.dual)]
    for (i, j, k), v in sorted(md.ring.N.items()):
        lines.append(f"N {md.labels[i]} {md.labels[j]} {md.labels[k]} {v}")
    for i in range(md.rank):
        for j in range(md.rank):
            lines.append(f"S {md.labels[i]} {md.labels[j]} : {md.S[i][j]}")
    for i, t in enumerate(md.T):
        lines.append(f"T {md.labels[i]} : {t}")
    return "\n".join(lines) + "\n"


def parse_modular_data(text: str, name: str = "") -> ModularData:
    rank = None
    labels: list[str] = []
    dual_names: list[str] = []
    N: dict[tuple[int, int, int], int] = {}
    S: dict[tuple[int, int], CyclotomicNumber] = {}
    T: dict[int, RationalMod1] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "rank":
                rank = int(rest)
            elif head == "labels":
                labels = rest.split()
            elif head == "dual":
                dual_names = rest.split()
            elif head == "N":
                i, j, k, v = rest.split()
                N[(labels.index(i), labels.index(j), labels.index(k))] = int(v)
            elif head == "S":
                left, _, value = rest.partition(":")
                i, j = left.split()
                S[(labels.index(i), labels.index(j))] = CyclotomicNumber.parse(value)
            elif head == "T":
                left, _, value = rest.partition(":")
                T[labels.index(left.strip())] = RationalMod1.parse(value)
            else:
                raise ModularDataError(f"unknown directive {head!r}")
        except ModularDataError:
            raise
        except (ValueError, IndexError) as exc:
            raise ModularDataError(f"line {lineno}: {exc}") from None
    if rank is None or len(labels) != rank:
        raise ModularDataError("rank and labels disagree")
    if len(dual_names) != rank:
        raise ModularDataError("dual line must list one label per label")
    r = rank
    matrix = []
    for i in range(r):
        row = []
        for j in range(r):
            if (i, j) in S:
                row.append(S[(i, j)])
            elif (j, i) in S:
                row.append(S[(j, i)])
            else:
                raise ModularDataError(f"missing S entry {labels[i]} {labels[j]}")
        matrix.append(tuple(row))
    if set(T) != set(range(r)):
        raise ModularDataError("T must list every label")
    try:
        dual = tuple(labels.index(x) for x in dual_names)
    except ValueError as exc:
        raise ModularDataError(str(exc)) from None
    ring = FusionRingData(tuple(labels), dual, N)
    return ModularData(ring, tuple(matrix), tuple(T[i] for i in range(r)), name)
