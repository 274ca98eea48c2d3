"""Closed oriented stratified surfaces with labeled cells, excision moves and evaluation.

A surface is a rotation system on darts. ``alpha`` pairs the two darts of an
edge and ``sigma`` lists the darts leaving a vertex in counterclockwise order.
Faces are the orbits of ``phi = sigma . alpha``; a dart's face is the one on
its right when walking away from its origin, so the face on the left of a dart
``d`` is the face of ``alpha(d)``.  An edge points along its positive dart and
its label is a wall from the left face to the right face.

A vertex is stored under a reference dart ``r`` of its rotation and its label
is an object living in the sector between ``r`` and ``sigma(r)``, which lies in
the face on the left of ``r``.

Evaluation works at the level of Grothendieck classes. A 2-cell is a braided
category nondegenerate over E (pointed metric data, or static modular data
when E is trivial), an invertible 1-cell is a braided equivalence given by a
bijection of simples, and a 0-cell is a class of objects.
"""
from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Callable, Mapping, Optional, Sequence, Union

from .braidedmod import double_braiding_module, relative_tensor
from .centerfun import FUSION_LIBRARY, FusionOverE, center_over_E
from .metricgrp import (
    LIBRARY as METRIC_LIBRARY,
    MetricEmbedding,
    MetricGroup,
    classify_symmetric,
    conjugate,
    isometries,
    isometry_exists,
    metric_embeddings,
    radical,
)
from .moddata import (
    ModularData,
    deligne_product,
    element_label,
    from_metric_group,
    label_bijection,
    modular_library,
    verify_modular_axioms,
)


class SurfaceError(ValueError):
    pass


class MoveError(ValueError):
    pass


class ReductionError(ValueError):
    pass


class EvaluationError(ValueError):
    pass


class SymbolicResidue(EvaluationError):
    def __init__(self, expr: str) -> None:
        super().__init__(f"symbolic residue: {expr}")
        self.expr = expr


# ---------------------------------------------------------------------------
# label expressions


class Label:
    """An immutable expression tree ``head(args...)``; atoms have no args."""

    __slots__ = ("head", "args", "_hash")

    def __init__(self, head: str, args: Sequence["Label"] = ()) -> None:
        self.head = head
        self.args = tuple(args)
        self._hash = hash((head, self.args))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Label):
            return NotImplemented
        return self is other or (self._hash == other._hash and self.head == other.head and self.args == other.args)

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        if not self.args:
            return self.head
        return f"{self.head}({', '.join(str(a) for a in self.args)})"

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"

    def depth(self) -> int:
        return 1 + max((a.depth() for a in self.args), default=0)


_TOKEN = re.compile(r"\s*([(),]|[^(),\s]+)")


def parse_label(text: str) -> Label:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SurfaceError(f"bad label syntax at {text[pos:]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if not tokens:
        raise SurfaceError("empty label")
    i = 0

    def expr() -> Label:
        nonlocal i
        head = tokens[i]
        if head in "(),":
            raise SurfaceError(f"bad label syntax in {text!r}")
        i += 1
        if i < len(tokens) and tokens[i] == "(":
            i += 1
            args = [expr()]
            while tokens[i] == ",":
                i += 1
                args.append(expr())
            if tokens[i] != ")":
                raise SurfaceError(f"bad label syntax in {text!r}")
            i += 1
            return Label(head, args)
        return Label(head)

    try:
        out = expr()
    except IndexError:
        raise SurfaceError(f"unbalanced label {text!r}") from None
    if i != len(tokens):
        raise SurfaceError(f"trailing text in label {text!r}")
    return out


FACE, EDGE, POINT = 2, 1, 0
SORT_NAMES = {FACE: "2-cell", EDGE: "1-cell", POINT: "0-cell"}
LITERAL = -1

# head -> (result sort, argument sorts); Rev and Sym are handled separately
SIGNATURES: dict[str, tuple[int, tuple[int, ...]]] = {
    "RelProdOverE": (FACE, (FACE, FACE)),
    "Conj": (FACE, (FACE,)),
    "CenterOverE": (FACE, (EDGE,)),
    "RelTensorBimod": (EDGE, (EDGE, FACE, EDGE)),
    "EdgeMerge": (EDGE, (EDGE, FACE, EDGE)),
    "ForgetTo1Disk": (EDGE, (FACE,)),
    "Iso": (EDGE, (FACE, FACE, LITERAL)),
    "VertexFuse": (POINT, (POINT, EDGE, POINT)),
    "ForgetTo0Disk": (POINT, (EDGE,)),
    "FunE": (POINT, (FACE, FACE)),
    "Obj": (POINT, (FACE, LITERAL)),
    "Cross": (POINT, (POINT, EDGE)),
}


@lru_cache(maxsize=None)
def _modular_atoms() -> dict[str, ModularData]:
    return modular_library()


def atom_sort(name: str) -> Optional[int]:
    if name in METRIC_LIBRARY or name in _modular_atoms():
        return FACE
    if any(name in cats for cats in FUSION_LIBRARY.values()):
        return EDGE
    return None


def sort_errors(label: Label, sort: int) -> list[str]:
    """Every arity or sort violation in ``label`` used as a cell of the given sort."""
    h, args = label.head, label.args
    if h == "Sym":
        if len(args) != 1 or args[0].args:
            return [f"Sym takes one literal name: {label}"]
        return []
    if h == "Rev":
        if len(args) != 1:
            return [f"Rev takes one argument: {label}"]
        if sort not in (FACE, EDGE):
            return [f"Rev({args[0]}) is not a {SORT_NAMES[sort]}"]
        return sort_errors(args[0], sort)
    if h in SIGNATURES:
        res, arg_sorts = SIGNATURES[h]
        if res != sort:
            return [f"{label} is a {SORT_NAMES[res]}, expected a {SORT_NAMES[sort]}"]
        if len(args) != len(arg_sorts):
            return [f"{h} takes {len(arg_sorts)} arguments: {label}"]
        out = []
        for a, s in zip(args, arg_sorts):
            if s == LITERAL:
                if a.args:
                    out.append(f"{h} expects a literal, got {a}")
            else:
                out.extend(sort_errors(a, s))
        return out
    if args:
        return [f"unknown constructor {h!r}"]
    s = atom_sort(h)
    if s is None:
        return [f"unknown atom {h!r} (use Sym({h}) for a symbolic label)"]
    if s != sort:
        return [f"atom {h} is a {SORT_NAMES[s]}, expected a {SORT_NAMES[sort]}"]
    return []


def rev(M: Label) -> Label:
    return M.args[0] if M.head == "Rev" else Label("Rev", (M,))


def _plain_identity(M: Label) -> bool:
    return M.head == "ForgetTo1Disk" or (M.head == "Rev" and M.args[0].head == "ForgetTo1Disk")


def cross(P: Label, M: Label) -> Label:
    return P if _plain_identity(M) else Label("Cross", (P, M))


# ---------------------------------------------------------------------------
# backend values


class Phase:
    """A 2-cell value: pointed metric data with an E-embedding, or modular data."""

    def __init__(self, expr: str, metric: Optional[MetricGroup] = None, embed: Optional[MetricEmbedding] = None,
                 md: Optional[ModularData] = None) -> None:
        self.expr = expr
        self.metric = metric
        self.embed = embed
        self.md = md
        if metric is not None:
            self._key: tuple = ("pointed", metric, None if embed is None else embed.images)
        else:
            self._key = ("modular", md)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Phase) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Phase({self.expr})"

    @property
    def pointed(self) -> bool:
        return self.metric is not None

    @cached_property
    def simples(self) -> tuple:
        return self.metric.elements if self.pointed else tuple(range(self.md.rank))

    @property
    def unit(self):
        return self.metric.group.zero if self.pointed else 0

    def fuse(self, a, b) -> dict:
        if self.pointed:
            return {self.metric.group.add(a, b): 1}
        return self.md.ring.product(a, b)

    def dual(self, a):
        return self.metric.group.neg(a) if self.pointed else self.md.ring.dual[a]

    def name_of(self, a) -> str:
        return element_label(a) if self.pointed else self.md.labels[a]

    def parse_simple(self, text: str):
        if self.pointed:
            G = self.metric.group
            try:
                parts = tuple(int(p) for p in text.split("."))
            except ValueError:
                raise EvaluationError(f"bad simple {text!r} for {self.expr}") from None
            if parts == (0,):
                return G.zero
            if len(parts) != G.rank:
                raise EvaluationError(f"simple {text!r} has the wrong rank for {self.expr}")
            return G.normalize(parts)
        try:
            return self.md.ring.index(text)
        except Exception:
            raise EvaluationError(f"unknown simple {text!r} for {self.expr}") from None

    @cached_property
    def degeneracy(self) -> Optional[str]:
        """None when nondegenerate over E, else the reason."""
        if self.pointed:
            if self.embed is None:
                return "no embedding of E"
            rad = sorted(radical(self.metric))
            if rad != sorted(self.embed.image()):
                return f"Mueger center has order {len(rad)}, expected the image of E (order {self.embed.source.order})"
            return None
        bad = [name for name, ok, _ in verify_modular_axioms(self.md) if not ok]
        return f"modular data fails {bad[0]}" if bad else None


@dataclass(frozen=True, eq=False)
class Wall:
    """An invertible wall left -> right, as a bijection of simples."""

    left: Phase
    right: Phase
    table: Mapping

    def __call__(self, a):
        return self.table[a]

    def inverse(self) -> "Wall":
        return Wall(self.right, self.left, {v: k for k, v in self.table.items()})

    def then(self, other: "Wall") -> "Wall":
        return Wall(self.left, other.right, {a: other.table[b] for a, b in self.table.items()})

    def is_identity(self) -> bool:
        return self.left == self.right and all(a == b for a, b in self.table.items())


@dataclass(frozen=True, eq=False)
class Point:
    """A 0-cell value: a class in K_0 of a 2-cell."""

    phase: Phase
    counts: Mapping

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", {k: v for k, v in self.counts.items() if v})

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Point) and self.phase == other.phase and self.counts == other.counts

    def __hash__(self) -> int:
        return hash((self.phase, tuple(sorted(self.counts.items()))))


Value = Union[Phase, Wall, Point, FusionOverE]


@dataclass(frozen=True)
class EvaluationResult:
    base: str
    multiplicities: tuple[tuple[str, int], ...]
    gsd_unit: int
    total_dim: int

    def format(self) -> str:
        lines = [f"base {self.base}"]
        lines += [f"multiplicity {k} {v}" for k, v in self.multiplicities]
        lines += [f"gsd {self.gsd_unit}", f"total_dim {self.total_dim}"]
        return "\n".join(lines)


class Backend:
    """Evaluates labels over a fixed symmetric base E, memoizing values."""

    def __init__(self, base: str) -> None:
        if base not in METRIC_LIBRARY:
            raise EvaluationError(f"unknown base {base!r}")
        E = METRIC_LIBRARY[base]
        if classify_symmetric(E) == "not-symmetric":
            raise EvaluationError(f"base {base} is not symmetric")
        self.base = base
        self.E = E
        self._memo: dict[tuple[Label, int], Value] = {}
        self._isos: dict[tuple, list] = {}

    def value(self, label: Label, sort: int) -> Value:
        key = (label, sort)
        if key not in self._memo:
            self._memo[key] = self._compute(label, sort)
        return self._memo[key]

    def phase(self, label: Label) -> Phase:
        v = self.value(label, FACE)
        assert isinstance(v, Phase)
        return v

    def wall(self, label: Label) -> Wall:
        v = self.value(label, EDGE)
        if isinstance(v, FusionOverE):
            raise SymbolicResidue(f"{label} (non-invertible wall)")
        return v

    def point(self, label: Label) -> Point:
        v = self.value(label, POINT)
        assert isinstance(v, Point)
        return v

    # -- 2-cells

    def _category_atom(self, name: str) -> Phase:
        if name in METRIC_LIBRARY:
            mg = METRIC_LIBRARY[name]
            return Phase(name, mg, self._choose_embedding(mg))
        md = _modular_atoms().get(name)
        if md is None:
            raise EvaluationError(f"unknown category {name!r}")
        if self.E.order != 1:
            raise EvaluationError(f"modular atom {name} needs the trivial base")
        return Phase(name, md=md)

    def _choose_embedding(self, mg: MetricGroup) -> Optional[MetricEmbedding]:
        rad = sorted(radical(mg))
        first = None
        for emb in metric_embeddings(self.E, mg):
            if first is None:
                first = emb
            if sorted(emb.image()) == rad:
                return emb
        return first

    def _as_md(self, P: Phase) -> ModularData:
        return P.md if not P.pointed else from_metric_group(P.metric)

    def _conj(self, P: Phase, expr: str) -> Phase:
        if P.pointed:
            mg = conjugate(P.metric)
            emb = None if P.embed is None else MetricEmbedding(self.E, mg, P.embed.images)
            return Phase(expr, mg, emb)
        md = P.md
        S = tuple(tuple(v.conjugate() for v in row) for row in md.S)
        return Phase(expr, md=ModularData(md.ring, S, tuple(-t for t in md.T), f"conj({md.name})"))

    def _relprod(self, A: Phase, B: Phase, expr: str) -> Phase:
        if A.pointed and B.pointed:
            if A.embed is None or B.embed is None:
                raise EvaluationError(f"{expr}: factor is not a category over E")
            m = relative_tensor(double_braiding_module(self.E, A.metric, A.embed),
                                double_braiding_module(self.E, B.metric, B.embed))
            return Phase(expr, m.carrier, m.embed)
        if self.E.order != 1:
            raise EvaluationError(f"{expr}: modular factors need the trivial base")
        return Phase(expr, md=deligne_product(self._as_md(A), self._as_md(B)))

    # -- 1-cells

    def iso_list(self, C: Phase, D: Phase) -> list[Wall]:
        """Equivalences C -> D fixing E, in search order with the identity first."""
        key = (C, D)
        if key not in self._isos:
            walls = []
            if C.pointed and D.pointed:
                if C.embed is not None and D.embed is not None:
                    cons = [(C.embed(g), D.embed(g)) for g in self.E.group.generators]
                    walls = [Wall(C, D, dict(f.table)) for f in isometries(C.metric, D.metric, cons)]
                    walls.sort(key=lambda w: not w.is_identity())
            elif not C.pointed and not D.pointed:
                bij = label_bijection(C.md, D.md)
                if bij is not None:
                    walls = [Wall(C, D, {C.md.ring.index(a): D.md.ring.index(b) for a, b in bij.items()})]
            self._isos[key] = walls
        return self._isos[key]

    def _check(self, ok: bool, label: Label, what: str) -> None:
        if not ok:
            raise EvaluationError(f"{what} in {label}")

    # -- dispatch

    def _compute(self, label: Label, sort: int) -> Value:
        h, a = label.head, label.args
        if h == "Sym":
            raise SymbolicResidue(str(label))
        errs = sort_errors(label, sort)
        if errs:
            raise EvaluationError(errs[0])
        expr = str(label)
        if sort == FACE:
            if not a:
                return self._category_atom(h)
            if h in ("Conj", "Rev"):
                return self._conj(self.phase(a[0]), expr)
            if h == "RelProdOverE":
                return self._relprod(self.phase(a[0]), self.phase(a[1]), expr)
            if h == "CenterOverE":
                X = self.value(a[0], EDGE)
                if not isinstance(X, FusionOverE):
                    raise EvaluationError(f"{a[0]} is not a fusion category over {self.base}")
                c = center_over_E(X)
                return Phase(expr, c.metric, c.embed)
        elif sort == EDGE:
            if not a:
                X = FUSION_LIBRARY.get(self.base, {}).get(h)
                if X is None:
                    raise EvaluationError(f"{h} is not a fusion category over {self.base}")
                return X
            if h == "ForgetTo1Disk":
                C = self.phase(a[0])
                return Wall(C, C, {x: x for x in C.simples})
            if h == "Iso":
                C, D = self.phase(a[0]), self.phase(a[1])
                try:
                    k = int(a[2].head)
                except ValueError:
                    raise EvaluationError(f"Iso index must be an integer: {label}") from None
                isos = self.iso_list(C, D)
                if not 0 <= k < len(isos):
                    raise EvaluationError(f"{label}: only {len(isos)} equivalences fix E")
                return isos[k]
            if h == "Rev":
                return self.wall(a[0]).inverse()
            if h == "RelTensorBimod":
                M, D, N = self.wall(a[0]), self.phase(a[1]), self.wall(a[2])
                self._check(M.right == D and N.right == D, label, "right ends do not match the middle 2-cell")
                return M.then(N.inverse())
            if h == "EdgeMerge":
                K, A, L = self.wall(a[0]), self.phase(a[1]), self.wall(a[2])
                self._check(K.right == A and L.left == A, label, "walls do not meet the middle 2-cell")
                return K.then(L)
        else:
            if h == "Obj":
                C = self.phase(a[0])
                return Point(C, {C.parse_simple(a[1].head): 1})
            if h == "ForgetTo0Disk":
                M = self.wall(a[0])
                return Point(M.left, {M.left.unit: 1})
            if h == "VertexFuse":
                P, L, Q = self.point(a[0]), self.wall(a[1]), self.point(a[2])
                self._check(P.phase == L.left and Q.phase == L.left, label, "points do not sit on the wall's left")
                C = L.left
                out: dict = {}
                for x, m in P.counts.items():
                    for y, n in Q.counts.items():
                        for z, k in C.fuse(x, y).items():
                            out[z] = out.get(z, 0) + m * n * k
                return Point(C, out)
            if h == "Cross":
                P, M = self.point(a[0]), self.wall(a[1])
                self._check(P.phase == M.left, label, "point does not sit on the wall's left")
                return Point(M.right, {M(x): n for x, n in P.counts.items()})
            if h == "FunE":
                C, D = self.phase(a[0]), self.phase(a[1])
                self._check(C == D, label, "coend needs equal 2-cells")
                return Point(C, self.coend(C))
        raise EvaluationError(f"cannot evaluate {label} as a {SORT_NAMES[sort]}")

    def coend(self, C: Phase) -> dict:
        """Class of the coend over E: one x (x) x* per orbit of E on the simples."""
        if C.pointed:
            if C.embed is None:
                raise EvaluationError(f"{C.expr} is not a category over E")
            return {C.unit: C.metric.order // self.E.order}
        out: dict = {}
        for i in C.simples:
            for k, n in C.fuse(i, C.dual(i)).items():
                out[k] = out.get(k, 0) + n
        return out

    def project_to_E(self, P: Point) -> EvaluationResult:
        """Right adjoint of E -> C on classes: multiplicity of iota(e) for each e in E."""
        C = P.phase
        if C.pointed:
            mult = tuple((element_label(e), P.counts.get(C.embed(e), 0)) for e in self.E.elements)
        else:
            mult = (("0", P.counts.get(0, 0)),)
        unit = dict(mult)[element_label(self.E.group.zero)]
        return EvaluationResult(self.base, mult, unit, sum(n for _, n in mult))


@lru_cache(maxsize=None)
def get_backend(base: str) -> Backend:
    return Backend(base)


# ---------------------------------------------------------------------------
# surfaces


@dataclass(frozen=True, eq=False)
class StratifiedSurface:
    base: str
    alpha: Mapping[int, int]
    sigma: Mapping[int, int]
    positive: frozenset
    face_label: Mapping[int, Label]
    edge_label: Mapping[int, Label]
    vertex_label: Mapping[Optional[int], Label]
    lone_face: Optional[Label] = None
    declared_faces: tuple[tuple[int, ...], ...] = field(default=())

    @cached_property
    def darts(self) -> list[int]:
        return sorted(self.alpha)

    @cached_property
    def sigma_inv(self) -> dict[int, int]:
        return {v: k for k, v in self.sigma.items()}

    def phi(self, d: int) -> int:
        return self.sigma[self.alpha[d]]

    def _orbits(self, step: Callable[[int], int]) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for d in self.darts:
            if d in seen:
                continue
            orb = [d]
            seen.add(d)
            x = step(d)
            while x != d:
                if x in seen:
                    raise SurfaceError("not a permutation")
                orb.append(x)
                seen.add(x)
                x = step(x)
            out.append(tuple(orb))
        return out

    @cached_property
    def faces(self) -> list[tuple[int, ...]]:
        return self._orbits(self.phi)

    @cached_property
    def face_of(self) -> dict[int, int]:
        return {d: i for i, f in enumerate(self.faces) for d in f}

    @cached_property
    def vertex_orbits(self) -> list[tuple[int, ...]]:
        return self._orbits(lambda d: self.sigma[d])

    @cached_property
    def vertex_key_of(self) -> dict[int, Optional[int]]:
        out: dict[int, Optional[int]] = {}
        for orb in self.vertex_orbits:
            keys = [d for d in orb if d in self.vertex_label]
            for d in orb:
                out[d] = keys[0] if keys else None
        return out

    def vertex_key(self, d: int) -> Optional[int]:
        return self.vertex_key_of[d]

    def positive_dart(self, d: int) -> int:
        if d not in self.alpha:
            raise MoveError(f"no dart {d}")
        return d if d in self.positive else self.alpha[d]

    @property
    def V(self) -> int:
        return len(self.vertex_orbits) if self.alpha else 1

    @property
    def E(self) -> int:
        return len(self.alpha) // 2

    @property
    def F(self) -> int:
        return len(self.faces) if self.alpha else 1

    @property
    def chi(self) -> int:
        return self.V - self.E + self.F

    @property
    def genus(self) -> int:
        return (2 - self.chi) // 2

    def edges(self) -> list[int]:
        return sorted(self.positive)

    def face_key(self, d: int) -> int:
        return min(self.faces[self.face_of[d]])

    def label_of_face(self, d: Optional[int]) -> Label:
        return self.lone_face if d is None else self.face_label[d]

    def sector_face_dart(self, ref: Optional[int]) -> Optional[int]:
        """A dart whose face is the one containing the sector after ``ref``."""
        return None if ref is None else self.alpha[ref]

    def stats(self) -> str:
        return f"V={self.V} E={self.E} F={self.F} chi={self.chi} g={self.genus}"


def _fwd_wall(s: StratifiedSurface, x: int) -> Label:
    """Wall crossed from the right of x to its left."""
    return rev(s.edge_label[x]) if x in s.positive else s.edge_label[s.alpha[x]]


def _bwd_wall(s: StratifiedSurface, r: int) -> Label:
    """Wall crossed from the left of r to its right."""
    return s.edge_label[r] if r in s.positive else rev(s.edge_label[s.alpha[r]])


def _anchor_forward(s: StratifiedSurface, ref: int, label: Label, target: int) -> Label:
    steps = 0
    while ref != target:
        x = s.sigma[ref]
        label = cross(label, _fwd_wall(s, x))
        ref = x
        steps += 1
        if steps > len(s.alpha):
            raise MoveError("target dart is not at this vertex")
    return label


def _splice_out(sigma: Mapping[int, int], remove: Sequence[int]) -> dict[int, int]:
    sigma = dict(sigma)
    for z in remove:
        pred = next(k for k, v in sigma.items() if v == z)
        succ = sigma.pop(z)
        if pred != z:
            sigma[pred] = succ
    return sigma


def _without(m: Mapping, keys: Sequence) -> dict:
    return {k: v for k, v in m.items() if k not in keys}


def _unit_point(C: Label) -> Label:
    return Label("ForgetTo0Disk", (Label("ForgetTo1Disk", (C,)),))


def sphere(face: Union[str, Label], base: str = "trivial", point: Union[str, Label, None] = None) -> StratifiedSurface:
    """One vertex, no edges, one 2-cell."""
    C = parse_label(face) if isinstance(face, str) else face
    P = _unit_point(C) if point is None else (parse_label(point) if isinstance(point, str) else point)
    return StratifiedSurface(base, {}, {}, frozenset(), {}, {}, {None: P}, C)


def closed_surface(genus: int, face: Union[str, Label], base: str = "trivial") -> StratifiedSurface:
    """Unstratified genus-g surface: one vertex, 2g transparent loops, one 2-cell."""
    if genus == 0:
        return sphere(face, base)
    C = parse_label(face) if isinstance(face, str) else face
    rotation: list[int] = []
    alpha: dict[int, int] = {}
    for i in range(genus):
        a, ab, b, bb = 4 * i + 1, 4 * i + 2, 4 * i + 3, 4 * i + 4
        alpha.update({a: ab, ab: a, b: bb, bb: b})
        rotation += [a, b, ab, bb]
    sigma = {rotation[i]: rotation[(i + 1) % len(rotation)] for i in range(len(rotation))}
    positive = frozenset(range(1, 4 * genus + 1, 2))
    wall = Label("ForgetTo1Disk", (C,))
    return StratifiedSurface(base, alpha, sigma, positive, {d: C for d in alpha}, {d: wall for d in positive},
                             {1: _unit_point(C)})


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[str, ...]
    V: int = 0
    E: int = 0
    F: int = 0
    genus: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def format(self) -> str:
        lines = [f"V={self.V} E={self.E} F={self.F}"]
        if self.genus is not None:
            lines.append(f"genus {self.genus}")
        lines += [f"error: {e}" for e in self.errors]
        lines.append("valid" if self.ok else "invalid")
        return "\n".join(lines)


def _cyclic_equal(a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b) or not a:
        return len(a) == len(b)
    if a[0] not in b:
        return False
    i = list(b).index(a[0])
    return tuple(a) == tuple(b[i:]) + tuple(b[:i])


def validate_surface(s: StratifiedSurface) -> ValidationReport:
    errors: list[str] = []
    darts = set(s.alpha)
    for d, e in s.alpha.items():
        if e == d or s.alpha.get(e) != d:
            errors.append(f"involution is not fixed-point free at dart {d}")
            break
    if set(s.sigma) != darts or sorted(s.sigma.values()) != sorted(darts):
        errors.append("rotation is not a permutation of the darts")
    if not s.positive <= darts or any((d in s.positive) == (s.alpha.get(d) in s.positive) for d in darts):
        errors.append("each edge needs exactly one positive dart")
    if errors:
        return ValidationReport(tuple(errors))
    if s.base not in METRIC_LIBRARY:
        errors.append(f"unknown base {s.base!r}")
    if not darts:
        if s.lone_face is None:
            errors.append("missing label for the 2-cell")
        if set(s.vertex_label) != {None}:
            errors.append("a surface without edges has one vertex labeled '*'")
        else:
            errors += [f"vertex *: {e}" for e in sort_errors(s.vertex_label[None], POINT)]
        if s.lone_face is not None:
            errors += [f"face *: {e}" for e in sort_errors(s.lone_face, FACE)]
        return ValidationReport(tuple(errors), 1, 0, 1, 0 if not errors else None)
    # connectivity
    seen, todo = {s.darts[0]}, [s.darts[0]]
    while todo:
        d = todo.pop()
        for e in (s.alpha[d], s.sigma[d]):
            if e not in seen:
                seen.add(e)
                todo.append(e)
    if seen != darts:
        errors.append("surface graph is not connected")
    # declared face cycles must follow sigma . alpha
    for cyc in s.declared_faces:
        orbit = s.faces[s.face_of[cyc[0]]] if cyc and cyc[0] in s.face_of else ()
        if not _cyclic_equal(cyc, orbit):
            errors.append(f"orientation error: face cycle ({' '.join(map(str, cyc))}) does not follow the rotation")
    # labels
    for i, f in enumerate(s.faces):
        labels = {s.face_label.get(d) for d in f}
        if None in labels:
            errors.append(f"face {min(f)}: missing label")
        elif len(labels) > 1:
            errors.append(f"face {min(f)}: inconsistent labels")
        else:
            errors += [f"face {min(f)}: {e}" for e in sort_errors(labels.pop(), FACE)]
    for d in s.edges():
        if d not in s.edge_label:
            errors.append(f"edge {d}: missing label")
        else:
            errors += [f"edge {d}: {e}" for e in sort_errors(s.edge_label[d], EDGE)]
    for orb in s.vertex_orbits:
        keys = [d for d in orb if d in s.vertex_label]
        if len(keys) != 1:
            errors.append(f"vertex ({' '.join(map(str, orb))}): needs exactly one label, found {len(keys)}")
        else:
            errors += [f"vertex {keys[0]}: {e}" for e in sort_errors(s.vertex_label[keys[0]], POINT)]
    extra = [k for k in s.vertex_label if k is None or k not in darts]
    if extra:
        errors.append(f"vertex label on unknown dart {extra[0]}")
    chi = s.chi
    genus = None
    if chi % 2 or chi > 2:
        errors.append(f"Euler characteristic {chi} is not 2 - 2g")
    else:
        genus = s.genus
    return ValidationReport(tuple(errors), s.V, s.E, s.F, genus)


def require_valid(s: StratifiedSurface) -> None:
    r = validate_surface(s)
    if not r.ok:
        raise SurfaceError(r.errors[0])


# ---------------------------------------------------------------------------
# anomaly check


@dataclass(frozen=True)
class AnomalyRow:
    cell: str
    status: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.cell}: {self.status}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class AnomalyReport:
    rows: tuple[AnomalyRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.status != "fail" for r in self.rows)

    def failures(self) -> list[AnomalyRow]:
        return [r for r in self.rows if r.status == "fail"]

    def format(self) -> str:
        return "\n".join([str(r) for r in self.rows] + [f"anomaly-free: {'yes' if self.passed else 'no'}"])


def _edge_closed(b: Backend, X: FusionOverE, C: Phase, D: Phase) -> Optional[str]:
    """None when Z(X, E) is equivalent over E to conj(C) boxtimes_E D."""
    if not (C.pointed and D.pointed) or C.embed is None or D.embed is None:
        return "closedness is only checked between pointed 2-cells"
    Cbar = b._conj(C, f"Conj({C.expr})")
    target = b._relprod(Cbar, D, "")
    z = center_over_E(X)
    cons = [(z.embed(g), target.embed(g)) for g in b.E.group.generators]
    if isometry_exists(z.metric, target.metric, cons) is None:
        return f"Z(M,E) of order {z.metric.order} is not equivalent to conj(left) boxtimes_E right"
    return None


def check_anomaly_free(s: StratifiedSurface) -> AnomalyReport:
    require_valid(s)
    b = get_backend(s.base)
    rows: list[AnomalyRow] = []
    face_vals: dict[int, Optional[Phase]] = {}

    def attempt(cell: str, fn: Callable[[], Optional[str]]) -> bool:
        try:
            problem = fn()
        except SymbolicResidue as exc:
            rows.append(AnomalyRow(cell, "assumed", f"assumed anomaly-free, {exc}"))
            return False
        except EvaluationError as exc:
            rows.append(AnomalyRow(cell, "fail", str(exc)))
            return False
        rows.append(AnomalyRow(cell, "fail" if problem else "pass", problem or ""))
        return not problem

    face_keys = [None] if not s.alpha else [min(f) for f in s.faces]
    for k in face_keys:
        name = "face *" if k is None else f"face {k}"

        def face_check(k=k) -> Optional[str]:
            face_vals[k] = None
            P = b.phase(s.label_of_face(k))
            face_vals[k] = P
            return P.degeneracy

        attempt(name, face_check)

    def fval(d: Optional[int]) -> Optional[Phase]:
        return face_vals.get(None if d is None else s.face_key(d))

    for d in s.edges():
        def edge_check(d=d) -> Optional[str]:
            L, R = fval(s.alpha[d]), fval(d)
            v = b.value(s.edge_label[d], EDGE)
            if L is None or R is None:
                raise SymbolicResidue(f"adjacent 2-cell of edge {d}")
            if isinstance(v, FusionOverE):
                return _edge_closed(b, v, L, R)
            if v.left != L or v.right != R:
                return "wall ends do not match the adjacent 2-cells"
            return None

        attempt(f"edge {d}", edge_check)

    for key in sorted(s.vertex_label, key=lambda k: -1 if k is None else k):
        def vertex_check(key=key) -> Optional[str]:
            P = b.point(s.vertex_label[key])
            sector = fval(s.sector_face_dart(key))
            if sector is None:
                raise SymbolicResidue(f"sector 2-cell of vertex {key}")
            if P.phase != sector:
                return "label does not live in its sector's 2-cell"
            if key is None:
                return None
            total = Wall(sector, sector, {x: x for x in sector.simples})
            r = key
            while True:
                x = s.sigma[r]
                w = b.wall(_fwd_wall(s, x))
                if w.left != total.right:
                    return "walls around the vertex do not match"
                total = total.then(w)
                r = x
                if r == key:
                    break
            return None if total.is_identity() else "nontrivial monodromy around the vertex"

        attempt("vertex *" if key is None else f"vertex {key}", vertex_check)
    return AnomalyReport(tuple(rows))


# ---------------------------------------------------------------------------
# moves


def _fresh(s: StratifiedSurface) -> int:
    return max(s.alpha, default=0) + 1


def move_contract(s: StratifiedSurface, dart: int) -> StratifiedSurface:
    """Contract an edge between distinct vertices P, Q into VertexFuse(P, L, Q)."""
    d = s.positive_dart(dart)
    ad = s.alpha[d]
    ku, kv = s.vertex_key(d), s.vertex_key(ad)
    if ku == kv:
        raise MoveError("loop edge cannot be contracted")
    pu, pv = s.sigma_inv[d], s.sigma_inv[ad]
    P = _anchor_forward(s, ku, s.vertex_label[ku], d)
    Q = _anchor_forward(s, kv, s.vertex_label[kv], pv)
    new = Label("VertexFuse", (P, s.edge_label[d], Q))
    sigma = dict(s.sigma)
    k, m = pu != d, pv != ad
    if k and m:
        sigma[pu], sigma[pv] = s.sigma[ad], s.sigma[d]
    elif k:
        sigma[pu] = s.sigma[d]
    elif m:
        sigma[pv] = s.sigma[ad]
    gone = (d, ad)
    vertices = _without(s.vertex_label, (ku, kv))
    lone = None
    if not k and not m:
        vertices = {None: new}
        lone = s.face_label[d]
    else:
        vertices[pv if m else pu] = new
    return replace(s, alpha=_without(s.alpha, gone), sigma=_without(sigma, gone), positive=s.positive - {d},
                   face_label=_without(s.face_label, gone), edge_label=_without(s.edge_label, gone),
                   vertex_label=vertices, lone_face=lone, declared_faces=())


def move_add_point(s: StratifiedSurface, dart: int) -> StratifiedSurface:
    """Subdivide an edge M by a new vertex labeled ForgetTo0Disk(M)."""
    d = s.positive_dart(dart)
    ad = s.alpha[d]
    a, b = _fresh(s), _fresh(s) + 1
    M = s.edge_label[d]
    alpha = dict(s.alpha)
    alpha.update({d: a, a: d, b: ad, ad: b})
    sigma = dict(s.sigma)
    sigma.update({a: b, b: a})
    face_label = dict(s.face_label)
    face_label.update({a: s.face_label[ad], b: s.face_label[d]})
    edge_label = dict(s.edge_label)
    edge_label[b] = M
    vertices = dict(s.vertex_label)
    vertices[b] = Label("ForgetTo0Disk", (M,))
    return replace(s, alpha=alpha, sigma=sigma, positive=s.positive | {b}, face_label=face_label,
                   edge_label=edge_label, vertex_label=vertices, declared_faces=())


def move_add_edge_at(s: StratifiedSurface, x: Optional[int], y: Optional[int]) -> StratifiedSurface:
    """New transparent edge from the corner before x to the corner before y (same face)."""
    if not s.alpha:
        if x is not None or y is not None:
            raise MoveError("p or q not on the face boundary")
        C = s.lone_face
        a, b = 1, 2
        return replace(s, alpha={a: b, b: a}, sigma={a: b, b: a}, positive=frozenset({a}),
                       face_label={a: C, b: C}, edge_label={a: Label("ForgetTo1Disk", (C,))},
                       vertex_label={a: s.vertex_label[None]}, lone_face=None, declared_faces=())
    if x not in s.alpha or y not in s.alpha or s.face_of[x] != s.face_of[y]:
        raise MoveError("p or q not on the face boundary")
    C = s.face_label[x]
    a, b = _fresh(s), _fresh(s) + 1
    sigma = dict(s.sigma)
    p = s.sigma_inv[x]
    if x == y:
        sigma[p], sigma[a], sigma[b] = a, b, x
    else:
        q = s.sigma_inv[y]
        sigma[p], sigma[a] = a, x
        sigma[q], sigma[b] = b, y
    alpha = dict(s.alpha)
    alpha.update({a: b, b: a})
    face_label = dict(s.face_label)
    face_label.update({a: C, b: C})
    edge_label = dict(s.edge_label)
    edge_label[a] = Label("ForgetTo1Disk", (C,))
    return replace(s, alpha=alpha, sigma=sigma, positive=s.positive | {a}, face_label=face_label,
                   edge_label=edge_label, declared_faces=())


def face_corners(s: StratifiedSurface, face: int, vertex: Optional[int]) -> list[int]:
    """Darts of the face whose corner sits at the given vertex, in boundary order."""
    orbit = s.faces[s.face_of[face]]
    return [d for d in orbit if s.vertex_key(d) == vertex]


def move_add_edge(s: StratifiedSurface, face: Optional[int], p: Optional[int], q: Optional[int]) -> StratifiedSurface:
    """Add a transparent edge from vertex p to vertex q inside the face containing dart ``face``."""
    if not s.alpha:
        return move_add_edge_at(s, None, None)
    if face not in s.alpha:
        raise MoveError(f"no dart {face}")
    cp, cq = face_corners(s, face, p), face_corners(s, face, q)
    if not cp or not cq:
        raise MoveError("p or q not on the face boundary")
    x = cp[0]
    y = (cp[1] if len(cp) > 1 else cp[0]) if p == q else cq[0]
    return move_add_edge_at(s, x, y)


def _bigons(s: StratifiedSurface, e1: int, e2: int) -> list[tuple[int, int]]:
    d1, d2 = s.positive_dart(e1), s.positive_dart(e2)
    if d1 == d2:
        raise MoveError("pattern requires distinct edges")
    out = []
    for x in (d1, s.alpha[d1]):
        orbit = s.faces[s.face_of[x]]
        if len(orbit) == 2:
            y = orbit[1] if orbit[0] == x else orbit[0]
            if y in (d2, s.alpha[d2]):
                out.append((x, y))
    return out


def _remove_bigon(s: StratifiedSurface, x: int, y: int) -> StratifiedSurface:
    """Remove the edge of y across the bigon {x, y}; the edge of x survives."""
    ax, ay = s.alpha[x], s.alpha[y]
    D = s.face_label[x]
    L1, L2 = s.edge_label[s.positive_dart(x)], s.edge_label[s.positive_dart(y)]
    px, py = x in s.positive, y in s.positive
    if px and py:
        new, pos = Label("RelTensorBimod", (L1, D, L2)), x
    elif not px and not py:
        new, pos = Label("RelTensorBimod", (rev(L1), D, rev(L2))), x
    elif px:
        new, pos = Label("EdgeMerge", (L1, D, L2)), x
    else:
        new, pos = Label("EdgeMerge", (L2, D, L1)), ax
    vertices = dict(s.vertex_label)
    for key in list(vertices):
        lab = vertices[key]
        if key == ay:
            lab = cross(lab, _bwd_wall(s, ay))
            nk = s.sigma_inv[ay]
            nk = ax if nk == y else nk
        elif key == ax:
            lab = cross(lab, _fwd_wall(s, y))
            nk = ax
        elif key == y:
            nk = ax
        else:
            continue
        del vertices[key]
        vertices[nk] = lab
    gone = (y, ay)
    face_label = _without(s.face_label, gone)
    face_label[x] = s.face_label[ay]
    edge_label = _without(s.edge_label, gone + (x, ax))
    edge_label[pos] = new
    positive = (s.positive - {x, ax, y, ay}) | {pos}
    return replace(s, alpha=_without(s.alpha, gone), sigma=_splice_out(s.sigma, gone), positive=positive,
                   face_label=face_label, edge_label=edge_label, vertex_label=vertices, declared_faces=())


def move_fuse(s: StratifiedSurface, e1: int, e2: int) -> StratifiedSurface:
    """Fuse two edges with the same orientation across a bigon D into RelTensorBimod(M, D, N)."""
    cands = _bigons(s, e1, e2)
    if not cands:
        raise MoveError("pattern mismatch: the edges do not cobound a bigon")
    for x, y in cands:
        if (x in s.positive) == (y in s.positive):
            return _remove_bigon(s, x, y)
    raise MoveError("pattern mismatch: opposite orientations across the bigon (use merge)")


def move_merge(s: StratifiedSurface, e1: int, e2: int) -> StratifiedSurface:
    """Merge two parallel edges K, L bounding a bigon A into EdgeMerge(K, A, L)."""
    cands = _bigons(s, e1, e2)
    if not cands:
        raise MoveError("not a bigon")
    for x, y in cands:
        if (x in s.positive) != (y in s.positive):
            return _remove_bigon(s, x, y)
    raise MoveError("not a bigon with parallel edges: orientations are opposite (use fuse)")


def move_collapse(s: StratifiedSurface, dart: int) -> StratifiedSurface:
    """Remove a loop bounding a monogon D; the vertex absorbs the bubble M boxtimes_D M^rev."""
    d = s.positive_dart(dart)
    ms = [z for z in (d, s.alpha[d]) if s.faces[s.face_of[z]] == (z,)]
    if not ms:
        raise MoveError("not a monogon")
    m = ms[0]
    am = s.alpha[m]
    D = s.face_label[m]
    wall = s.edge_label[d] if m in s.positive else rev(s.edge_label[d])
    N = Label("RelTensorBimod", (wall, D, wall))
    key = s.vertex_key(m)
    lab = s.vertex_label[key]
    z = s.sigma_inv[am]
    if key == am:
        lab = cross(lab, _fwd_wall(s, m))
        key = m
    if key == m:
        key = z if z != m else None
    new = Label("VertexFuse", (lab, N, Label("ForgetTo0Disk", (N,))))
    gone = (m, am)
    vertices = _without(s.vertex_label, (s.vertex_key(m),))
    vertices[key] = new
    lone = s.face_label[am] if len(s.alpha) == 2 else None
    return replace(s, alpha=_without(s.alpha, gone), sigma=_splice_out(s.sigma, gone), positive=s.positive - set(gone),
                   face_label=_without(s.face_label, gone), edge_label=_without(s.edge_label, gone),
                   vertex_label=vertices, lone_face=lone, declared_faces=())


def is_transparent(s: StratifiedSurface, d: int) -> bool:
    """Edge label acts as the identity wall of the 2-cell on both sides."""
    d = s.positive_dart(d)
    C = s.face_label[d]
    if s.face_label[s.alpha[d]] != C:
        return False
    M = s.edge_label[d]
    if M == Label("ForgetTo1Disk", (C,)):
        return True
    try:
        b = get_backend(s.base)
        w = b.wall(M)
        return w.is_identity() and w.left == b.phase(C)
    except EvaluationError:
        return False


def move_remove_edge(s: StratifiedSurface, dart: int) -> StratifiedSurface:
    """Inverse of add_edge: drop a transparent edge between two distinct faces."""
    d = s.positive_dart(dart)
    ad = s.alpha[d]
    if s.face_of[d] == s.face_of[ad]:
        raise MoveError("edge has the same 2-cell on both sides")
    if not is_transparent(s, d):
        raise MoveError("only transparent 1-cells can be removed")
    gone = (d, ad)
    if len(s.alpha) == 2:
        (lab,) = s.vertex_label.values()
        return replace(s, alpha={}, sigma={}, positive=frozenset(), face_label={}, edge_label={},
                       vertex_label={None: lab}, lone_face=s.face_label[d], declared_faces=())
    vertices = dict(s.vertex_label)
    for key in gone:
        if key in vertices:
            lab = vertices.pop(key)
            k = key
            while k in gone:
                k = s.sigma_inv[k]
            vertices[k] = lab
    return replace(s, alpha=_without(s.alpha, gone), sigma=_splice_out(s.sigma, gone), positive=s.positive - {d},
                   face_label=_without(s.face_label, gone), edge_label=_without(s.edge_label, gone),
                   vertex_label=vertices, declared_faces=())


def interleaved(s: StratifiedSurface, a: int, b: int) -> bool:
    """Two loops at the same vertex whose dart pairs alternate around it."""
    orb = next(o for o in s.vertex_orbits if a in o)
    if b not in orb or s.alpha[a] not in orb or s.alpha[b] not in orb:
        return False
    pos = {x: i for i, x in enumerate(orb)}
    i, j = sorted((pos[a], pos[s.alpha[a]]))
    return (i < pos[b] < j) != (i < pos[s.alpha[b]] < j)


def move_cut_handle(s: StratifiedSurface, a: int, b: int) -> StratifiedSurface:
    """Cut a handle spanned by two interleaved transparent loops; cap with the coend of C."""
    if s.V != 1 or s.F != 1:
        raise MoveError("handle cutting needs one vertex and one 2-cell")
    a, b = s.positive_dart(a), s.positive_dart(b)
    if a == b or not interleaved(s, a, b):
        raise MoveError("loops do not span a handle")
    if not (is_transparent(s, a) and is_transparent(s, b)):
        raise MoveError("handle 1-cells are not transparent")
    C = s.face_label[a]
    gone = (a, s.alpha[a], b, s.alpha[b])
    (key, lab), = s.vertex_label.items()
    k = key
    while k in gone and len(s.alpha) > 4:
        k = s.sigma_inv[k]
    new = Label("VertexFuse", (lab, Label("ForgetTo1Disk", (C,)), Label("FunE", (C, C))))
    rest = len(s.alpha) > 4
    out = replace(s, alpha=_without(s.alpha, gone), sigma=_splice_out(s.sigma, gone) if rest else {},
                  positive=s.positive - set(gone), face_label=_without(s.face_label, gone),
                  edge_label=_without(s.edge_label, gone), vertex_label={k if rest else None: new},
                  lone_face=None if rest else C, declared_faces=())
    # the excised piece must be a single punctured torus
    if out.F != 1:
        raise MoveError("loops do not span a handle")
    return out


# ---------------------------------------------------------------------------
# reduction strategy


@dataclass
class Trace:
    lines: list[str] = field(default_factory=list)

    def record(self, op: str, s: StratifiedSurface) -> None:
        self.lines.append(f"step {len(self.lines) + 1}: {op} {s.stats()}")


def _log(trace: Optional[Trace], op: str, s: StratifiedSurface) -> StratifiedSurface:
    if trace is not None:
        trace.record(op, s)
    return s


def spanning_tree(s: StratifiedSurface) -> list[int]:
    """Positive darts of a BFS tree from the vertex holding the least dart."""
    if not s.alpha:
        return []
    start = s.vertex_orbits[0]
    orbit_of = {d: i for i, o in enumerate(s.vertex_orbits) for d in o}
    seen = {orbit_of[start[0]]}
    queue = deque([start])
    tree = []
    while queue:
        orb = queue.popleft()
        first = orb.index(min(orb))
        for d in orb[first:] + orb[:first]:
            w = orbit_of[s.alpha[d]]
            if w not in seen:
                seen.add(w)
                tree.append(s.positive_dart(d))
                queue.append(s.vertex_orbits[w])
    return tree


def contract_tree(s: StratifiedSurface, trace: Optional[Trace] = None) -> StratifiedSurface:
    for e in spanning_tree(s):
        s = _log(trace, f"contract {e}", move_contract(s, e))
    return s


def _small_face_step(s: StratifiedSurface, trace: Optional[Trace]) -> Optional[StratifiedSurface]:
    """Remove one bigon (preferred) or monogon; None when there is neither."""
    for f in sorted(s.faces, key=lambda f: (len(f) != 2, min(f))):
        if len(f) == 2 and s.positive_dart(f[0]) != s.positive_dart(f[1]):
            x, y = sorted(f)
            op = "fuse" if (x in s.positive) == (y in s.positive) else "merge"
            return _log(trace, f"{op} {s.positive_dart(x)} {s.positive_dart(y)}", _remove_bigon(s, x, y))
    for f in s.faces:
        if len(f) == 1:
            return _log(trace, f"collapse {s.positive_dart(f[0])}", move_collapse(s, f[0]))
    return None


def reduce_to_points(s: StratifiedSurface, trace: Optional[Trace] = None) -> StratifiedSurface:
    """Reduce a sphere to a single labeled vertex with no edges."""
    if s.genus != 0:
        raise ReductionError("reduce_to_points needs genus 0")
    s = contract_tree(s, trace)
    while s.alpha:
        nxt = _small_face_step(s, trace)
        if nxt is None:
            raise ReductionError("no bigon or monogon on a one-vertex sphere")
        s = nxt
    return s


def reduce_genus(s: StratifiedSurface, trace: Optional[Trace] = None) -> StratifiedSurface:
    """Lower the genus by one: reach one vertex and one 2-cell, then cut a handle."""
    if s.genus < 1:
        raise ReductionError("genus 0")
    s = contract_tree(s, trace)
    while s.F > 1:
        nxt = _small_face_step(s, trace)
        if nxt is None:
            edge = next((d for d in s.edges() if s.face_of[d] != s.face_of[s.alpha[d]] and is_transparent(s, d)), None)
            if edge is None:
                raise ReductionError("no single 2-cell reachable: every edge between distinct 2-cells is a real wall")
            nxt = _log(trace, f"remove-edge {edge}", move_remove_edge(s, edge))
        s = nxt
    loops = s.edges()
    for i, a in enumerate(loops):
        for b in loops[i + 1:]:
            if interleaved(s, a, b) and is_transparent(s, a) and is_transparent(s, b):
                try:
                    out = move_cut_handle(s, a, b)
                except MoveError:
                    continue
                return _log(trace, f"cut-handle {a} {b}", out)
    raise ReductionError("no handle with transparent 1-cells")


def reduce_fully(s: StratifiedSurface, trace: Optional[Trace] = None) -> StratifiedSurface:
    while s.genus > 0:
        s = reduce_genus(s, trace)
    return reduce_to_points(s, trace)


def evaluate_reduced(s: StratifiedSurface) -> EvaluationResult:
    if s.alpha:
        raise EvaluationError("surface is not reduced to a point")
    b = get_backend(s.base)
    C = b.phase(s.lone_face)
    P = b.point(s.vertex_label[None])
    if P.phase != C:
        raise EvaluationError("final point does not live in the final 2-cell")
    if C.degeneracy:
        raise EvaluationError(f"final 2-cell is degenerate: {C.degeneracy}")
    return b.project_to_E(P)


def evaluate(s: StratifiedSurface, trace: Optional[Trace] = None) -> EvaluationResult:
    report = check_anomaly_free(s)
    if not report.passed:
        raise EvaluationError(f"not anomaly-free: {report.failures()[0]}")
    return evaluate_reduced(reduce_fully(s, trace))


# ---------------------------------------------------------------------------
# random moves and surfaces


def applicable_moves(s: StratifiedSurface) -> list[tuple[str, tuple]]:
    """Every single move applicable to s, as (name, args)."""
    out: list[tuple[str, tuple]] = []
    edges = s.edges()
    for d in edges:
        if s.vertex_key(d) != s.vertex_key(s.alpha[d]):
            out.append(("contract", (d,)))
        out.append(("add-point", (d,)))
        if s.face_of[d] != s.face_of[s.alpha[d]] and is_transparent(s, d):
            out.append(("remove-edge", (d,)))
    for f in s.faces:
        if len(f) == 1:
            out.append(("collapse", (f[0],)))
        if len(f) == 2 and s.positive_dart(f[0]) != s.positive_dart(f[1]):
            x, y = f
            name = "fuse" if (x in s.positive) == (y in s.positive) else "merge"
            out.append((name, (s.positive_dart(x), s.positive_dart(y))))
        for x in f:
            for y in f:
                out.append(("add-edge-at", (x, y)))
    if not s.alpha:
        out.append(("add-edge-at", (None, None)))
    return out


MOVES: dict[str, Callable[..., StratifiedSurface]] = {
    "contract": move_contract,
    "add-point": move_add_point,
    "add-edge-at": move_add_edge_at,
    "remove-edge": move_remove_edge,
    "collapse": move_collapse,
    "fuse": move_fuse,
    "merge": move_merge,
    "cut-handle": move_cut_handle,
}


def apply_move(s: StratifiedSurface, name: str, args: tuple) -> StratifiedSurface:
    return MOVES[name](s, *args)


def random_reduction(s: StratifiedSurface, rng: random.Random) -> StratifiedSurface:
    """A random maximal sequence of E- or F-lowering moves, then the fixed strategy."""
    while True:
        moves = [m for m in applicable_moves(s) if m[0] in ("contract", "collapse", "fuse", "merge", "remove-edge")]
        if not moves:
            break
        s = apply_move(s, *rng.choice(moves))
    return reduce_fully(s)


FACE_CHOICES = {
    "trivial": ("toric-code", "semion", "three-fermion", "double-semion", "z4-1"),
    "rep-z2": ("rep-z2", "CenterOverE(vec-z4)", "CenterOverE(vec-z2xz2)"),
    "svec": ("svec", "CenterOverE(vec-z2xz2)"),
}


def _gauge(s: StratifiedSurface, face: int, iso: Label) -> StratifiedSurface:
    """Relabel a face through an equivalence iso: C -> C', fixing the surface value."""
    orbit = s.faces[s.face_of[face]]
    edge_label = dict(s.edge_label)
    for x in orbit:
        if x in s.positive:
            edge_label[x] = Label("EdgeMerge", (edge_label[x], s.face_label[x], iso))
        else:
            edge_label[s.alpha[x]] = Label("EdgeMerge", (rev(iso), s.face_label[x], edge_label[s.alpha[x]]))
    target = iso.args[1]
    face_label = dict(s.face_label)
    face_label.update({x: target for x in orbit})
    vertices = {k: (cross(v, iso) if k is not None and s.face_of[s.alpha[k]] == s.face_of[face] else v)
                for k, v in s.vertex_label.items()}
    return replace(s, edge_label=edge_label, face_label=face_label, vertex_label=vertices)


def random_sphere(rng: random.Random, base: str = "trivial", cells: int = 20,
                  faces: Optional[Sequence[str]] = None) -> StratifiedSurface:
    """A random anomaly-free sphere with about ``cells`` cells, anyons and gauge-twisted walls."""
    b = get_backend(base)
    C = parse_label(rng.choice(list(faces or FACE_CHOICES[base])))
    phase = b.phase(C)
    s = sphere(C, base, Label("Obj", (C, Label(phase.name_of(rng.choice(phase.simples))))))
    while s.V + s.E + s.F < cells:
        r = rng.random()
        if not s.alpha or r < 0.5:
            f = rng.choice(s.faces) if s.alpha else None
            x = None if f is None else rng.choice(f)
            y = None if f is None else rng.choice(f)
            s = move_add_edge_at(s, x, y)
        else:
            d = rng.choice(s.edges())
            s = move_add_point(s, d)
            new = max(s.vertex_label, key=lambda k: -1 if k is None else k)
            anyon = rng.choice(phase.simples)
            s = replace(s, vertex_label={**s.vertex_label, new: Label("Obj", (C, Label(phase.name_of(anyon))))})
    count = len(b.iso_list(phase, phase))
    for f in list(s.faces):
        if rng.random() < 0.5:
            k = rng.randrange(count)
            s = _gauge(s, f[0], Label("Iso", (C, C, Label(str(k)))))
    return s


# ---------------------------------------------------------------------------
# file format

HEADER = "strathom-surface 1"


def _cycles(perm: Mapping[int, int]) -> str:
    seen, out = set(), []
    for d in sorted(perm):
        if d in seen:
            continue
        cyc = [d]
        seen.add(d)
        x = perm[d]
        while x != d:
            cyc.append(x)
            seen.add(x)
            x = perm[x]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return " ".join(out)


def format_surface(s: StratifiedSurface) -> str:
    lines = [HEADER, f"base {s.base}"]
    if s.alpha:
        lines.append(f"involution {_cycles(s.alpha)}")
        lines.append(f"rotation {_cycles(s.sigma)}")
        for f in sorted(s.faces, key=min):
            lines.append(f"face {min(f)} : {s.face_label[min(f)]}")
        for d in s.edges():
            lines.append(f"edge {d} : {s.edge_label[d]}")
        for k in sorted(k for k in s.vertex_label if k is not None):
            lines.append(f"vertex {k} : {s.vertex_label[k]}")
    else:
        lines.append(f"face * : {s.lone_face}")
        lines.append(f"vertex * : {s.vertex_label[None]}")
    return "\n".join(lines) + "\n"


def _parse_cycles(text: str, where: str) -> list[tuple[int, ...]]:
    text = text.strip()
    if not text:
        return []
    if not re.fullmatch(r"(\(\s*\d+(\s+\d+)*\s*\)\s*)+", text):
        raise SurfaceError(f"{where}: bad cycle notation")
    return [tuple(int(x) for x in c.split()) for c in re.findall(r"\(([^)]*)\)", text)]


def parse_surface(text: str) -> StratifiedSurface:
    """Read the text format; structural checks are left to validate_surface."""
    base = None
    alpha: dict[int, int] = {}
    sigma: dict[int, int] = {}
    faces: list[tuple[Union[int, tuple, None], Label]] = []
    edges: dict[int, Label] = {}
    vertices: dict[Optional[int], Label] = {}
    seen_header = False
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {no}"
        if line == HEADER:
            seen_header = True
            continue
        key, _, rest = line.partition(" ")
        if key == "base":
            base = rest.strip()
        elif key in ("involution", "rotation"):
            target = alpha if key == "involution" else sigma
            for cyc in _parse_cycles(rest, where):
                if key == "involution" and len(cyc) != 2:
                    raise SurfaceError(f"{where}: involution cycles pair two darts")
                for i, d in enumerate(cyc):
                    if d in target:
                        raise SurfaceError(f"{where}: dart {d} appears twice")
                    target[d] = cyc[(i + 1) % len(cyc)]
        elif key in ("face", "edge", "vertex"):
            cell, sep, lab = rest.partition(":")
            if not sep:
                raise SurfaceError(f"{where}: expected '{key} <cell> : <label>'")
            cell = cell.strip()
            label = parse_label(lab)
            try:
                if key == "face":
                    if cell == "*":
                        ref: Union[int, tuple, None] = None
                    elif cell.startswith("("):
                        ref = _parse_cycles(cell, where)[0]
                    else:
                        ref = int(cell)
                    faces.append((ref, label))
                elif key == "edge":
                    edges[int(cell)] = label
                else:
                    vertices[None if cell == "*" else int(cell)] = label
            except ValueError:
                raise SurfaceError(f"{where}: bad cell reference {cell!r}") from None
        else:
            raise SurfaceError(f"{where}: unknown keyword {key!r}")
    if not seen_header:
        raise SurfaceError(f"missing header {HEADER!r}")
    if base is None:
        raise SurfaceError("missing base line")
    for d, e in list(alpha.items()):
        if e == d:
            raise SurfaceError(f"involution fixes dart {d}")
    for d in edges:
        if d not in alpha:
            raise SurfaceError(f"edge on unknown dart {d}")
    positive = frozenset(edges)
    lone = None
    declared = []
    probe = StratifiedSurface(base, alpha, sigma, positive, {}, {}, {}) if alpha else None
    face_label: dict[int, Label] = {}
    for ref, label in faces:
        if ref is None:
            lone = label
            continue
        if probe is None or set(sigma) != set(alpha):
            raise SurfaceError("face labels need a complete rotation")
        start = ref[0] if isinstance(ref, tuple) else ref
        if start not in alpha:
            raise SurfaceError(f"face on unknown dart {start}")
        if isinstance(ref, tuple):
            declared.append(ref)
        try:
            orbit = probe.faces[probe.face_of[start]]
        except (KeyError, SurfaceError):
            raise SurfaceError("rotation is not a permutation of the darts") from None
        for d in orbit:
            if d in face_label and face_label[d] != label:
                raise SurfaceError(f"face containing dart {d} labeled twice")
            face_label[d] = label
    return StratifiedSurface(base, alpha, sigma, positive, face_label, edges, vertices, lone, tuple(declared))


def load_surface(path: str) -> StratifiedSurface:
    with open(path, encoding="utf-8") as fh:
        return parse_surface(fh.read())
