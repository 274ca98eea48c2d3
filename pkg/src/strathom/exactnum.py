"""Exact arithmetic in cyclotomic fields and in Q/Z.

A :class:`CyclotomicNumber` is an element of Q(zeta_N) stored in the power
basis 1, z, ..., z^(phi(N)-1) of the smallest field Q(zeta_N) that contains
it.  Every constructor reduces to this canonical form, so ``==`` compares
coefficient maps and nothing else.

Conductors congruent to 2 mod 4 are never used since Q(zeta_2m) = Q(zeta_m)
for odd m.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

DEFAULT_MAX_CONDUCTOR = 720
_MAX_CONDUCTOR = int(os.environ.get("STRATHOM_MAX_CONDUCTOR", DEFAULT_MAX_CONDUCTOR))


class ConductorOverflow(ArithmeticError):
    """Raised when an operation needs a conductor beyond the configured cap."""


def max_conductor() -> int:
    return _MAX_CONDUCTOR


def set_max_conductor(limit: int) -> int:
    """Set the conductor cap and return the previous value."""
    global _MAX_CONDUCTOR
    if limit < 1:
        raise ValueError("conductor cap must be positive")
    old, _MAX_CONDUCTOR = _MAX_CONDUCTOR, int(limit)
    return old


# ---------------------------------------------------------------------------
# rationals mod 1


class RationalMod1:
    """A rational number reduced into [0, 1)."""

    __slots__ = ("_value",)

    def __init__(self, value: Union[int, Fraction, str, "RationalMod1"] = 0) -> None:
        if isinstance(value, RationalMod1):
            self._value = value._value
            return
        if isinstance(value, str):
            value = Fraction(value.strip())
        value = Fraction(value)
        self._value = value - math.floor(value)

    @property
    def value(self) -> Fraction:
        return self._value

    @property
    def numerator(self) -> int:
        return self._value.numerator

    @property
    def denominator(self) -> int:
        return self._value.denominator

    def __add__(self, other: object) -> "RationalMod1":
        if isinstance(other, RationalMod1):
            return RationalMod1(self._value + other._value)
        if isinstance(other, (int, Fraction)):
            return RationalMod1(self._value + other)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other: object) -> "RationalMod1":
        if isinstance(other, RationalMod1):
            return RationalMod1(self._value - other._value)
        if isinstance(other, (int, Fraction)):
            return RationalMod1(self._value - other)
        return NotImplemented

    def __rsub__(self, other: object) -> "RationalMod1":
        if isinstance(other, (int, Fraction)):
            return RationalMod1(other - self._value)
        return NotImplemented

    def __neg__(self) -> "RationalMod1":
        return RationalMod1(-self._value)

    def __mul__(self, k: object) -> "RationalMod1":
        # only integer multiples are well defined on Q/Z
        if isinstance(k, int):
            return RationalMod1(self._value * k)
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalMod1):
            return self._value == other._value
        if isinstance(other, (int, Fraction)):
            return self._value == Fraction(other) - math.floor(Fraction(other))
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("Q/Z", self._value))

    def __lt__(self, other: "RationalMod1") -> bool:
        return self._value < other._value

    def __bool__(self) -> bool:
        return self._value != 0

    def __repr__(self) -> str:
        return f"RationalMod1({self})"

    def __str__(self) -> str:
        return f"{self._value.numerator}/{self._value.denominator}"

    @classmethod
    def parse(cls, text: str) -> "RationalMod1":
        m = re.fullmatch(r"\s*(-?\d+)\s*/\s*(\d+)\s*|\s*(-?\d+)\s*", text)
        if not m:
            raise ValueError(f"not a rational: {text!r}")
        if m.group(3) is not None:
            return cls(int(m.group(3)))
        return cls(Fraction(int(m.group(1)), int(m.group(2))))


# ---------------------------------------------------------------------------
# integer polynomial helpers (coefficient lists, lowest degree first)


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def euler_phi(n: int) -> int:
    result = n
    for p in _prime_factors(n):
        result -= result // p
    return result


def _poly_exact_div(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // lead
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of the n-th cyclotomic polynomial, low degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n):
        if d < n:
            poly = _poly_exact_div(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


def _reduce(coeffs: list[Fraction], n: int) -> list[Fraction]:
    """Remainder of a dense polynomial modulo Phi_n, padded to length phi(n)."""
    phi = cyclotomic_polynomial(n)
    deg = len(phi) - 1
    p = list(coeffs)
    for i in range(len(p) - 1, deg - 1, -1):
        c = p[i]
        if c:
            base = i - deg
            for j in range(deg):
                a = phi[j]
                if a:
                    p[base + j] -= c * a
            p[i] = 0
    p = p[:deg]
    if len(p) < deg:
        p.extend([Fraction(0)] * (deg - len(p)))
    return p


def _trim(p: list[Fraction]) -> list[Fraction]:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p or [Fraction(0)]


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, u in enumerate(a):
        if u:
            for j, v in enumerate(b):
                if v:
                    out[i + j] += u * v
    return out


def _poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    if len(a) < len(b):
        return [Fraction(0)], _trim(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] / lead
        q[i] = c
        if c:
            for j, v in enumerate(b):
                a[i + j] -= c * v
    return q, _trim(a[: len(b) - 1] or [Fraction(0)])


def _from_exponents(terms: Mapping[int, Fraction] | Iterable[tuple[int, Fraction]], n: int) -> list[Fraction]:
    items = terms.items() if isinstance(terms, Mapping) else terms
    dense = [Fraction(0)] * n
    for k, c in items:
        dense[k % n] += Fraction(c)
    return _reduce(dense, n)


def _halve_conductor(dense: list[Fraction], n: int) -> tuple[list[Fraction], int]:
    # zeta_{2m} = -zeta_m^((m+1)/2) for odd m
    m = n // 2
    half = (m + 1) // 2
    out = [Fraction(0)] * m
    for k, c in enumerate(dense):
        if c:
            sign = -1 if k % 2 else 1
            out[(k * half) % m] += sign * c
    return _reduce(out, m), m


def _try_drop_prime(dense: list[Fraction], n: int, p: int) -> list[Fraction] | None:
    """Rewrite an element of Q(zeta_n) over Q(zeta_{n/p}) if it lies there."""
    m = n // p
    if m % p == 0:
        # Phi_n(x) = Phi_m(x^p): basis x^j (x^p)^i with j < p
        for k, c in enumerate(dense):
            if c and k % p:
                return None
        return _reduce([dense[k] for k in range(0, len(dense), p)], m)
    # p exactly divides n: split zeta_n^k = zeta_m^a zeta_p^b via CRT
    inv_p = pow(p, -1, m) if m > 1 else 0
    inv_m = pow(m, -1, p)
    parts = [[Fraction(0)] * max(m, 1) for _ in range(p)]
    for k, c in enumerate(dense):
        if c:
            a = (k * inv_p) % m if m > 1 else 0
            b = (k * inv_m) % p
            parts[b][a] += c
    red = [_reduce(part, m) for part in parts]
    last = red[p - 1]
    for b in range(1, p - 1):
        if red[b] != last:
            return None
    return [x - y for x, y in zip(red[0], last)]


def _canonical(dense: list[Fraction], n: int) -> tuple[int, tuple[Fraction, ...]]:
    if n % 4 == 2:
        dense, n = _halve_conductor(dense, n)
    changed = True
    while changed and n > 1:
        changed = False
        for p in _prime_factors(n):
            smaller = _try_drop_prime(dense, n, p)
            if smaller is not None:
                dense, n = smaller, n // p
                if n % 4 == 2:
                    dense, n = _halve_conductor(dense, n)
                changed = True
                break
    return n, tuple(dense)


def _check_conductor(n: int) -> None:
    if n > _MAX_CONDUCTOR:
        raise ConductorOverflow(f"conductor {n} exceeds cap {_MAX_CONDUCTOR}")


def _lift(dense: tuple[Fraction, ...], n: int, target: int) -> list[Fraction]:
    if n == target:
        return list(dense)
    step = target // n
    return _from_exponents(((k * step, c) for k, c in enumerate(dense) if c), target)


# ---------------------------------------------------------------------------
# cyclotomic numbers

Scalar = Union[int, Fraction]


class CyclotomicNumber:
    """An exact element of Q(zeta_N).

    ``CyclotomicNumber(8, {1: 1})`` is zeta_8.  Exponents may be arbitrary
    integers on input; the stored form is canonical.
    """

    __slots__ = ("_n", "_dense", "_hash")

    def __init__(self, conductor: int = 1, coefficients: Mapping[int, Scalar] | None = None) -> None:
        if conductor < 1:
            raise ValueError("conductor must be positive")
        _check_conductor(conductor)
        dense = _from_exponents(coefficients or {}, conductor)
        self._set(*_canonical(dense, conductor))

    def _set(self, n: int, dense: tuple[Fraction, ...]) -> None:
        self._n = n
        self._dense = dense
        self._hash = None

    @classmethod
    def _make(cls, dense: list[Fraction], n: int) -> "CyclotomicNumber":
        obj = cls.__new__(cls)
        obj._set(*_canonical(dense, n))
        return obj

    @classmethod
    def from_rational(cls, r: Scalar) -> "CyclotomicNumber":
        obj = cls.__new__(cls)
        obj._set(1, (Fraction(r),))
        return obj

    # -- views -------------------------------------------------------------

    @property
    def conductor(self) -> int:
        return self._n

    @property
    def coefficients(self) -> dict[int, Fraction]:
        return {k: c for k, c in enumerate(self._dense) if c}

    def is_zero(self) -> bool:
        return not any(self._dense)

    def is_rational(self) -> bool:
        return self._n == 1

    def to_fraction(self) -> Fraction:
        if self._n != 1:
            raise ValueError(f"{self} is not rational")
        return self._dense[0]

    def __complex__(self) -> complex:
        return sum(
            (float(c) * complex(math.cos(2 * math.pi * k / self._n), math.sin(2 * math.pi * k / self._n))
             for k, c in enumerate(self._dense) if c),
            0j,
        )

    # -- arithmetic ----------------------------------------------------------

    def _common(self, other: "CyclotomicNumber") -> tuple[list[Fraction], list[Fraction], int]:
        n = self._n * other._n // math.gcd(self._n, other._n)
        _check_conductor(n)
        return _lift(self._dense, self._n, n), _lift(other._dense, other._n, n), n

    @staticmethod
    def _coerce(x: object) -> "CyclotomicNumber | None":
        if isinstance(x, CyclotomicNumber):
            return x
        if isinstance(x, (int, Fraction)):
            return CyclotomicNumber.from_rational(x)
        return None

    def __add__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        a, b, n = self._common(y)
        return self._make([u + v for u, v in zip(a, b)], n)

    __radd__ = __add__

    def __neg__(self) -> "CyclotomicNumber":
        obj = CyclotomicNumber.__new__(CyclotomicNumber)
        obj._set(self._n, tuple(-c for c in self._dense))
        return obj

    def __sub__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self + (-y)

    def __rsub__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y + (-self)

    def __mul__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        if y._n == 1:
            c = y._dense[0]
            obj = CyclotomicNumber.__new__(CyclotomicNumber)
            if c == 0:
                obj._set(1, (Fraction(0),))
            else:
                obj._set(self._n, tuple(c * u for u in self._dense))
            return obj
        if self._n == 1:
            return y * self
        a, b, n = self._common(y)
        prod = [Fraction(0)] * (2 * len(a))
        bnz = [(j, v) for j, v in enumerate(b) if v]
        for i, u in enumerate(a):
            if u:
                for j, v in bnz:
                    prod[i + j] += u * v
        return self._make(_reduce(prod, n), n)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "CyclotomicNumber":
        if e < 0:
            return self.reciprocal() ** (-e)
        result = CyclotomicNumber.from_rational(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __truediv__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self * y.reciprocal()

    def __rtruediv__(self, other: object) -> "CyclotomicNumber":
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return y * self.reciprocal()

    def galois(self, a: int) -> "CyclotomicNumber":
        """Apply zeta -> zeta^a (a coprime to the conductor)."""
        if math.gcd(a, self._n) != 1:
            raise ValueError("Galois exponent must be coprime to the conductor")
        return self._make(_from_exponents(((k * a, c) for k, c in enumerate(self._dense) if c), self._n), self._n)

    def conjugate(self) -> "CyclotomicNumber":
        return self.galois(-1)

    def reciprocal(self) -> "CyclotomicNumber":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero cyclotomic number")
        if self._n == 1:
            return CyclotomicNumber.from_rational(1 / self._dense[0])
        # extended Euclid in Q[x] against Phi_n
        n = self._n
        f = _trim(list(self._dense))
        g = _trim([Fraction(c) for c in cyclotomic_polynomial(n)])
        s0, s1 = [Fraction(1)], [Fraction(0)]
        while len(g) > 1 or g[0] != 0:
            q, r = _poly_divmod(f, g)
            f, g = g, r
            s0, s1 = s1, _trim(_poly_sub(s0, _poly_mul(q, s1)))
        inv = [c / f[0] for c in s0]
        return self._make(_reduce(inv, n), n)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        y = self._coerce(other)
        if y is None:
            return NotImplemented
        return self._n == y._n and self._dense == y._dense

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self._n, self._dense))
        return self._hash

    def __bool__(self) -> bool:
        return not self.is_zero()

    # -- text ------------------------------------------------------------------

    def __str__(self) -> str:
        terms = ", ".join(f"({k}, {c.numerator}/{c.denominator})" for k, c in enumerate(self._dense) if c)
        return f"{self._n}:[{terms}]"

    def __repr__(self) -> str:
        return f"CyclotomicNumber.parse({str(self)!r})"

    _PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*/\s*(\d+)\s*\)")

    @classmethod
    def parse(cls, text: str) -> "CyclotomicNumber":
        m = re.fullmatch(r"\s*(\d+)\s*:\s*\[(.*)\]\s*", text)
        if not m:
            raise ValueError(f"not a cyclotomic number: {text!r}")
        n, body = int(m.group(1)), m.group(2)
        terms: dict[int, Fraction] = {}
        pos = 0
        body = body.strip()
        while pos < len(body):
            pm = cls._PAIR.match(body, pos)
            if not pm:
                raise ValueError(f"bad term list: {body!r}")
            k = int(pm.group(1))
            terms[k] = terms.get(k, Fraction(0)) + Fraction(int(pm.group(2)), int(pm.group(3)))
            pos = pm.end()
            rest = re.match(r"\s*,\s*|\s*$", body[pos:])
            if rest is None or (rest.end() == 0 and pos < len(body)):
                raise ValueError(f"bad term list: {body!r}")
            pos += rest.end()
        return cls(n, terms)


# ---------------------------------------------------------------------------
# functional interface


def cyc_normalize(x: CyclotomicNumber) -> CyclotomicNumber:
    return CyclotomicNumber(x.conductor, x.coefficients)


def cyc_add(x: CyclotomicNumber, y: CyclotomicNumber) -> CyclotomicNumber:
    return x + y


def cyc_mul(x: CyclotomicNumber, y: CyclotomicNumber) -> CyclotomicNumber:
    return x * y


def cyc_conj(x: CyclotomicNumber) -> CyclotomicNumber:
    return x.conjugate()


def cyc_inv(x: CyclotomicNumber) -> CyclotomicNumber:
    return x.reciprocal()


def rational(r: Scalar) -> CyclotomicNumber:
    return CyclotomicNumber.from_rational(r)


ZERO = CyclotomicNumber.from_rational(0)
ONE = CyclotomicNumber.from_rational(1)


def root_of_unity(r: Union[RationalMod1, Fraction, int, str]) -> CyclotomicNumber:
    """Return exp(2 pi i r) exactly."""
    v = RationalMod1(r).value
    return CyclotomicNumber(v.denominator, {v.numerator: 1})


@lru_cache(maxsize=None)
def _sqrt_prime(p: int) -> CyclotomicNumber:
    if p == 2:
        return CyclotomicNumber(8, {1: 1, 7: 1})
    # quadratic Gauss sum: sqrt(p) for p = 1 mod 4, i sqrt(p) for p = 3 mod 4
    g = CyclotomicNumber(p, {a: (1 if pow(a, (p - 1) // 2, p) == 1 else -1) for a in range(1, p)})
    if p % 4 == 1:
        return g
    return g * CyclotomicNumber(4, {3: 1})


def cyc_sqrt(r: Scalar) -> CyclotomicNumber:
    """Principal square root of a rational (i * sqrt|r| for negative r)."""
    r = Fraction(r)
    if r == 0:
        return ZERO
    sign_i = r < 0
    r = abs(r)
    n = r.numerator * r.denominator
    square, free = 1, 1
    for p in _prime_factors(n):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        square *= p ** (e // 2)
        if e % 2:
            free *= p
    result = rational(Fraction(square, r.denominator))
    for p in _prime_factors(free):
        result = result * _sqrt_prime(p)
    if sign_i:
        result = result * CyclotomicNumber(4, {1: 1})
    return result


def cyc_dot(xs: Iterable[CyclotomicNumber], ys: Iterable[CyclotomicNumber]) -> CyclotomicNumber:
    """Sum of products x_i * y_i, canonicalized once at the end."""
    pairs = [(x, y) for x, y in zip(xs, ys) if not x.is_zero() and not y.is_zero()]
    if not pairs:
        return ZERO
    n = 1
    for x, y in pairs:
        for m in (x._n, y._n):
            n = n * m // math.gcd(n, m)
    _check_conductor(n)
    deg = euler_phi(n)
    prod = [Fraction(0)] * (2 * deg)
    for x, y in pairs:
        a = _lift(x._dense, x._n, n)
        bnz = [(j, v) for j, v in enumerate(_lift(y._dense, y._n, n)) if v]
        for i, u in enumerate(a):
            if u:
                for j, v in bnz:
                    prod[i + j] += u * v
    return CyclotomicNumber._make(_reduce(prod, n), n)
