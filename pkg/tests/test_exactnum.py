import cmath
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strathom.exactnum import (
    ONE,
    ZERO,
    ConductorOverflow,
    CyclotomicNumber,
    RationalMod1,
    cyc_add,
    cyc_conj,
    cyc_inv,
    cyc_mul,
    cyc_normalize,
    cyc_sqrt,
    rational,
    root_of_unity,
    set_max_conductor,
)


def zeta(n, k=1):
    return CyclotomicNumber(n, {k % n: 1})


def close(x, z, tol=1e-12):
    return abs(complex(x) - z) < tol


def test_zeta4_squared_is_minus_one():
    assert zeta(4) * zeta(4) == rational(-1)
    assert (zeta(4) ** 2).conductor == 1


def test_sum_of_cube_roots_vanishes():
    s = CyclotomicNumber(3, {0: 1, 1: 1, 2: 1})
    assert s.is_zero()
    assert s.coefficients == {}


def test_zeta8_squared_descends_to_zeta4():
    x = zeta(8) * zeta(8)
    assert x == zeta(4)
    assert x.conductor == 4
    assert close(x, cmath.exp(2j * cmath.pi / 8) ** 2)


def test_root_of_unity_examples():
    assert root_of_unity(0) == ONE
    assert root_of_unity(Fraction(1, 2)) == rational(-1)
    assert root_of_unity(Fraction(1, 8)) == zeta(8)


def test_sqrt2_squared():
    s = zeta(8) + zeta(8, -1)
    assert s * s == rational(2)
    assert cyc_sqrt(2) == s


def test_conj_of_zeta3():
    assert cyc_conj(zeta(3)) == zeta(3, 2)


def test_additive_identity():
    x = zeta(5) + rational(Fraction(2, 3)) * zeta(5, 3)
    assert cyc_add(x, ZERO) == x


@pytest.mark.parametrize("r", [2, 3, 5, 6, 7, 8, 12, 16, Fraction(1, 2), Fraction(3, 4), 64])
def test_sqrt_of_rationals(r):
    s = cyc_sqrt(r)
    assert s * s == rational(r)
    assert close(s, float(r) ** 0.5)


def test_reciprocal_and_zero_division():
    x = zeta(7) + rational(3)
    assert x * cyc_inv(x) == ONE
    with pytest.raises(ZeroDivisionError):
        cyc_inv(ZERO)


def test_conductor_cap():
    old = set_max_conductor(30)
    try:
        with pytest.raises(ConductorOverflow):
            zeta(7) * zeta(11)
    finally:
        set_max_conductor(old)


def test_serialization_format():
    x = zeta(8) - zeta(8, 3) * Fraction(1, 2)
    text = str(x)
    assert text == "8:[(1, 1/1), (3, -1/2)]"
    assert CyclotomicNumber.parse(text) == x
    assert str(ZERO) == "1:[]"


def test_rational_mod1():
    assert RationalMod1(Fraction(5, 4)) == RationalMod1(Fraction(1, 4))
    assert str(RationalMod1(-1)) == "0/1"
    assert RationalMod1.parse("3/4") + RationalMod1.parse("1/2") == RationalMod1(Fraction(1, 4))


# ---- properties

conductors = st.sampled_from([1, 3, 4, 5, 8, 12, 15, 24])
small_frac = st.fractions(min_value=-3, max_value=3, max_denominator=6)


@st.composite
def cyclotomics(draw):
    n = draw(conductors)
    terms = draw(st.dictionaries(st.integers(0, n - 1), small_frac, max_size=4))
    return CyclotomicNumber(n, terms)


@given(cyclotomics(), cyclotomics(), cyclotomics())
@settings(max_examples=60, deadline=None)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(cyclotomics(), cyclotomics())
@settings(max_examples=60, deadline=None)
def test_conj_is_involutive_automorphism(x, y):
    assert cyc_conj(cyc_conj(x)) == x
    assert cyc_conj(x * y) == cyc_conj(x) * cyc_conj(y)
    assert cyc_conj(x + y) == cyc_conj(x) + cyc_conj(y)
    assert close(cyc_conj(x), complex(x).conjugate(), 1e-9)


@given(cyclotomics())
@settings(max_examples=60, deadline=None)
def test_normalize_idempotent_and_numeric(x):
    assert cyc_normalize(cyc_normalize(x)) == cyc_normalize(x)
    assert CyclotomicNumber.parse(str(x)) == x
    assert str(CyclotomicNumber.parse(str(x))) == str(x)


fracs24 = st.builds(Fraction, st.integers(-48, 48), st.integers(1, 24))


@given(fracs24, fracs24)
@settings(max_examples=150, deadline=None)
def test_root_of_unity_product_rule(a, b):
    assert root_of_unity(a) * root_of_unity(b) == root_of_unity(RationalMod1(a + b))


@given(st.lists(st.tuples(st.integers(0, 95), small_frac), max_size=8), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_canonicalization_is_confluent(terms, rnd):
    # same element built by different merge orders and conductor lifts
    direct = CyclotomicNumber(24, {})
    for k, c in terms:
        direct = direct + CyclotomicNumber(24, {k % 24: c})
    shuffled = list(terms)
    rnd.shuffle(shuffled)
    other = ZERO
    for k, c in shuffled:
        other = other + CyclotomicNumber(48, {(2 * k) % 48: c})
    lifted = {}
    for k, c in terms:
        lifted[(5 * k) % 120] = lifted.get((5 * k) % 120, 0) + c
    assert direct.coefficients == other.coefficients
    assert direct.coefficients == CyclotomicNumber(120, lifted).coefficients
    assert direct.conductor == other.conductor


@given(cyclotomics())
@settings(max_examples=40, deadline=None)
def test_reciprocal(x):
    if x.is_zero():
        return
    assert x * cyc_inv(x) == ONE


def test_numeric_oracle_random_products():
    rnd = random.Random(7)
    for _ in range(50):
        n = rnd.choice([5, 7, 9, 12, 20])
        a = {rnd.randrange(n): Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(3)}
        b = {rnd.randrange(n): Fraction(rnd.randint(-4, 4), rnd.randint(1, 3)) for _ in range(3)}
        za = sum(float(c) * cmath.exp(2j * cmath.pi * k / n) for k, c in a.items())
        zb = sum(float(c) * cmath.exp(2j * cmath.pi * k / n) for k, c in b.items())
        assert close(cyc_mul(CyclotomicNumber(n, a), CyclotomicNumber(n, b)), za * zb, 1e-9)
