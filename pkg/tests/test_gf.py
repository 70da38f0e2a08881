import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ksgt.errors import DivisionByZero, NotPrime
from ksgt.gf import PrimeField, field_new, is_prime, smallest_prime_at_least


def _sieve(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = False
    return flags


SIEVE = _sieve(2_000_100)


@pytest.mark.parametrize("q", [5, 41, 2, 3, 7, 2**31 - 1])
def test_field_new_accepts_primes(q):
    assert field_new(q).q == q


@pytest.mark.parametrize("q", [6, 1, 0, 9, 91, 2**31 + 11])
def test_field_new_rejects(q):
    with pytest.raises(NotPrime):
        field_new(q)


def test_arith_examples():
    f5 = PrimeField(5)
    assert f5.mul(3, 4) == 2
    assert f5.inv(3) == 2
    f7 = PrimeField(7)
    assert all(f7.add(0, x) == x for x in range(7))


def test_inv_zero():
    with pytest.raises(DivisionByZero):
        PrimeField(7).inv(0)
    with pytest.raises(ZeroDivisionError):
        PrimeField(7).inv(0)


def test_operands_must_be_elements():
    with pytest.raises(ValueError):
        PrimeField(5).add(5, 1)


def test_pow_and_neg():
    f = PrimeField(7)
    assert f.pow(3, 6) == 1
    assert f.pow(3, -1) == f.inv(3)
    assert f.neg(3) == 4
    assert f.sub(2, 5) == 4


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_field_axioms_exhaustive(q):
    f = PrimeField(q)
    els = range(q)
    for a, b in itertools.product(els, repeat=2):
        assert f.add(a, b) == f.add(b, a)
        assert f.mul(a, b) == f.mul(b, a)
        assert f.add(a, f.neg(a)) == 0
    for a, b, c in itertools.product(els, repeat=3):
        assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    for a in els:
        assert f.add(a, 0) == a and f.mul(a, 1) == a
        if a:
            assert f.mul(a, f.inv(a)) == 1
            assert f.inv(f.inv(a)) == a


elem41 = st.integers(0, 40)


@given(elem41, elem41, elem41)
def test_field_axioms_gf41(a, b, c):
    f = PrimeField(41)
    assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
    assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
    assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    assert f.mul(a, b) == f.mul(b, a)
    if a:
        assert f.mul(a, f.inv(a)) == 1
        assert f.inv(f.inv(a)) == a


@pytest.mark.parametrize("x, expected", [(40, 41), (2, 2), (24, 29)])
def test_smallest_prime_examples(x, expected):
    assert smallest_prime_at_least(x) == expected


@given(st.integers(2, 10**6))
def test_smallest_prime_properties(x):
    p = smallest_prime_at_least(x)
    assert SIEVE[p]
    assert x <= p < 2 * x or x == p == 2
    assert not SIEVE[x:p].any()


@given(st.integers(0, 2_000_000))
def test_is_prime_matches_sieve(n):
    assert is_prime(n) == bool(SIEVE[n])
