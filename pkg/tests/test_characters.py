import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shortprimes import characters as ch
from shortprimes.sieve import euler_phi


def brute_conductor(chi):
    q = chi.modulus
    for d in sorted(d for d in range(1, q + 1) if q % d == 0):
        if all(abs(chi(n) - 1) < 1e-12 for n in range(1, q) if math.gcd(n, q) == 1 and n % d == 1 % d):
            return d


@pytest.mark.parametrize("q", [1, 2, 3, 4, 8, 9, 12, 16, 24, 45, 63])
def test_group_size_and_principal(q):
    chars = ch.enumerate_characters(q)
    assert len(chars) == euler_phi(q)
    assert chars[0].is_principal
    assert len({c.key for c in chars}) == len(chars)


@pytest.mark.parametrize("q", [5, 12, 16, 21, 40])
def test_multiplicative_and_periodic(q):
    for chi in ch.enumerate_characters(q):
        for m in range(1, 3 * q):
            assert abs(chi(m) - chi(m + q)) < 1e-12
            for n in range(1, q + 1):
                assert abs(chi(m * n) - chi(m) * chi(n)) < 1e-12


@pytest.mark.parametrize("q", [8, 12, 15, 16, 20, 36, 48])
def test_conductor_matches_brute_force(q):
    for chi in ch.enumerate_characters(q):
        assert chi.conductor == brute_conductor(chi)
        d, inducer = ch.conductor_and_inducer(chi)
        assert inducer.modulus == d and inducer.is_primitive
        for n in range(1, 2 * q):
            if math.gcd(n, q) == 1:
                assert abs(chi(n) - inducer(n)) < 1e-12


def test_mod_twelve_table():
    chars = ch.enumerate_characters(12)
    assert [c.conductor for c in chars] == [1, 3, 4, 12]
    assert [c.parity for c in chars] == [0, 1, 1, 0]
    assert [c.key for c in ch.primitive_characters(12)] == ["12.3"]


def test_conj_and_parity():
    for chi in ch.enumerate_characters(13):
        bar = chi.conj()
        assert bar.conj() == chi
        assert np.allclose(bar.values(), np.conj(chi.values()))
        assert abs(chi(-1 % 13) - (-1) ** chi.parity) < 1e-12
        assert chi.is_real == (bar == chi)


def test_orthogonality_small():
    for q in (1, 2, 7, 24, 60):
        assert ch.orthogonality_residual(q) < 1e-10


@pytest.mark.parametrize("q", [3, 4, 5, 8, 11, 15, 24])
def test_gauss_sum_modulus(q):
    for chi in ch.primitive_characters(q):
        assert abs(abs(ch.gauss_sum(chi)) - math.sqrt(q)) < 1e-10


def test_real_gauss_sum_sign():
    # quadratic character mod a prime p = 1 mod 4 has tau = sqrt(p)
    chi = [c for c in ch.primitive_characters(13) if c.order == 2][0]
    assert abs(ch.gauss_sum(chi) - math.sqrt(13)) < 1e-10


def test_gauss_sum_needs_primitive():
    with pytest.raises(ValueError):
        ch.gauss_sum(ch.enumerate_characters(12)[1])


def test_keys_and_errors():
    chi = ch.from_key("7.3")
    assert chi.modulus == 7 and chi.label == 3 and chi.key == "7.3"
    for bad in ("7", "x.1", "7.99"):
        with pytest.raises(ValueError):
            ch.from_key(bad)
    with pytest.raises(ValueError):
        ch.enumerate_characters(10**7)
    with pytest.raises(ValueError):
        ch.eval(chi, -1)
    assert ch.eval(chi, 7) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 400), st.data())
def test_values_are_roots_of_unity(q, data):
    chars = ch.enumerate_characters(q)
    chi = chars[data.draw(st.integers(0, len(chars) - 1))]
    vals = chi.values()
    units = np.array([math.gcd(a, q) == 1 for a in range(q)])
    assert np.allclose(np.abs(vals[units]), 1)
    assert np.all(vals[~units] == 0)
    assert np.allclose(vals[units] ** chi.order, 1)


def test_gauss_sum_against_direct_exponential():
    chi = ch.primitive_characters(7)[1]
    direct = sum(chi(a) * cmath.exp(2j * math.pi * a / 7) for a in range(1, 7))
    assert abs(ch.gauss_sum(chi) - direct) < 1e-12
