import math

import pytest
from hypothesis import given, settings, strategies as st

from shortprimes import oracle


def test_is_prime_small():
    primes = [n for n in range(200) if oracle.is_prime(n)]
    assert primes == [n for n in range(2, 200) if all(n % d for d in range(2, math.isqrt(n) + 1))]
    assert oracle.is_prime(2**61 - 1) and not oracle.is_prime(3215031751)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1e7), st.floats(0.1, 3000))
def test_window_primes_match_miller_rabin(y, h):
    got = oracle.window_primes(y, h)
    lo, hi = math.floor(y) + 1, math.floor(y + h)
    # float y + h may round across an integer; both agree away from that edge
    if abs((y + h) - round(y + h)) > 1e-6:
        assert got == [n for n in range(lo, hi + 1) if oracle.is_prime(n)]


def test_members_exact():
    assert len(oracle._members(0.7, 0.3)) == 0
    assert list(oracle._members(1, 3)) == [2, 3, 4]


def test_window_against_naive_sums():
    w = oracle.Window(100, 60)
    sums, total = w.class_sums(4)
    odd = [p for p in range(101, 161) if oracle.is_prime(p)]
    assert total == math.fsum(math.log(p) for p in odd)
    assert sums[1] == pytest.approx(sum(math.log(p) for p in odd if p % 4 == 1))
    psi, _ = w.class_sums(1, "psi")
    # 121 = 11^2, 125 = 5^3, 128 = 2^7 add their prime logs
    assert psi[0] == pytest.approx(total + math.log(11) + math.log(5) + math.log(2))
    assert oracle.totient(36) == 12


def test_pair_thresholds_runs_cover_range():
    runs = oracle.pair_thresholds(500, 30.5, 3)
    assert runs[0][0] == 1 and runs[-1][1] == 501
    assert all(a[1] == b[0] for a, b in zip(runs, runs[1:]))
    for n in (1, 77, 250, 499):
        sums = next(s for a, b, s in runs if a <= n < b)
        assert sums == oracle.Window(n, 30.5).class_sums(3)[0]


def test_hasse_window():
    # m = 1, k = 1: (0, 4) holds 2 and 3
    assert oracle.hasse_window_has_prime(1, 1)
    # m = 5, k = 1: (16, 36); primes 1 mod 5 there: 31
    assert oracle.hasse_window_has_prime(5, 1)
