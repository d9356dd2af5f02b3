import math

import numpy as np
import pytest

from shortprimes import identities as ids
from shortprimes.characters import enumerate_characters, from_key
from shortprimes.sieve import table


@pytest.fixture(scope="module")
def window():
    return ids.make_smooth_window()


@pytest.mark.parametrize("kind", ["standard", "wide"])
def test_window_shape(kind):
    g = ids.make_smooth_window(kind)
    assert g(1.0) == 0 and g(4.0) == 0 and g(0.5) == 0 and g(5.0) == 0
    assert g(2.0) == pytest.approx(1.0, abs=1e-14)
    xs = np.linspace(1, 4, 301)
    vals = g.values(xs)
    assert np.all(vals >= 0) and np.all(vals <= 1 + 1e-14)
    assert abs(g.base_mass() - 1) < 1e-12


def test_partition_of_unity(window):
    for x in np.geomspace(1, 1e6, 500):
        assert abs(ids.partition_check(window, float(x)) - 1) <= 1e-12
    assert ids.partition_check(window, 1.0) == pytest.approx(1, abs=1e-14)
    with pytest.raises(ValueError):
        ids.dyadic_terms(0)


def test_mellin_grid_matches_adaptive_quadrature(window):
    ws = [0.5 + 0j, 1.5 - 3j, -0.75 + 20j, 0.25 + 60j]
    for k in (0, 1, 2):
        fast = window.mellin_grid(ws, k)
        for w, f in zip(ws, fast):
            assert abs(f - window.mellin(w, k)) < 1e-10


def test_mellin_at_zero_is_log_mass(window):
    # int g(u) du/u over [1, 4] = log 2 since sum_j g(x/2^j) = 1
    assert abs(window.mellin_grid([0j])[0] - math.log(2)) < 1e-12


def test_heath_brown_structure():
    dec = ids.heath_brown(3, 1000)
    assert [t.binom for t in dec.terms] == [3, 3, 1]
    assert [t.sign for t in dec.terms] == [1, -1, 1]
    assert dec.terms[2].roles == ("log", "one", "one", "mu", "mu", "mu")
    assert dec.z_int**3 <= 4000 < (dec.z_int + 1) ** 3
    for bad in (0, 5):
        with pytest.raises(ValueError):
            ids.heath_brown(bad, 100)


@pytest.mark.parametrize("k0", [1, 2, 3, 4])
def test_heath_brown_table_recovers_lambda(k0):
    nmax = 5000
    lam = table(nmax + 1).lam[: nmax + 1]
    assert np.max(np.abs(ids.heath_brown_table(nmax, k0) - lam)) < 1e-11


def test_heath_brown_pointwise_lattice_route():
    lam = table(2001).lam
    for k0 in (2, 3):
        for n in (1, 2, 64, 97, 360, 1024, 1999, 2000):
            assert abs(ids.heath_brown_lambda(n, k0, 500) - lam[n]) < 1e-12
    with pytest.raises(ValueError):
        ids.heath_brown_lambda(3000, 2, 500)


def test_dirichlet_convolve_divisor_count():
    ones = np.ones(101)
    ones[0] = 0
    tau = ids.dirichlet_convolve(ones, ones)
    assert tau[12] == 6 and tau[97] == 2 and tau[100] == 9


def test_coefficient_blocks(window):
    mu = ids.build_coefficients(ids.Role.MOEBIUS_BLOCK, 10, window)
    assert mu.start == 11 and mu.length == 20
    assert mu.values.tolist() == table(21).mu[11:21].tolist()
    capped = ids.build_coefficients("moebius_block", 10, window, cap=15)
    assert capped.length == 15
    glog = ids.build_coefficients("log_window", 8, window)
    assert glog.start == 8 and glog.length == 32 and glog.bound == (1, 1)
    with pytest.raises(ValueError):
        ids.build_coefficients("window", 0.1, window)


def test_dyadic_grid_covers():
    grid = ids.dyadic_grid(1, 100)
    assert grid[0] == 0.25 and grid[-1] <= 100 < 2 * grid[-1]


@pytest.mark.parametrize("key,k0", [("1.0", 2), ("5.2", 3), ("8.1", 2)])
def test_block_sum_rebuilds_chebyshev(window, key, k0):
    chi = from_key(key)
    y, h = 300, 200
    lam = table(600).lam
    ns = np.arange(301, 501)
    direct = complex(np.sum(lam[ns] * chi(ns)))
    assert abs(ids.hb_block_sum(y, h, chi, k0, window) - direct) < 1e-9
    assert abs(ids.hb_block_sum(y, h, chi, k0, window, aggregate=True) - direct) < 1e-9


def test_block_sum_aggregated_large(window):
    chi = enumerate_characters(7)[2]
    y, h = 9000, 1000
    ns = np.arange(9001, 10001)
    direct = complex(np.sum(table(10001).lam[ns] * chi(ns)))
    assert abs(ids.hb_block_sum(y, h, chi, 4, window, aggregate=True) - direct) < 1e-9
