import math

import numpy as np
import pytest

from shortprimes import dirichletpoly as dp
from shortprimes.characters import from_key, primitive_characters
from shortprimes.sieve import tau_m


def test_bound_profile_enforced():
    dp.CoeffSequence.from_list([1, -1, 1])
    with pytest.raises(dp.CoefficientBoundError):
        dp.CoeffSequence.from_list([1, 3])
    dp.CoeffSequence.from_list([1, 3], bound=(3, 0))  # tau_3(2) = 3
    with pytest.raises(dp.CoefficientBoundError):
        dp.CoeffSequence(1, np.ones(5000) * 2)
    with pytest.raises(ValueError):
        dp.CoeffSequence(0, np.ones(3))


def test_sequence_shape_and_csv(tmp_path):
    c = dp.CoeffSequence(3, np.array([1.0, 0.0, -1.0]), label="x")
    assert c.length == 5 and len(c) == 3
    assert c.nonzero_support().tolist() == [3, 5]
    assert c.dense(6).tolist() == [0, 0, 0, 1, 0, -1, 0]
    assert c.l2() == 2
    c.write_csv(tmp_path / "c.csv")
    back = dp.CoeffSequence.read_csv(tmp_path / "c.csv")
    assert back.start == 3 and back.values.tolist() == c.values.tolist()


def test_convolution_is_tau_and_profiles_add():
    ones = dp.CoeffSequence(1, np.ones(50))
    tau = ones.convolve(ones, nmax=50)
    assert tau.bound == (2, 0)
    assert all(tau.dense()[n] == tau_m(2, n) for n in range(1, 51))


def test_poly_eval_small_sum():
    c = dp.CoeffSequence.from_list([1, 1, 1, 1, 1])
    value = dp.poly_eval(c, from_key("1.0"), 0.0)
    assert value == pytest.approx(sum(n**-0.5 for n in range(1, 6)), abs=1e-14)
    assert value.real == pytest.approx(3.23167, abs=1e-5)


def test_poly_eval_grid_agrees():
    rng = np.random.default_rng(1)
    c = dp.CoeffSequence(1, rng.choice([-1.0, 1.0], 300))
    chi = from_key("7.2")
    ts = np.linspace(-20, 20, 41)
    grid = dp.poly_eval_grid(c, chi, ts)
    for t, v in zip(ts, grid):
        assert abs(v - dp.poly_eval(c, chi, t)) < 1e-10


def test_mean_value_quadrature_matches_closed_form():
    rng = np.random.default_rng(2)
    c = dp.CoeffSequence(1, rng.choice([-1.0, 1.0], 200))
    Q, T = 5, 20
    exact = sum(dp.mean_value_exact(c, chi, T) for chi in dp.primitive_family(Q))
    # trapezoid on a non-periodic integrand: second order in the step
    coarse = abs(dp.mean_value_integrals([c], Q, T)[0] - exact)
    fine = abs(dp.mean_value_integrals([c], Q, T, step=dp.default_step(200) / 4)[0] - exact)
    assert coarse <= 1e-5 * exact
    assert fine <= coarse / 8


def test_mean_value_spike_closed_form():
    N, Q, T = 2000, 10, 50
    spike = dp.CoeffSequence(1, np.r_[1.0, np.zeros(N - 1)])
    family = dp.primitive_family(Q)
    expect = len(family) * 2 * T / (Q * Q * T + N)
    assert dp.mean_value_ratio(spike, Q, T) == pytest.approx(expect, rel=1e-10)
    assert expect <= 2


def test_mean_value_ratios_random():
    rng = np.random.default_rng(3)
    polys = [dp.CoeffSequence(1, rng.choice([-1.0, 1.0], 500)) for _ in range(5)]
    ratios = dp.mean_value_ratios(polys, 5, 20)
    assert np.all(ratios <= 10) and np.all(ratios > 0)
    with pytest.raises(ValueError):
        dp.mean_value_integrals(polys, 0, 20)
    with pytest.raises(ValueError):
        dp.mean_value_integrals([polys[0], dp.CoeffSequence(2, np.ones(3))], 5, 20)


def test_large_values_spike():
    T = 10.0
    chars = dp.primitive_family(5)
    spike = dp.CoeffSequence.from_list([1.0])
    odd, even = dp.extract_large_values([spike], chars, T, [1.0])
    assert len(odd) == len(even) == 2 * int(T) * len(chars)
    for s in (odd, even):
        assert s.is_well_spaced() and s.satisfies_thresholds()


def test_large_values_random_sets_are_well_spaced(tmp_path):
    rng = np.random.default_rng(4)
    polys = [dp.CoeffSequence(1, rng.choice([-1.0, 1.0], 60)) for _ in range(2)]
    sets = dp.extract_large_values(polys, primitive_characters(7), 20, [2.0, 2.0])
    for s in sets:
        assert s.is_well_spaced() and s.satisfies_thresholds()
        s.write_csv(tmp_path / f"s{s.parity}.csv")
    header = (tmp_path / "s0.csv").read_text().splitlines()[0]
    assert header == "q,label,t,abs_F1,abs_F2,parity_class"


def test_large_values_errors():
    spike = dp.CoeffSequence.from_list([1.0])
    with pytest.raises(ValueError):
        dp.extract_large_values([spike], [], 10, [1.0])
    with pytest.raises(ValueError):
        dp.extract_large_values([spike], primitive_characters(5), 10, [1.0], grid_step=0.5)
    with pytest.raises(ValueError):
        dp.extract_large_values([spike], primitive_characters(5), 10, [1.0, 2.0])


def test_large_value_bound_shape():
    b = [dp.large_value_bound(1000, 500, U, 1, 0) for U in (1, 2, 4, 8)]
    assert all(x > y for x, y in zip(b, b[1:]))
    assert dp.large_value_bound_check(0, 1000, 500, 2, 1, 0) == 0
    with pytest.raises(ValueError):
        dp.large_value_bound(10, 10, 0.5, 1, 0)
    # at N = 1 the log power is tiny, so a single point already exceeds the bound
    assert dp.large_value_bound_check(1, 1, 1, 1, 1, 0) > 1
    assert math.isfinite(dp.large_value_bound(1, 1, 1, 1, 0))


def test_spike_bound_ratio_exceeds_one():
    # U = 1, N = 1: the unit-constant bound is (1 + H) (log 2)^21, far below the counted size
    T, Q = 10.0, 5
    chars = dp.primitive_family(Q)
    odd, even = dp.extract_large_values([dp.CoeffSequence.from_list([1.0])], chars, T, [1.0])
    size, H = len(odd) + len(even), Q * Q * T
    ratio = dp.large_value_bound_check(size, 1, H, 1, 1, 0)
    assert ratio == pytest.approx(size / ((1 + H) * math.log(2) ** 21), rel=1e-12)
    assert ratio > 1
    # the bound falls with U, so the ratio at fixed size rises
    assert dp.large_value_bound_check(size, 1, H, 2, 1, 0) > ratio
