import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shortprimes import experiments as ex, oracle
from shortprimes.sieve import euler_phi, theta_short


def test_alpha_table():
    assert ex.alpha(1.0, 0.05) == 0
    assert ex.alpha(0.7, 0.05) == pytest.approx(0.1)
    assert ex.alpha(0.6, 0.05) == 1 / 8
    assert ex.alpha(0.5, 0.05) == pytest.approx(1 / 6)
    assert ex.alpha(0.3, 0.05) == 1 / 6
    # the pieces agree where they meet
    for theta in (5 / 8, 13 / 24, 1 / 2):
        assert ex.alpha(theta - 1e-12, 0.01) == pytest.approx(ex.alpha(theta, 0.01), abs=1e-9)
    with pytest.raises(ex.ConfigError):
        ex.alpha(0.2, 0.05)


def test_config_derived_quantities():
    cfg = ex.ExperimentConfig(x=1e6, theta=0.5, Q=10, A=1)
    assert cfg.length == pytest.approx(1000)
    L = math.log(1e6)
    assert cfg.eta * cfg.x * L ** (cfg.A + 1) == pytest.approx(cfg.length, rel=1e-9)
    assert cfg.alpha == pytest.approx(1 / 6)
    assert cfg.beta(10) == pytest.approx(math.log(cfg.eta * 1e6 / 100) / L)
    assert ex.ExperimentConfig(x=1e6, h=1000).exponent == pytest.approx(0.5)
    assert ex.ExperimentConfig(x=1e6, h=1000, theorem=3).alpha == pytest.approx(1 / 15)
    assert "eta" in cfg.as_dict()


@pytest.mark.parametrize(
    "kw",
    [dict(theta=0.5, h=10), dict(), dict(h=-1), dict(h=10, Q=0), dict(h=10, samples=-1), dict(h=10, theorem=4)],
)
def test_config_errors(kw):
    with pytest.raises(ex.ConfigError):
        ex.ExperimentConfig(x=1e6, **kw)


def test_conflicting_keys_named():
    with pytest.raises(ex.ConfigError, match="'h' and 'theta'"):
        ex.ExperimentConfig(x=1e6, theta=0.5, h=10)


def test_error_term_basics():
    y, h = 1e4, 100
    assert ex.error_term(y, h, 1) == abs(theta_short(y, h) - h)
    assert ex.error_term(y, h, 3) == oracle.error_terms(y, h, 3)[0]
    # no primes between 24 and 28
    assert ex.error_term(24, 4, 5) == 4 / euler_phi(5)
    with pytest.raises(ValueError):
        ex.error_term(10, 0, 3)


def test_error_term_prime_and_lambda():
    assert ex.error_term_prime(1e4, 100, 1) == 0
    assert ex.error_term_lambda(1e4, 100, 1) == 0
    assert ex.error_term_prime(1e4, 100, 6) == oracle.error_terms(1e4, 100, 6)[1]
    assert ex.error_term_lambda(1e4, 100, 5) == pytest.approx(oracle.error_terms(1e4, 100, 5)[2], abs=1e-9)


def test_large_prime_modulus_relation():
    # modulus above the window: every prime is coprime, and E, E' differ by |h - theta| / phi
    y, h, q = 1000, 50, 1103
    total = theta_short(y, h)
    gap = abs(ex.error_term(y, h, q) - ex.error_term_prime(y, h, q))
    assert gap <= abs(h - total) / euler_phi(q) + 1e-12


def test_prime_power_gap():
    y, h = 1e4, 1e3
    for q in (3, 4, 8):
        gap = abs(ex.error_term_prime(y, h, q) - ex.error_term_lambda(y, h, q))
        assert gap <= ex.higher_power_mass(y, h) + 1e-12
    # 10007^(1/2) range holds 101^2 = 10201 and 3^9 = 19683 is outside
    assert ex.higher_power_mass(y, h) > 0


@settings(max_examples=120, deadline=None)
@given(st.floats(2, 2e5), st.floats(0.5, 5e3), st.integers(1, 40))
def test_oracle_equality(y, h, q):
    fast = ex.WindowSums(y, h).error_terms(q)
    ref = oracle.Window(y, h).error_terms(q)
    assert fast[0] == ref[0]
    assert abs(fast[1] - ref[1]) <= 1e-9 * max(1, ref[1])
    assert abs(fast[2] - ref[2]) <= 1e-9 * max(1, ref[2])
    # E' and E differ by at most |h - coprime mass| / phi
    _, cop = ex.WindowSums(y, h).class_sums(q)
    assert abs(fast[0] - fast[1]) <= abs(h - cop) / euler_phi(q) + 1e-9


def test_monotone_in_modulus_count():
    ws = ex.WindowSums(5e5, 2000)
    partial = np.cumsum([ws.error_terms(q)[0] for q in range(1, 31)])
    assert np.all(np.diff(partial) >= 0)


def test_averaged_error_small():
    cfg = ex.ExperimentConfig(x=2e4, h=500, Q=8, samples=40, seed=3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ex.HypothesisWarning)
        rep = ex.averaged_error(cfg, "E")
    assert rep.mismatches == 0
    assert len(rep.samples) == 40 and len(rep.rows) == 40 * 8
    agg = rep.aggregate
    assert agg["normalized"] == pytest.approx(agg["integral"] / (cfg.length * cfg.x))
    exact = ex.averaged_error_exact(cfg, "E")
    assert abs(agg["normalized"] - exact) <= 5 * agg["normalized_stderr"]


def test_averaged_error_is_reproducible():
    cfg = ex.ExperimentConfig(x=2e4, h=500, Q=3, samples=10, seed=9)
    a = ex.averaged_error(cfg, "Eprime", check_oracle=False)
    b = ex.averaged_error(cfg, "Eprime", check_oracle=False)
    assert a.samples == b.samples


def test_averaged_error_warns_and_rejects():
    with pytest.warns(ex.HypothesisWarning):
        ex.averaged_error(ex.ExperimentConfig(x=1e4, h=100, Q=30, samples=2), "E")
    with pytest.raises(ex.ConfigError):
        ex.averaged_error(ex.ExperimentConfig(x=1e4, h=100, samples=0), "E")
    with pytest.raises(ex.ConfigError):
        ex.averaged_error(ex.ExperimentConfig(x=1e4, h=100, samples=2), "F")


def test_selberg_average_q1():
    cfg = ex.ExperimentConfig(x=1e5, h=2000, Q=1, samples=64)
    rep = ex.averaged_error(cfg, "E")
    assert rep.mismatches == 0
    exact = ex.averaged_error_exact(cfg, "E")
    assert 0 < exact < 1
    assert abs(rep.aggregate["normalized"] - exact) <= 5 * rep.aggregate["normalized_stderr"]


def test_exact_mode_full_interval_against_direct_sum():
    # h = x: the integrand changes only at integers; integrate it piece by piece directly
    x, Q = 300, 4
    cfg = ex.ExperimentConfig(x=x, h=x, Q=Q)
    direct = math.fsum(
        sum(oracle.error_terms(m, x, q)[0] for q in range(1, Q + 1)) for m in range(x, 2 * x)
    ) / (x * x)
    assert ex.averaged_error_exact(cfg, "E") == pytest.approx(direct, rel=1e-10)


def test_exact_mode_fractional_length():
    cfg = ex.ExperimentConfig(x=200, h=30.25, Q=3)
    pieces = []
    for m in range(200, 400):
        for lo, hi in ((m, m + 0.75), (m + 0.75, m + 1)):
            mid = (lo + hi) / 2
            pieces.append((hi - lo) * sum(oracle.error_terms(mid, 30.25, q)[0] for q in range(1, 4)))
    direct = math.fsum(pieces) / (30.25 * 200)
    assert ex.averaged_error_exact(cfg, "E") == pytest.approx(direct, rel=1e-10)


def test_cover_blocks_tile():
    blocks = ex.cover_blocks(1000.0, 50.0, 0.01)
    for (y0, h0), (y1, _) in zip(blocks, blocks[1:]):
        assert y0 + h0 == y1
    assert blocks[-1][0] < 1050 <= blocks[-1][0] + blocks[-1][1]
    with pytest.raises(ValueError):
        ex.cover_blocks(10, 1, 0)


def test_dyadic_cover_examples():
    chk = ex.dyadic_cover_check(1e5, 1e4, 7, 1e-3)
    assert chk.holds and chk.blocks > 1
    single = ex.dyadic_cover_check(1e5, 50, 7, 1e-3)
    assert single.blocks == 1 and single.holds
    assert single.block_sum >= 0


def test_dyadic_cover_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        y = float(rng.uniform(10, 1e6))
        chk = ex.dyadic_cover_check(y, float(rng.uniform(1, y / 10)), int(rng.integers(1, 31)),
                                    float(10 ** rng.uniform(-3, 0)))
        assert chk.holds


def test_pair_fraction_limits():
    cfg = ex.ExperimentConfig(x=5000, h=300, Q=1)
    res = ex.theorem3_pair_fraction(cfg, 0.01)
    assert res.fraction == 1 and res.mismatches == 0
    assert ex.theorem3_pair_fraction(cfg, 100).fraction == 0
    with pytest.raises(ValueError):
        ex.theorem3_pair_fraction(cfg, 0)


def test_pair_fraction_modes_agree_with_oracle():
    cfg = ex.ExperimentConfig(x=20000, theta=0.4, Q=4, samples=150, seed=2)
    for c in (0.3, 0.8):
        full = ex.theorem3_pair_fraction(cfg, c)
        assert full.mismatches == 0 and full.oracle_passes == full.passes
        sampled = ex.theorem3_pair_fraction(cfg, c, mode="sampled")
        assert sampled.mismatches == 0
    with pytest.raises(ValueError):
        ex.theorem3_pair_fraction(cfg, 0.5, mode="other")


def test_threshold_curve_is_monotone():
    cfg = ex.ExperimentConfig(x=20000, theta=0.4, Q=3)
    curve = ex.pair_threshold_curve(cfg, [0.1, 0.5, 1.0, 1.5, 2.0, 4.0])
    fr = [f for _, f in curve]
    assert all(a >= b for a, b in zip(fr, fr[1:]))
    assert fr[-1] == 0
    assert curve[2][1] == pytest.approx(ex.theorem3_pair_fraction(cfg, 1.0, check_oracle=False).fraction, abs=1e-6)


def test_smk():
    assert ex.smk_count(1, 100) == 100
    for M, K in ((6, 150), (12, 60)):
        count = ex.smk_count(M, K)
        assert count == oracle.smk_count(M, K)
        assert count + len(ex.smk_failures(M, K)) == M * K
    with pytest.raises(ValueError):
        ex.smk_count(0, 5)
    with pytest.raises(ValueError):
        ex.smk_count(10**4, 10**4)


def test_hasse_bounds_at_square_k():
    # k = 4, m = 1: open interval (1, 9); integers 2..8
    lo, hi = ex._hasse_bounds(np.array([1]), np.array([4]))
    assert (lo[0], hi[0]) == (2, 8)
    # k = 2, m = 1: (3 - 2.83, 3 + 2.83) = (0.17, 5.83); integers 1..5
    lo, hi = ex._hasse_bounds(np.array([1]), np.array([2]))
    assert (lo[0], hi[0]) == (1, 5)
