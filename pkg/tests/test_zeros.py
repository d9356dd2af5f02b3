import math

import pytest

from shortprimes import zeros as zs
from shortprimes.characters import from_key
from shortprimes.sieve import table


@pytest.fixture(scope="module")
def zeta():
    return zs.load_zeta_zeros()


def test_bundled_zeta_zeros(zeta):
    assert len(zeta.table("1.0")) == 2 * 649
    assert zeta.complete_to("1.0") == 1000
    assert zeta.table("1.0")[:, 1].max() == pytest.approx(-zeta.table("1.0")[:, 1].min())


def test_counts(zeta):
    assert zs.count_zeros(zeta, 0.5, 30, "1.0") == 6
    assert zs.count_zeros(zeta, 0.6, 30, "1.0") == 0
    assert zs.count_zeros(zeta, 0.5, 1, "1.0") == 0
    brute = sum(1 for r in zeta.records("1.0") if abs(r.gamma) <= 100)
    assert zs.count_zeros(zeta, 0.5, 100, "1.0") == brute == 58
    with pytest.raises(ValueError):
        zs.count_zeros(zeta, 0.4, 30, "1.0")
    with pytest.raises(zs.CompletenessError):
        zs.count_zeros(zeta, 0.5, 2000, "1.0")


def test_complex_character_needs_conjugate_header():
    text = "# modulus=7 label=1 complete_to=50\n10.5\n"
    ds = zs.ingest_text(text)
    with pytest.raises(zs.CompletenessError):
        zs.count_zeros(ds, 0.5, 10, "7.1")
    conj = from_key("7.1").conj().key
    ds = zs.ingest_text(text + f"# modulus=7 label={conj.split('.')[1]} complete_to=40\n")
    assert ds.complete_to("7.1") == 40
    assert zs.count_zeros(ds, 0.5, 20, "7.1") == 1
    assert zs.count_zeros(ds, 0.5, 20, conj) == 1
    assert ds.table(conj)[0].tolist() == [0.5, -10.5]


def test_real_character_mirrors_onto_itself():
    ds = zs.ingest_text("# modulus=7 label=3 complete_to=30\n0.5 6.0\n")
    assert sorted(ds.table("7.3")[:, 1].tolist()) == [-6.0, 6.0]
    assert zs.count_zeros(ds, 0.5, 10, "7.3") == 2


def test_duplicates_are_dropped_with_warning():
    with pytest.warns(UserWarning):
        ds = zs.ingest_text("# modulus=1 label=0 complete_to=30\n14.1\n14.1\n21.0\n")
    assert ds.metadata["duplicates"] == 1
    assert len(ds.table("1.0")) == 4


@pytest.mark.parametrize(
    "text",
    [
        "14.1\n",
        "# modulus=-3 label=0 complete_to=10\n",
        "# modulus=1 label=0 complete_to=10\nabc\n",
        "# modulus=1 label=0 complete_to=10\n0.5 -3\n",
        "# modulus=1 label=0 complete_to=10\n1.5 3\n",
        "# modulus=1 label=0 complete_to=10\n1 2 3\n",
        "# modulus=7 label=99 complete_to=10\n",
        "",
    ],
)
def test_malformed_files(text):
    with pytest.raises(zs.ZeroFileError):
        zs.ingest_text(text)


def test_missing_file_reports_path(tmp_path):
    with pytest.raises(zs.ZeroFileError) as err:
        zs.ingest(tmp_path / "nope.txt")
    assert "nope.txt" in str(err.value)


def test_density_ratio(zeta):
    params = zs.DensityParams()
    expect = 6 / (30 ** (12 / 5 * 0.5) * math.log(30) ** 14)
    assert zs.density_ratio(zeta, 1, 30, 0.5, params) == pytest.approx(expect, rel=1e-12)
    empty = zs.ingest_text("# modulus=1 label=0 complete_to=30\n")
    assert zs.density_ratio(empty, 1, 30, 0.5, params) == 0
    with pytest.raises(zs.MissingCharacterError):
        zs.density_ratio(zeta, 3, 30, 0.5, params)
    with pytest.raises(ValueError):
        zs.DensityParams(c=5)


def test_sigma0_formula_and_override():
    p = zs.DensityParams(x=1e6)
    L = math.log(1e6)
    assert p.sigma0 == pytest.approx(1 - 10 * math.log(L) / L)
    assert zs.DensityParams(sigma0_override=0.9).sigma0 == 0.9
    with pytest.raises(ValueError):
        zs.DensityParams().sigma0


def test_exceptional_moduli_synthetic():
    ds = zs.ingest_text("# modulus=1 label=0 complete_to=100\n14.1\n# modulus=7 label=3 complete_to=100\n0.95 5.0\n")
    params = zs.DensityParams(sigma0_override=0.9)
    assert zs.exceptional_moduli(ds, 30, 50, params) == {7, 14, 21, 28}
    with pytest.raises(zs.MissingCharacterError):
        zs.exceptional_moduli(ds, 30, 50, params, strict=True)
    assert zs.exceptional_moduli_near_one(ds, 10, 50, 0.5) == {7}


def test_spacing_statistic(zeta):
    top, ratio = zs.spacing_statistic(zeta, "1.0", 100)
    assert top > 1 and ratio == pytest.approx(top / math.log(100) ** 2)


def test_explicit_formula_converges(zeta):
    y, eta = 100.0, 0.5
    direct = zs.psi0_difference(y, eta * y).real
    err_700 = abs(zs.explicit_formula_sum(zeta, "1.0", y, eta, 700) - direct)
    assert err_700 < 0.05
    assert zs.explicit_formula_sum(zeta, "1.0", y, 0, 100) == 0
    with pytest.raises(ValueError):
        zs.explicit_formula_sum(zeta, "1.0", 1, 0.5, 100)


def test_psi0_halves_prime_endpoints():
    lam = table(200).lam
    full = math.fsum(lam[n] for n in range(101, 128))
    # y + h = 127 is prime: its weight is halved
    assert zs.psi0_difference(100, 27).real == pytest.approx(full - lam[127] / 2, abs=1e-12)
    assert zs.psi0_difference(100.5, 26.5).real == pytest.approx(full - lam[127] / 2, abs=1e-12)
    assert zs.psi0_difference(100.5, 27).real == pytest.approx(full, abs=1e-12)


def test_nonprincipal_explicit_formula_needs_primitive(zeta):
    with pytest.raises(ValueError):
        zs.explicit_formula_sum(zeta, "6.1", 100, 0.5, 10)
