"""Ingested L-function zeros: counting, density audits, exceptional moduli, explicit formula.

Zero files list, per character, the ordinates ``gamma > 0`` (optionally with
``beta``) up to a certified height.  At ingestion each zero ``beta + i gamma``
of ``L(s, chi)`` also yields ``beta - i gamma`` as a zero of ``L(s, conj chi)``;
for real characters that is the same L-function.  A character's list is
complete for ``|gamma| <= T`` only if both its own header and its conjugate's
header certify T.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .characters import DirichletCharacter, from_key, primitive_characters
from .sieve import table, window

DEDUPE_TOL = 1e-9
HEADER = re.compile(r"#\s*modulus=(\S+)\s+label=(\S+)\s+complete_to=(\S+)\s*$")


class ZeroFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = f"{path or '<text>'}:{line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class CompletenessError(LookupError):
    pass


class MissingCharacterError(KeyError):
    pass


@dataclass(frozen=True)
class ZeroRecord:
    modulus: int
    label: str
    gamma: float
    beta: float = 0.5

    @property
    def key(self) -> str:
        return f"{self.modulus}.{self.label}"


def _conj_key(key: str) -> str:
    return from_key(key).conj().key


@dataclass
class ZeroDataset:
    """Zeros per character key plus the height each list is certified to."""

    zeros: dict[str, np.ndarray] = field(default_factory=dict)  # key -> (k, 2) rows (beta, gamma)
    declared: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def keys(self) -> list[str]:
        return sorted(self.declared, key=lambda k: tuple(int(x) for x in k.split(".")))

    def __contains__(self, key: str) -> bool:
        return key in self.declared

    def records(self, key: str) -> list[ZeroRecord]:
        q, label = key.split(".")
        return [ZeroRecord(int(q), label, float(g), float(b)) for b, g in self.table(key)]

    def table(self, key: str) -> np.ndarray:
        if key not in self.declared:
            raise MissingCharacterError(f"no zero data for character {key}")
        return self.zeros.get(key, np.zeros((0, 2)))

    def complete_to(self, key: str) -> float:
        """Height T with the list certified for ``|gamma| <= T``."""
        if key not in self.declared:
            raise MissingCharacterError(f"no zero data for character {key}")
        ck = _conj_key(key)
        if ck not in self.declared:
            return 0.0
        return min(self.declared[key], self.declared[ck])

    def require(self, key: str, T: float) -> None:
        top = self.complete_to(key)
        if T > top:
            raise CompletenessError(f"character {key} is certified only to |gamma| <= {top}, asked for {T}")

    def __len__(self) -> int:
        return sum(len(v) for v in self.zeros.values())


@dataclass
class _Block:
    key: str
    complete_to: float
    rows: list = field(default_factory=list)


def _parse(lines: Iterable[str], path: str | None) -> tuple[list[_Block], int]:
    blocks: list[_Block] = []
    count = 0
    for lineno, raw in enumerate(lines, start=1):
        count += 1
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = HEADER.match(line)
            if m is None:
                if "modulus=" in line:
                    raise ZeroFileError(f"malformed header {line!r}", lineno, path)
                continue
            try:
                q, T = int(m.group(1)), float(m.group(3))
            except ValueError:
                raise ZeroFileError(f"malformed header {line!r}", lineno, path) from None
            if q < 1:
                raise ZeroFileError(f"modulus must be >= 1, got {q}", lineno, path)
            if not math.isfinite(T) or T < 0:
                raise ZeroFileError(f"complete_to must be a nonnegative number, got {m.group(3)}", lineno, path)
            label = m.group(2)
            try:
                chi = from_key(f"{q}.{label}")
            except ValueError as exc:
                raise ZeroFileError(str(exc), lineno, path) from None
            blocks.append(_Block(chi.key, T))
            continue
        if not blocks:
            raise ZeroFileError("zero record before any completeness header", lineno, path)
        parts = line.split()
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise ZeroFileError(f"malformed record {line!r}", lineno, path) from None
        if len(nums) == 1:
            beta, gamma = 0.5, nums[0]
        elif len(nums) == 2:
            beta, gamma = nums
        else:
            raise ZeroFileError(f"expected '<gamma>' or '<beta> <gamma>', got {line!r}", lineno, path)
        if not (0 < beta < 1) or not math.isfinite(gamma):
            raise ZeroFileError(f"need 0 < beta < 1 and finite gamma, got {line!r}", lineno, path)
        if gamma <= 0:
            raise ZeroFileError(f"files list gamma > 0 only, got {gamma}", lineno, path)
        blocks[-1].rows.append((beta, gamma))
    return blocks, count


def _dedupe(rows: np.ndarray) -> tuple[np.ndarray, int]:
    if len(rows) == 0:
        return rows.reshape(0, 2), 0
    rows = rows[np.lexsort((rows[:, 0], rows[:, 1]))]
    keep = [0]
    for i in range(1, len(rows)):
        dup = False
        for j in reversed(keep):
            if rows[i, 1] - rows[j, 1] > DEDUPE_TOL:
                break
            if abs(rows[i, 0] - rows[j, 0]) <= DEDUPE_TOL:
                dup = True
                break
        if not dup:
            keep.append(i)
    return rows[keep], len(rows) - len(keep)


def build_dataset(blocks: list[_Block], metadata: dict | None = None) -> ZeroDataset:
    declared: dict[str, float] = {}
    upper: dict[str, list] = {}
    for b in blocks:
        declared[b.key] = max(declared.get(b.key, 0.0), b.complete_to)
        upper.setdefault(b.key, []).extend(b.rows)
    raw: dict[str, list] = {}
    dups = 0
    for key, rows in upper.items():
        arr, d = _dedupe(np.array(rows, dtype=np.float64).reshape(-1, 2))
        dups += d
        raw.setdefault(key, []).append(arr)
        raw.setdefault(_conj_key(key), []).append(arr * np.array([1.0, -1.0]))
    zeros = {}
    for key, parts in raw.items():
        arr = np.concatenate(parts)
        if len(arr):
            zeros[key] = arr[np.argsort(arr[:, 1], kind="stable")]
    if dups:
        warnings.warn(f"dropped {dups} duplicate zero records", stacklevel=3)
    meta = dict(metadata or {})
    meta["duplicates"] = meta.get("duplicates", 0) + dups
    return ZeroDataset(zeros, declared, meta)


def ingest(path: str | Path | Iterable[str | Path]) -> ZeroDataset:
    """Read one or more zero files into a dataset."""
    paths = [path] if isinstance(path, (str, Path)) else list(path)
    blocks, lines = [], 0
    for p in paths:
        p = Path(p)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ZeroFileError(f"cannot read zero file: {exc}", None, str(p)) from None
        b, n = _parse(text.splitlines(), str(p))
        blocks += b
        lines += n
    if not blocks:
        raise ZeroFileError("no completeness header found", None, ", ".join(map(str, paths)))
    return build_dataset(blocks, {"line_count": lines, "sources": [str(p) for p in paths]})


def ingest_text(text: str) -> ZeroDataset:
    blocks, lines = _parse(text.splitlines(), None)
    if not blocks:
        raise ZeroFileError("no completeness header found")
    return build_dataset(blocks, {"line_count": lines, "sources": ["<text>"]})


def bundled_zeta_zeros() -> Path:
    """Path of the shipped zeta zero list."""
    return Path(str(resources.files("shortprimes") / "data" / "zeta_zeros.txt"))


def load_zeta_zeros() -> ZeroDataset:
    return ingest(bundled_zeta_zeros())


# --- counting and audits ---------------------------------------------------


def count_zeros(ds: ZeroDataset, sigma: float, T: float, chi: str) -> int:
    """``N(sigma, T, chi) = #{rho : beta >= sigma, |gamma| <= T}``."""
    if not 0.5 <= sigma <= 1:
        raise ValueError(f"need 1/2 <= sigma <= 1, got {sigma}")
    ds.require(chi, T)
    rows = ds.table(chi)
    return int(np.count_nonzero((rows[:, 0] >= sigma) & (np.abs(rows[:, 1]) <= T)))


@dataclass(frozen=True)
class DensityParams:
    """Exponents of the density inequality and the cutoff ``sigma0``.

    ``sigma0 = 1 - c0 log log x / log x`` when ``x`` is given; an explicit
    ``sigma0`` overrides it, since for desk-scale x the formula falls below 1/2.
    """

    c: float = 12 / 5
    M_exp: int = 14
    c0: float = 10.0
    x: float | None = None
    sigma0_override: float | None = None

    def __post_init__(self):
        if not 2 <= self.c <= 4:
            raise ValueError(f"density constant c must be in [2, 4], got {self.c}")

    @property
    def sigma0(self) -> float:
        if self.sigma0_override is not None:
            return self.sigma0_override
        if self.x is None:
            raise ValueError("sigma0 needs x or an explicit override")
        L = math.log(self.x)
        return 1 - self.c0 * math.log(L) / L


def density_ratio(ds: ZeroDataset, Q: int, T: float, sigma: float, params: DensityParams) -> float:
    """``sum_{q<=Q} sum*_chi N(sigma, T, chi) / ((Q^2 T)^(c(1-sigma)) (log QT)^M)``."""
    total = 0
    for q in range(1, Q + 1):
        for chi in primitive_characters(q):
            total += count_zeros(ds, sigma, T, chi.key)
    if total == 0:
        return 0.0
    return total / ((Q * Q * T) ** (params.c * (1 - sigma)) * math.log(Q * T) ** params.M_exp)


def _flagged_moduli(ds: ZeroDataset, limit: int, sigma: float, T: float, strict: bool) -> set[int]:
    flagged = set()
    for d in range(1, limit + 1):
        for chi in primitive_characters(d):
            if chi.key not in ds:
                if strict:
                    raise MissingCharacterError(f"no zero data for character {chi.key}")
                continue
            if count_zeros(ds, sigma, T, chi.key) >= 1:
                flagged.add(d)
                break
    return flagged


def exceptional_moduli(ds: ZeroDataset, Q: int, x: float, params: DensityParams,
                       strict: bool = False) -> set[int]:
    """q <= Q divisible by a modulus d carrying a primitive chi with ``N(sigma0, x, chi) >= 1``.

    Characters absent from the dataset are skipped unless ``strict``; every
    character that is present must be certified to height x.
    """
    flagged = _flagged_moduli(ds, Q, params.sigma0, x, strict)
    return {q for q in range(1, Q + 1) if any(q % d == 0 for d in flagged)}


def exceptional_moduli_near_one(ds: ZeroDataset, z: float, x: float, c: float) -> set[int]:
    """Moduli d <= z with a primitive character having a zero with ``beta >= 1 - c/log z``.

    Exposed for exploration only; nothing here certifies the absence of
    exceptional zeros.
    """
    sigma = max(0.5, 1 - c / math.log(z))
    return _flagged_moduli(ds, int(z), sigma, x, strict=False)


def spacing_statistic(ds: ZeroDataset, key: str, T: float) -> tuple[float, float]:
    """``max_rho sum_rho' 1/(1+|gamma-gamma'|)`` over ``|gamma| <= T`` and its ratio to ``(log T)^2``."""
    ds.require(key, T)
    g = ds.table(key)[:, 1]
    g = g[np.abs(g) <= T]
    if len(g) == 0:
        return 0.0, 0.0
    sums = (1.0 / (1.0 + np.abs(g[:, None] - g[None, :]))).sum(axis=1)
    top = float(sums.max())
    return top, top / math.log(T) ** 2


# --- explicit formula ------------------------------------------------------


def zero_weights(ds: ZeroDataset, chi: str, eta: float, T0: float) -> tuple[np.ndarray, np.ndarray]:
    """Zeros ``rho`` with ``|gamma| <= T0`` and the weights ``((1+eta)^rho - 1)/rho``."""
    ds.require(chi, T0)
    rows = ds.table(chi)
    rows = rows[np.abs(rows[:, 1]) <= T0]
    rho = rows[:, 0] + 1j * rows[:, 1]
    return rho, (np.exp(rho * math.log1p(eta)) - 1) / rho


def explicit_formula_sum(ds: ZeroDataset, chi: str, y: float, eta: float, T0: float,
                         corrections: bool = True) -> complex:
    """Reconstruct ``psi(y + eta y, chi) - psi(y, chi)`` from zeros with ``|gamma| <= T0``.

    For the modulus-1 character the main term is ``eta y``; the corrections are
    the trivial-zero terms (``-1/2 log(1 - x^-2)``; the ``log 2 pi`` constant
    cancels in the difference).  For a primitive nonprincipal character of
    parity a they are ``-(1-a) log x + sum_m x^(a-2m)/(2m-a)``.  Prime-power
    endpoints carry half weight, as in the usual ``psi_0`` normalization.
    """
    if y <= 1 or eta < 0:
        raise ValueError(f"need y > 1 and eta >= 0, got y={y}, eta={eta}")
    character = from_key(chi)
    if not character.is_primitive:
        raise ValueError(f"explicit formula needs a primitive character, got {chi}")
    if eta == 0:
        return 0j
    rho, w = zero_weights(ds, chi, eta, T0)
    zsum = complex(np.sum(w * np.exp(rho * math.log(y))))
    x1, x2 = y, y * (1 + eta)
    if character.modulus == 1:
        value = eta * y - zsum
        if corrections:
            value -= 0.5 * (math.log1p(-x2**-2) - math.log1p(-x1**-2))
        return value
    value = -zsum
    if corrections:
        a = character.parity
        value -= (1 - a) * (math.log(x2) - math.log(x1))
        m = 1
        while True:
            term = (x2 ** (a - 2 * m) - x1 ** (a - 2 * m)) / (2 * m - a)
            value += term
            if abs(term) < 1e-18 or m > 200:
                break
            m += 1
    return value


def psi0_difference(y: float, h: float, chi: DirichletCharacter | None = None) -> complex:
    """``psi_0(y+h, chi) - psi_0(y, chi)`` from the sieve, halving integer endpoints."""
    first, last = window(y, h)
    tab = table(last + 2)
    ns = np.arange(first, last + 1)
    weights = tab.lam[ns] * (chi(ns) if chi is not None else 1)
    total = complex(math.fsum(np.real(weights).tolist()), math.fsum(np.imag(weights).tolist()))
    for x, sign in ((Fraction(y) + Fraction(h), -0.5), (Fraction(y), 0.5)):
        if x.denominator == 1 and x >= 1:
            n = int(x)
            total += sign * tab.lam[n] * (chi(n) if chi is not None else 1)
    return total
