"""Twisted Dirichlet polynomials, hybrid mean values and large values.

Polynomials are ``A(s, chi) = sum_n a_n chi(n) n^(-s)``; evaluation takes
``sigma`` explicitly because the mean-value inequality is stated for
``n^(-it)`` (``sigma = 0``) while the large-value machinery evaluates at
``s = 1/2 + it``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .characters import DirichletCharacter, primitive_characters
from .sieve import tau_m, tau_m_table

BOUND_SLACK = 1e-12


class CoefficientBoundError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoeffSequence:
    """Coefficients ``a_n`` for ``n = start, ..., start + len(values) - 1``.

    ``bound`` is the ``(m, r)`` profile promising ``|a_n| <= tau_m(n) (log n)^r``;
    it is verified when the sequence is built.
    """

    start: int
    values: np.ndarray
    bound: tuple[int, int] = (1, 0)
    label: str = ""
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.start < 1:
            raise ValueError(f"coefficients start at n >= 1, got {self.start}")
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(np.float64)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.check:
            self._check_bound()

    def _check_bound(self):
        m, r = self.bound
        mags = np.abs(self.values)
        ns = self.support()
        live = mags > 0
        if not live.any():
            return
        if self.length > 4096:
            taus = tau_m_table(m, self.length + 1)[ns[live]].astype(np.float64)
        else:
            taus = np.array([tau_m(m, n) for n in ns[live].tolist()], dtype=np.float64)
        logs = np.log(ns[live].astype(np.float64))
        caps = taus * (logs**r if r else 1.0)
        bad = mags[live] > caps * (1 + BOUND_SLACK) + BOUND_SLACK
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            n = int(ns[live][i])
            raise CoefficientBoundError(
                f"|a_{n}| = {mags[live][i]:.6g} exceeds tau_{m}(n) (log n)^{r} = {caps[i]:.6g}"
            )

    @classmethod
    def from_list(cls, values: Sequence[complex], bound=(1, 0), label="") -> "CoeffSequence":
        """Coefficients ``a_1, a_2, ...``."""
        return cls(1, np.asarray(values), bound, label)

    @property
    def length(self) -> int:
        """Largest n in the support (the ``N`` of the polynomial)."""
        return self.start + len(self.values) - 1

    def __len__(self) -> int:
        return len(self.values)

    def support(self) -> np.ndarray:
        return np.arange(self.start, self.start + len(self.values), dtype=np.int64)

    def nonzero_support(self) -> np.ndarray:
        return self.support()[self.values != 0]

    def dense(self, nmax: int | None = None) -> np.ndarray:
        """Array ``d`` with ``d[n] = a_n`` for ``0 <= n <= nmax``."""
        nmax = self.length if nmax is None else nmax
        out = np.zeros(nmax + 1, dtype=self.values.dtype)
        top = min(nmax, self.length)
        if top >= self.start:
            out[self.start : top + 1] = self.values[: top - self.start + 1]
        return out

    def l2(self) -> float:
        return math.fsum((np.abs(self.values) ** 2).tolist())

    def convolve(self, other: "CoeffSequence", nmax: int | None = None) -> "CoeffSequence":
        """Dirichlet convolution; the bound profile adds componentwise."""
        top = self.length * other.length if nmax is None else nmax
        lo = self.start * other.start
        dtype = np.result_type(self.values.dtype, other.values.dtype)
        out = np.zeros(max(top - lo + 1, 0), dtype=dtype)
        b_n = other.support()
        for a_n, a_v in zip(self.support().tolist(), self.values.tolist()):
            if a_v == 0 or a_n * other.start > top:
                continue
            k = min(len(b_n), (top // a_n) - other.start + 1)
            out[a_n * b_n[:k] - lo] += a_v * other.values[:k]
        bound = (self.bound[0] + other.bound[0], self.bound[1] + other.bound[1])
        return CoeffSequence(lo, out, bound, check=False) if len(out) else CoeffSequence(
            lo, np.zeros(1), bound, check=False
        )

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "value"])
            for n, v in zip(self.support().tolist(), self.values.tolist()):
                w.writerow([n, repr(float(np.real(v)))])

    @classmethod
    def read_csv(cls, path, bound=(1, 0)) -> "CoeffSequence":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        ns = [int(r["n"]) for r in rows]
        if ns != list(range(ns[0], ns[0] + len(ns))):
            raise ValueError("coefficient CSV must list consecutive n")
        return cls(ns[0], np.array([float(r["value"]) for r in rows]), bound)


# --- evaluation ----------------------------------------------------------


def poly_eval(coeffs: CoeffSequence, chi: DirichletCharacter, t: float, sigma: float = 0.5) -> complex:
    """``sum_n a_n chi(n) n^(-sigma-it)`` with compensated summation.

    ``sigma = 1/2`` is the large-value normalization; ``sigma = 0`` is the one
    used by the mean-value inequality.
    """
    ns = coeffs.support()
    terms = coeffs.values * chi(ns) * np.exp(-(sigma + 1j * t) * np.log(ns))
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def _row_chunk(n_cols: int, budget: int = 1 << 22) -> int:
    return max(1, budget // max(n_cols, 1))


def poly_eval_grid(coeffs: CoeffSequence, chi: DirichletCharacter, ts, sigma: float = 0.5) -> np.ndarray:
    """Values on many ordinates at once (plain BLAS summation)."""
    ts = np.asarray(ts, dtype=np.float64)
    ns = coeffs.support()
    logs = np.log(ns.astype(np.float64))
    b = coeffs.values * chi(ns) * np.exp(-sigma * logs)
    out = np.empty(len(ts), dtype=np.complex128)
    step = _row_chunk(len(ns))
    for i in range(0, len(ts), step):
        out[i : i + step] = np.exp(-1j * np.outer(ts[i : i + step], logs)) @ b
    return out


# --- mean values ---------------------------------------------------------


def primitive_family(Q: int, lo: int = 1) -> list[DirichletCharacter]:
    """Primitive characters with ``lo <= q <= Q``, ordered by (q, label)."""
    return [chi for q in range(lo, Q + 1) for chi in primitive_characters(q)]


def default_step(N: int) -> float:
    """Trapezoid step ``min(0.05, 1/(4 log N))`` for an integrand of bandwidth ``log N``."""
    return 0.05 if N < 3 else min(0.05, 1.0 / (4.0 * math.log(N)))


def _trapezoid_nodes(T: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    m = max(1, math.ceil(2 * T / step))
    ts = np.linspace(-T, T, m + 1)
    w = np.full(m + 1, 2 * T / m)
    w[0] = w[-1] = T / m
    return ts, w


def mean_value_integrals(coeff_list: Sequence[CoeffSequence], Q: int, T: float,
                         step: float | None = None, sigma: float = 0.0) -> np.ndarray:
    """``sum_{q<=Q} sum*_chi int_{-T}^{T} |sum_n a_n chi(n) n^(-sigma-it)|^2 dt`` per sequence.

    All sequences share a support, so the phase matrix ``n^(-it)`` is built once
    per chunk of ordinates and applied to every (sequence, character) column.
    """
    if Q < 1 or T <= 0:
        raise ValueError(f"need Q >= 1 and T > 0, got Q={Q}, T={T}")
    first = coeff_list[0]
    ns = first.support()
    for c in coeff_list[1:]:
        if c.start != first.start or len(c) != len(first):
            raise ValueError("mean_value_integrals needs sequences with a common support")
    family = primitive_family(Q)
    logs = np.log(ns.astype(np.float64))
    damp = np.exp(-sigma * logs)
    chis = np.stack([chi(ns) for chi in family], axis=1)  # (n, chars)
    cols = np.concatenate([(c.values * damp)[:, None] * chis for c in coeff_list], axis=1)
    ts, w = _trapezoid_nodes(T, step or default_step(first.length))
    acc = np.zeros(cols.shape[1])
    rows = _row_chunk(len(ns))
    for i in range(0, len(ts), rows):
        vals = np.exp(-1j * np.outer(ts[i : i + rows], logs)) @ cols
        acc += w[i : i + rows] @ (vals.real**2 + vals.imag**2)
    return acc.reshape(len(coeff_list), len(family)).sum(axis=1)


def mean_value_exact(coeffs: CoeffSequence, chi: DirichletCharacter, T: float, sigma: float = 0.0) -> float:
    """Closed form of ``int_{-T}^{T} |sum a_n chi(n) n^(-sigma-it)|^2 dt``."""
    ns = coeffs.support()
    b = coeffs.values * chi(ns) * np.exp(-sigma * np.log(ns.astype(np.float64)))
    logs = np.log(ns.astype(np.float64))
    diff = logs[None, :] - logs[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        kern = np.where(diff == 0, 2 * T, 2 * np.sin(T * diff) / diff)
    return float(np.real(b @ kern @ np.conj(b)))


def mean_value_ratios(coeff_list: Sequence[CoeffSequence], Q: int, T: float,
                      step: float | None = None, sigma: float = 0.0) -> np.ndarray:
    lhs = mean_value_integrals(coeff_list, Q, T, step, sigma)
    N = coeff_list[0].length
    norms = np.array([c.l2() for c in coeff_list])
    return lhs / ((Q * Q * T + N) * norms)


def mean_value_ratio(coeffs: CoeffSequence, Q: int, T: float, step: float | None = None,
                     sigma: float = 0.0) -> float:
    """``LHS / ((Q^2 T + N) sum |a_n|^2)`` for the hybrid mean value."""
    return float(mean_value_ratios([coeffs], Q, T, step, sigma)[0])


# --- large values --------------------------------------------------------


@dataclass(frozen=True)
class LargePoint:
    t: float
    key: str
    magnitudes: tuple[float, ...]

    @property
    def modulus(self) -> int:
        return int(self.key.split(".")[0])


@dataclass(frozen=True)
class LargeValueSet:
    """Points ``(t, chi)`` with ``U_j <= |F_j(1/2+it, chi)| + 1 <= 2 U_j`` for all j."""

    points: tuple[LargePoint, ...]
    U: tuple[float, ...]
    T: float
    parity: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def is_well_spaced(self) -> bool:
        by_key: dict[str, list[float]] = {}
        for p in self.points:
            by_key.setdefault(p.key, []).append(p.t)
        for ts in by_key.values():
            ts.sort()
            if any(b - a < 1 for a, b in zip(ts, ts[1:])):
                return False
        return True

    def satisfies_thresholds(self) -> bool:
        return all(
            u <= m + 1 <= 2 * u for p in self.points for m, u in zip(p.magnitudes, self.U)
        )

    def write_csv(self, path, mode: str = "w") -> None:
        with open(path, mode, newline="") as fh:
            w = csv.writer(fh)
            if mode == "w":
                w.writerow(["q", "label", "t"] + [f"abs_F{j + 1}" for j in range(len(self.U))] + ["parity_class"])
            for p in self.points:
                q, label = p.key.split(".")
                w.writerow([q, label, repr(p.t)] + [repr(m) for m in p.magnitudes] + [self.parity])


def _membership(mags: np.ndarray, U: np.ndarray) -> np.ndarray:
    """mags has shape (factors, points)."""
    plus = mags + 1
    return np.all((plus >= U[:, None]) & (plus <= 2 * U[:, None]), axis=0)


def extract_large_values(factor_polys: Sequence[CoeffSequence], characters: Iterable[DirichletCharacter],
                         T: float, U: Sequence[float], grid_step: float = 0.1,
                         refine: int = 4) -> tuple[LargeValueSet, LargeValueSet]:
    """Well-spaced large-value sets from a grid scan of ``t`` in ``[-2T, 2T)``.

    Grid points satisfying every threshold are members; between a member and a
    non-member neighbour ``refine`` extra ordinates are tried.  Each unit cell
    ``[n, n+1)`` meeting the member set contributes its member of largest
    ``prod |F_j|``.  Occupied cells are numbered 1, 2, ... per character; odd
    numbers go to the first set and even numbers to the second, so retained
    ordinates of one character lie at least one apart.
    """
    characters = list(characters)
    if not characters:
        raise ValueError("extract_large_values needs a nonempty character family")
    if grid_step > 0.25:
        raise ValueError(f"grid_step must be <= 1/4, got {grid_step}")
    if len(U) != len(factor_polys):
        raise ValueError("need one threshold per factor polynomial")
    Uarr = np.asarray(U, dtype=np.float64)
    count = math.ceil(4 * T / grid_step)
    grid = -2 * T + grid_step * np.arange(count)
    grid = grid[grid < 2 * T]
    sets: tuple[list[LargePoint], list[LargePoint]] = ([], [])
    for chi in characters:
        mags = np.abs(np.stack([poly_eval_grid(f, chi, grid) for f in factor_polys]))
        member = _membership(mags, Uarr)
        ts, ms = [grid[member]], [mags[:, member]]
        if refine:
            edges = np.flatnonzero(member[:-1] != member[1:])
            if len(edges):
                frac = np.arange(1, refine + 1) / (refine + 1)
                extra = (grid[edges][:, None] + grid_step * frac[None, :]).ravel()
                emags = np.abs(np.stack([poly_eval_grid(f, chi, extra) for f in factor_polys]))
                ok = _membership(emags, Uarr)
                ts.append(extra[ok])
                ms.append(emags[:, ok])
        t_all = np.concatenate(ts)
        m_all = np.concatenate(ms, axis=1)
        if len(t_all) == 0:
            continue
        cells = np.floor(t_all).astype(np.int64)
        score = np.prod(m_all, axis=0)
        best: dict[int, int] = {}
        for i, (c, sc) in enumerate(zip(cells.tolist(), score.tolist())):
            j = best.get(c)
            if j is None or sc > score[j]:
                best[c] = i
        for idx, c in enumerate(sorted(best), start=1):
            i = best[c]
            point = LargePoint(float(t_all[i]), chi.key, tuple(float(x) for x in m_all[:, i]))
            sets[0 if idx % 2 else 1].append(point)
    U_t = tuple(float(u) for u in U)
    return LargeValueSet(tuple(sets[0]), U_t, T, 0), LargeValueSet(tuple(sets[1]), U_t, T, 1)


def large_value_bound(N: float, H: float, U: float, m: int, r: int) -> float:
    """``min{(N+H)/U^2, N/U^2 + N H/U^6} (log 2N)^(3m^2+6r+18)``."""
    if U < 1:
        raise ValueError(f"need U >= 1, got {U}")
    core = min((N + H) / U**2, N / U**2 + N * H / U**6)
    return core * math.log(2 * N) ** (3 * m * m + 6 * r + 18)


def large_value_bound_check(set_size: int, N: float, H: float, U: float, m: int, r: int) -> float:
    """Observed set size divided by the large-value bound."""
    if set_size == 0:
        return 0.0
    return set_size / large_value_bound(N, H, U, m, r)
