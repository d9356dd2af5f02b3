"""Heath-Brown's decomposition of Lambda, the smooth dyadic window, and block coefficients.

The window starts from a bump ``gt`` on ``[1, 2]`` normalized so that
``int gt(u) du/u = 1`` and sets ``g(x) = int_1^2 gt(x/u) du/u``.  Substituting
``v = x/u`` gives ``g(x) = int_{x/2}^{x} gt(v) dv/v``, so with the cumulative
``G(w) = int_1^w gt(v) dv/v`` we have ``g = G`` on ``[1, 2]`` and
``g(x) = 1 - G(x/2)`` on ``[2, 4]``.  The dyadic sum telescopes to ``G(2) = 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .characters import DirichletCharacter
from .dirichletpoly import CoeffSequence
from .sieve import factorize, table

QUAD_EPSABS = 1e-12
LOG2 = math.log(2.0)


class QuadratureError(RuntimeError):
    pass


class BumpKind(enum.Enum):
    """Shapes for the base bump on [1, 2]; ``t = u - 1``."""

    STANDARD = "standard"  # exp(-1/(t(1-t)))
    WIDE = "wide"  # exp(-1/(4 t(1-t))), flatter top

    @property
    def scale(self) -> float:
        return {BumpKind.STANDARD: 1.0, BumpKind.WIDE: 0.25}[self]


def _quad(f, a, b, **kw):
    res = integrate.quad(f, a, b, epsabs=kw.pop("epsabs", QUAD_EPSABS), epsrel=1e-13,
                         limit=400, full_output=1, **kw)
    if len(res) > 3:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {res[3]}")
    return res[0], res[1]


@dataclass(eq=False)
class SmoothWindow:
    """The partition-of-unity window ``g`` and its Mellin transform."""

    kind: BumpKind = BumpKind.STANDARD
    mellin_nodes: int = 1024
    norm: float = field(init=False)
    _memo: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.norm, _ = _quad(lambda v: self._raw(v) / v, 1.0, 2.0, epsabs=1e-16)

    def _raw(self, v: float) -> float:
        t = v - 1.0
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return math.exp(-self.kind.scale / (t * (1.0 - t)))

    def base(self, u: float) -> float:
        """Normalized bump ``gt(u)``, supported on [1, 2]."""
        return self._raw(u) / self.norm

    def base_mass(self) -> float:
        """``int gt(u) du/u``, recomputed from scratch; equals 1 after normalization."""
        val, _ = _quad(lambda y: self.base(math.exp(y)), 0.0, LOG2)
        return val

    def cumulative(self, w: float) -> float:
        """``G(w) = int_1^w gt(v) dv/v``."""
        if w <= 1.0:
            return 0.0
        if w >= 2.0:
            return 1.0
        hit = self._memo.get(w)
        if hit is None:
            # integrate from the nearer end of [1, 2] to keep the absolute error small
            if w <= 1.5:
                hit, _ = _quad(lambda v: self.base(v) / v, 1.0, w)
            else:
                tail, _ = _quad(lambda v: self.base(v) / v, w, 2.0)
                hit = 1.0 - tail
            self._memo[w] = hit
        return hit

    def __call__(self, x: float) -> float:
        x = float(x)
        if x <= 1.0 or x >= 4.0:
            return 0.0
        if x <= 2.0:
            return self.cumulative(x)
        return 1.0 - self.cumulative(x / 2.0)

    def values(self, xs) -> np.ndarray:
        return np.array([self(x) for x in np.asarray(xs, dtype=np.float64).ravel()])

    def mellin(self, w: complex, k: int = 0) -> complex:
        """``int_1^4 g(u) (log u)^k u^(w-1) du`` by adaptive oscillatory quadrature.

        This is the slow reference route; :meth:`mellin_grid` is the fast one.
        """
        a, b = w.real, w.imag

        def amp(y):
            return self(math.exp(y)) * y**k * math.exp(a * y)

        total = 0j
        for lo, hi in ((0.0, LOG2), (LOG2, 2 * LOG2)):
            if b == 0:
                re, _ = _quad(amp, lo, hi)
                im = 0.0
            else:
                re, _ = _quad(amp, lo, hi, weight="cos", wvar=b)
                im, _ = _quad(amp, lo, hi, weight="sin", wvar=b)
            total += complex(re, im)
        return total

    def _base_nodes(self):
        if "nodes" in self._memo:
            return self._memo["nodes"]
        y = np.linspace(0.0, LOG2, self.mellin_nodes + 1)
        t = np.expm1(y)
        f = np.zeros_like(y)
        inside = (t > 0) & (t < 1)
        f[inside] = np.exp(-self.kind.scale / (t[inside] * (1 - t[inside]))) / self.norm
        self._memo["nodes"] = (y, f, LOG2 / self.mellin_nodes)
        return self._memo["nodes"]

    def mellin_grid(self, ws, k: int = 0) -> np.ndarray:
        """Mellin transform of ``g (log)^k`` on many points at once.

        Uses ``ghat(w) = gthat(w) (2^w - 1)/w`` where ``gthat`` is the transform of
        the bump over ``y = log v`` in ``[0, log 2]``; the integrand is smooth and
        vanishes to all orders at both ends, so the trapezoid rule is spectrally
        accurate.  Log powers follow from Leibniz on the product.
        """
        ws = np.asarray(ws, dtype=np.complex128)
        y, f, step = self._base_nodes()
        base = [np.empty(len(ws), dtype=np.complex128) for _ in range(k + 1)]
        chunk = 1024
        for i in range(0, len(ws), chunk):
            e = np.exp(np.outer(ws[i : i + chunk], y))
            for j in range(k + 1):
                base[j][i : i + chunk] = (e @ (f * y**j)) * step
        out = np.zeros(len(ws), dtype=np.complex128)
        for j, pj in enumerate(_box_moments(ws, k)):
            # d^j/dw^j of (2^w - 1)/w pairs with d^(k-j) of the bump transform
            out += math.comb(k, j) * pj * base[k - j]
        return out


def _box_moments(ws: np.ndarray, k: int) -> list[np.ndarray]:
    """``P_j(w) = int_0^{log 2} y^j e^(wy) dy`` for ``j = 0..k``.

    Closed-form recursion for ``|w| >= 2`` (stable there); the power series
    ``sum_m w^m/m! (log 2)^(j+m+1)/(j+m+1)`` near 0, where the recursion cancels.
    """
    small = np.abs(ws) < 2
    safe = np.where(small, 1.0, ws)
    two_w = np.exp(safe * LOG2)
    out = [(two_w - 1) / safe]
    for j in range(1, k + 1):
        out.append((LOG2**j * two_w - j * out[-1]) / safe)
    if small.any():
        w = ws[small]
        for j in range(k + 1):
            acc = np.zeros(len(w), dtype=np.complex128)
            power = np.ones(len(w), dtype=np.complex128)
            for m in range(40):
                acc += power * LOG2 ** (j + m + 1) / (j + m + 1)
                power = power * w / (m + 1)
            out[j][small] = acc
    return out


@lru_cache(maxsize=4)
def make_smooth_window(bump_kind: BumpKind | str = BumpKind.STANDARD) -> SmoothWindow:
    return SmoothWindow(BumpKind(bump_kind))


def dyadic_terms(x: float) -> list[int]:
    """Exponents j with ``x / 2^j`` in ``[1, 4]``."""
    if x <= 0:
        raise ValueError(f"need x > 0, got {x}")
    lo = math.floor(math.log2(x)) - 2
    return [j for j in range(lo, lo + 4) if 1.0 <= x / 2.0**j <= 4.0]


def partition_check(window: SmoothWindow, x: float) -> float:
    """``sum_j g(x / 2^j)``; identically 1 for x >= 1."""
    return math.fsum(window(x / 2.0**j) for j in dyadic_terms(x))


# --- Heath-Brown ---------------------------------------------------------


@dataclass(frozen=True)
class HBTerm:
    k: int
    sign: int
    binom: int
    roles: tuple[str, ...]


@dataclass(frozen=True)
class HBDecomposition:
    """``Lambda = sum_k (-1)^(k-1) C(k0, k) log * 1^(k-1) * mu_z^k`` on ``n <= 4 x_cap``."""

    k0: int
    x_cap: float
    z: float
    z_int: int
    terms: tuple[HBTerm, ...]


def heath_brown(k0: int, x_cap: float) -> HBDecomposition:
    if k0 not in (1, 2, 3, 4):
        raise ValueError(f"k0 must be in 1..4, got {k0}")
    if x_cap < 0.25:
        raise ValueError(f"x_cap must be >= 1/4, got {x_cap}")
    z = (4.0 * x_cap) ** (1.0 / k0)
    z_int = int(z) + 1
    while z_int**k0 > 4 * x_cap:
        z_int -= 1
    terms = tuple(
        HBTerm(k, (-1) ** (k - 1), math.comb(k0, k), ("log",) + ("one",) * (k - 1) + ("mu",) * k)
        for k in range(1, k0 + 1)
    )
    return HBDecomposition(k0, float(x_cap), z, z_int, terms)


@lru_cache(maxsize=4096)
def _divisors(n: int) -> tuple[int, ...]:
    divs = [1]
    for p, e in factorize(n) if n > 1 else []:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return tuple(sorted(divs))


def _mobius(n: int) -> int:
    fac = factorize(n) if n > 1 else []
    return 0 if any(e > 1 for _, e in fac) else (-1) ** len(fac)


def heath_brown_lambda(n: int, k0: int, x_cap: float) -> float:
    """Evaluate the decomposition at a single n by descent over its divisor lattice.

    The integer parts ``1^(k-1) * mu_z^k`` are summed exactly first; only the
    final pairing with ``log`` is done in floating point.
    """
    dec = heath_brown(k0, x_cap)
    if not 1 <= n <= 4 * x_cap:
        raise ValueError(f"need 1 <= n <= 4 x_cap = {4 * x_cap}, got {n}")
    divs = _divisors(n)
    index = {d: i for i, d in enumerate(divs)}
    sub = [[e for e in divs if d % e == 0] for d in divs]
    mu_z = {d: (_mobius(d) if d <= dec.z_int else 0) for d in divs}

    def convolve(vec, f):
        return [sum(vec[index[e]] * f(d // e) for e in sub[i] if vec[index[e]]) for i, d in enumerate(divs)]

    weight = [0] * len(divs)
    cur = [1 if d == 1 else 0 for d in divs]  # delta
    for term in dec.terms:
        # cur = 1^(k-1) * mu_z^k, built incrementally from the previous k
        if term.k > 1:
            cur = convolve(cur, lambda m: 1)
        cur = convolve(cur, lambda m: mu_z[m])
        for i, v in enumerate(cur):
            weight[i] += term.sign * term.binom * v
    return math.fsum(math.log(n // d) * w for d, w in zip(divs, weight) if w and d < n)


def dirichlet_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``(a * b)[n]`` for ``n < len(a)``; loops over the sparser factor."""
    nmax = len(a) - 1
    if np.count_nonzero(a[1:]) > np.count_nonzero(b[1:]):
        a, b = b, a
    out = np.zeros(nmax + 1, dtype=np.result_type(a, b))
    for d in np.flatnonzero(a).tolist():
        if d == 0:
            continue
        top = nmax // d
        out[d :: d] += a[d] * b[1 : top + 1]
    return out


def heath_brown_weights(nmax: int, k0: int, x_cap: float | None = None) -> np.ndarray:
    """Integer array ``W = sum_k (-1)^(k-1) C(k0,k) 1^(k-1) * mu_z^k`` on ``[0, nmax]``."""
    x_cap = nmax / 4.0 if x_cap is None else x_cap
    dec = heath_brown(k0, x_cap)
    mu = table(nmax + 1).mu[: nmax + 1].astype(np.int64)
    mu_z = np.zeros(nmax + 1, dtype=np.int64)
    mu_z[: min(dec.z_int, nmax) + 1] = mu[: min(dec.z_int, nmax) + 1]
    ones = np.ones(nmax + 1, dtype=np.int64)
    ones[0] = 0
    weight = np.zeros(nmax + 1, dtype=np.int64)
    cur = np.zeros(nmax + 1, dtype=np.int64)
    cur[1] = 1
    for term in dec.terms:
        if term.k > 1:
            cur = dirichlet_convolve(cur, ones)
        cur = dirichlet_convolve(cur, mu_z)
        weight += term.sign * term.binom * cur
    return weight


def heath_brown_table(nmax: int, k0: int, x_cap: float | None = None) -> np.ndarray:
    """The decomposition evaluated at every ``n <= nmax`` (index 0 holds 0)."""
    weight = heath_brown_weights(nmax, k0, x_cap)
    logs = np.zeros(nmax + 1)
    logs[1:] = np.log(np.arange(1, nmax + 1, dtype=np.float64))
    return dirichlet_convolve(weight.astype(np.float64), logs)


# --- coefficient blocks --------------------------------------------------


class Role(enum.Enum):
    LOG_WINDOW = "log_window"
    WINDOW = "window"
    MOEBIUS_BLOCK = "moebius_block"


def build_coefficients(role: Role | str, N: float, window: SmoothWindow,
                       cap: float | None = None) -> CoeffSequence:
    """One block ``f_j``: ``g(n/N) log n``, ``g(n/N)`` or ``1_(N,2N](n) mu(n)``.

    ``cap`` truncates Moebius blocks at the Heath-Brown cutoff z.
    """
    role = Role(role)
    if N < 0.25:
        raise ValueError(f"need N >= 1/4, got {N}")
    if role is Role.MOEBIUS_BLOCK:
        lo = math.floor(N) + 1
        hi = math.floor(2 * N)
        if cap is not None:
            hi = min(hi, math.floor(cap))
        if hi < lo:
            return CoeffSequence(max(lo, 1), np.zeros(0), (1, 0), f"mu N={N}", check=False)
        mu = table(hi + 1).mu[lo : hi + 1].astype(np.float64)
        return CoeffSequence(lo, mu, (1, 0), f"mu N={N}")
    lo = max(math.ceil(N), 1)
    hi = math.floor(4 * N)
    ns = np.arange(lo, hi + 1)
    vals = window.values(ns / N)
    if role is Role.LOG_WINDOW:
        return CoeffSequence(lo, vals * np.log(ns), (1, 1), f"glog N={N}")
    return CoeffSequence(lo, vals, (1, 0), f"g N={N}")


def dyadic_grid(lo: float, hi: float) -> list[float]:
    """``N = 2^j / 4`` (j >= 0) with ``lo <= 4N`` and ``N <= hi``."""
    out = []
    j = 0
    while 2.0**j / 4 <= hi:
        N = 2.0**j / 4
        if 4 * N >= lo:
            out.append(N)
        j += 1
    return out


def _role_blocks(role: str, last: int, window: SmoothWindow, z_int: int):
    """Nonempty blocks for one factor: list of (N, start, dense values)."""
    blocks = []
    if role == "mu":
        for N in dyadic_grid(1, z_int):
            c = build_coefficients(Role.MOEBIUS_BLOCK, N, window, cap=z_int)
            if len(c) and c.start <= last:
                blocks.append((N, c.start, c.values[: last - c.start + 1]))
        return blocks
    r = Role.LOG_WINDOW if role == "log" else Role.WINDOW
    for N in dyadic_grid(1, last):
        c = build_coefficients(r, N, window)
        if len(c) and c.start <= last:
            blocks.append((N, c.start, c.values[: last - c.start + 1]))
    return blocks


def _sparse_convolve(left: dict[int, float], start: int, vals: np.ndarray, last: int) -> dict[int, float]:
    out: dict[int, float] = {}
    idx = np.arange(start, start + len(vals))
    nz = vals != 0
    idx, vals = idx[nz], vals[nz]
    for a, va in left.items():
        k = np.searchsorted(idx, last // a, side="right")
        for b, vb in zip(idx[:k].tolist(), vals[:k].tolist()):
            out[a * b] = out.get(a * b, 0.0) + va * vb
    return out


def hb_block_sum(y: float, h: float, chi: DirichletCharacter, k0: int,
                 window: SmoothWindow, x_cap: float | None = None,
                 aggregate: bool = False) -> complex:
    """Rebuild ``sum_{y<n<=y+h} Lambda(n) chi(n)`` from dyadic coefficient blocks.

    Every factor of every Heath-Brown term is split over the dyadic grid (smooth
    blocks via the partition of unity, Moebius factors into ``(N, 2N]`` blocks)
    and each product of blocks contributes ``S(y, h; f chi)``.  Tuples whose
    support cannot meet the window are skipped.  With ``aggregate`` the blocks of
    each factor are summed before convolving, which tests the same split far
    faster.
    """
    from .sieve import window as half_open

    first, last = half_open(y, h)
    if last < first:
        return 0j
    x_cap = last / 4.0 if x_cap is None else x_cap
    dec = heath_brown(k0, x_cap)
    chi_vals = chi(np.arange(first, last + 1))
    blocks = {role: _role_blocks(role, last, window, dec.z_int) for role in ("log", "one", "mu")}
    total = 0j
    for term in dec.terms:
        roles = term.roles
        if aggregate:
            dense = np.zeros(last + 1)
            dense[1] = 1.0
            for role in roles:
                f = np.zeros(last + 1)
                for _, start, vals in blocks[role]:
                    f[start : start + len(vals)] += vals
                dense = dirichlet_convolve(dense, f)
            piece = complex(np.dot(dense[first : last + 1], chi_vals))
            total += term.sign * term.binom * piece
            continue
        # lower/upper support bounds per block, for pruning
        ranges = {
            role: [(b[1], b[1] + len(b[2]) - 1) for b in blocks[role]] for role in set(roles)
        }

        def descend(i, acc, lo_prod, hi_prod):
            nonlocal total
            if i == len(roles):
                s = math.fsum(
                    (v * chi_vals[n - first]).real for n, v in acc.items() if n >= first
                ) + 1j * math.fsum(
                    (v * chi_vals[n - first]).imag for n, v in acc.items() if n >= first
                )
                total += term.sign * term.binom * s
                return
            rest_hi = 1
            for role in roles[i + 1 :]:
                rest_hi *= max(r[1] for r in ranges[role]) if ranges[role] else 0
            for (_, start, vals), (blo, bhi) in zip(blocks[roles[i]], ranges[roles[i]]):
                if lo_prod * blo > last or hi_prod * bhi * rest_hi < first:
                    continue
                nxt = _sparse_convolve(acc, start, vals, last)
                if nxt:
                    descend(i + 1, nxt, lo_prod * blo, hi_prod * bhi)

        descend(0, {1: 1.0}, 1, 1)
    return total
