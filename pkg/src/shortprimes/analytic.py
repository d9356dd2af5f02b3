"""Gamma factors, root numbers, Dirichlet L-values and the smoothed-sum transformation.

For a primitive character chi mod q with parity a the functional equation is

    L(1 - s, chi) = (2 eps / sqrt(q)) (q / 2 pi)^s gamma(s, a) L(s, conj chi),
    gamma(s, a) = Gamma(s) cos(pi (s - a) / 2),   eps = tau(chi) / (i^a sqrt(q)).

Feeding it into Mellin inversion of a smoothed sum of length N gives the
transformed expression of :func:`afe_transformed_sum`, a sum over n of contour
integrals on Re s = 5/4 weighted by ``(q / 2 pi n N)^s``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate, special

from .characters import DirichletCharacter, gauss_sum
from .dirichletpoly import CoeffSequence
from .identities import QuadratureError, SmoothWindow, make_smooth_window

BERNOULLI_TERMS = 12
SHIFT_MIN = 20
CONTOUR_RE = 1.25
CONTOUR_STEP = 0.05
CONTOUR_HALF_WIDTH = 800.0
CONTOUR_TAIL = 1e-12
TERM_TOL = 1e-13


# --- gamma factor ---------------------------------------------------------


@dataclass(frozen=True)
class GammaFactorSpec:
    """``gamma(s) = Gamma(s) cos(pi (s - a)/2)`` for parity a."""

    parity: int

    def __post_init__(self):
        if self.parity not in (0, 1):
            raise ValueError(f"parity must be 0 or 1, got {self.parity}")

    def __call__(self, s: complex) -> complex:
        return gamma_factor(s, self.parity)


def gamma_factor(s: complex, a: int, dps: int = 30) -> complex:
    """``Gamma(s) cos(pi (s - a)/2)`` in extended precision.

    At ``s = -m`` the cosine vanishes when ``m + a`` is odd and the product has
    the finite limit ``(-1)^m / m! * (-pi/2) sin(pi (-m - a)/2)``; otherwise
    ``s = -m`` is a genuine pole and raises.
    """
    if a not in (0, 1):
        raise ValueError(f"parity must be 0 or 1, got {a}")
    s = complex(s)
    if s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real):
        m = int(-s.real)
        if (m + a) % 2 == 0:
            raise ZeroDivisionError(f"gamma factor has a pole at s = {-m} for parity {a}")
        return complex((-1) ** m / math.factorial(m) * (-math.pi / 2) * math.sin(math.pi * (-m - a) / 2))
    with mpmath.workdps(dps):
        ms = mpmath.mpc(s.real, s.imag)
        val = mpmath.gamma(ms) * mpmath.cos(mpmath.pi * (ms - a) / 2)
        return complex(val)


def _log_cos(z: np.ndarray) -> np.ndarray:
    """``log cos z`` without overflow for large ``|Im z|``."""
    out = np.empty_like(z)
    up = z.imag > 0
    zu, zd = z[up], z[~up]
    out[up] = -1j * zu + np.log1p(np.exp(2j * zu)) - math.log(2)
    out[~up] = 1j * zd + np.log1p(np.exp(-2j * zd)) - math.log(2)
    return out


def gamma_factor_grid(s: np.ndarray, a: int) -> np.ndarray:
    """Vectorized gamma factor via log-gamma; for Re s > 0 away from the real axis poles."""
    s = np.asarray(s, dtype=np.complex128)
    return np.exp(special.loggamma(s) + _log_cos(np.pi * (s - a) / 2))


# --- root numbers and L-values ---------------------------------------------


def root_number(chi: DirichletCharacter) -> complex:
    """``eps = tau(chi) / (i^a sqrt(q))``; 1 for the modulus-1 character."""
    if not chi.is_primitive:
        raise ValueError(f"root_number needs a primitive character, {chi.key} has conductor {chi.conductor}")
    if chi.modulus == 1:
        return 1 + 0j
    return gauss_sum(chi) / (1j**chi.parity * math.sqrt(chi.modulus))


@lru_cache(maxsize=1)
def _bernoulli_coeffs() -> tuple[float, ...]:
    """``B_{2j} / (2j)!`` for ``j = 1..BERNOULLI_TERMS``."""
    return tuple(
        float(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j)) for j in range(1, BERNOULLI_TERMS + 1)
    )


def hurwitz_zeta(s: complex, a: float, drop_pole: bool = False) -> complex:
    """``zeta(s, a)`` for ``0 < a <= 1`` by Euler-Maclaurin.

    The sum is shifted by ``K = max(20, ceil|s|)`` terms before the Bernoulli
    tail.  With ``drop_pole`` the ``(a+K)^(1-s)/(s-1)`` term is replaced by its
    finite part (``-log(a+K)`` at s = 1), for sums over a in which the pole
    residues cancel.
    """
    s = complex(s)
    K = max(SHIFT_MIN, math.ceil(abs(s)))
    ks = a + np.arange(K, dtype=np.float64)
    head = np.exp(-s * np.log(ks))
    total = complex(math.fsum(head.real), math.fsum(head.imag))
    b = a + K
    lb = math.log(b)
    if s == 1:
        if not drop_pole:
            raise ZeroDivisionError("zeta(s, a) has a pole at s = 1")
        total += -lb
    else:
        total += cmath.exp((1 - s) * lb) / (s - 1)
    total += 0.5 * cmath.exp(-s * lb)
    # B_{2j}/(2j)! * s(s+1)...(s+2j-2) b^(-s-2j+1)
    rising = s
    power = cmath.exp(-(s + 1) * lb)
    for j, coef in enumerate(_bernoulli_coeffs(), start=1):
        total += coef * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        power /= b * b
    return total


def l_value(s: complex, chi: DirichletCharacter) -> complex:
    """``L(s, chi) = q^(-s) sum_a chi(a) zeta(s, a/q)``."""
    s = complex(s)
    q = chi.modulus
    if s == 1 and chi.is_principal:
        raise ZeroDivisionError("L(s, chi) has a pole at s = 1 for principal chi")
    vals = chi.values()
    total = 0j
    parts = []
    for r in range(1, q + 1):
        v = complex(vals[r % q])
        if v != 0:
            parts.append(v * hurwitz_zeta(s, r / q, drop_pole=True))
    total = complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
    return cmath.exp(-s * math.log(q)) * total


def functional_equation_residual(chi: DirichletCharacter, s: complex) -> float:
    """``|L(1-s, chi) - (2 eps/sqrt q)(q/2pi)^s gamma(s, a) L(s, conj chi)|``."""
    q = chi.modulus
    lhs = l_value(1 - s, chi)
    rhs = (2 * root_number(chi) / math.sqrt(q)) * cmath.exp(s * math.log(q / (2 * math.pi)))
    rhs *= gamma_factor(s, chi.parity) * l_value(s, chi.conj())
    return abs(lhs - rhs)


# --- smoothed sums and their transformation ---------------------------------


@dataclass(frozen=True)
class AFEInstance:
    """One smoothed sum ``sum_n g(n/N) chi(n) (log n)^r n^(-1/2-it)``."""

    character: DirichletCharacter
    N: float
    t: float = 0.0
    r: int = 0
    window: SmoothWindow = field(default_factory=make_smooth_window, compare=False)
    delta: float = 0.1
    T: float | None = None

    def __post_init__(self):
        if not self.character.is_primitive:
            raise ValueError(f"AFE needs a primitive character, got {self.character.key}")
        if self.r < 0:
            raise ValueError(f"log power r must be >= 0, got {self.r}")
        if self.T is not None and abs(self.t) > self.T:
            raise ValueError(f"|t| = {abs(self.t)} exceeds T = {self.T}")

    @property
    def s0(self) -> complex:
        return complex(0.5, self.t)

    @property
    def height(self) -> float:
        return self.T if self.T is not None else max(abs(self.t), 1.0)

    @property
    def M(self) -> float:
        """Length of the dual sum, ``max(1, (qT/N)^(1+delta))``."""
        return max(1.0, (self.character.modulus * self.height / self.N) ** (1 + self.delta))


def _weighted_sum(inst: AFEInstance, weight) -> complex:
    N = inst.N
    if 4 * N < 1:
        return 0j
    ns = np.arange(max(math.ceil(N), 1), math.floor(4 * N) + 1)
    if len(ns) == 0:
        return 0j
    terms = inst.window.values(ns / N) * weight(ns) * inst.character(ns)
    terms = terms * np.exp(-inst.s0 * np.log(ns))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def afe_smoothed_sum(inst: AFEInstance) -> complex:
    """The finite sum over the support ``[N, 4N]``, term by term."""
    return _weighted_sum(inst, lambda ns: np.log(ns) ** inst.r)


def afe_smoothed_sum_split(inst: AFEInstance) -> complex:
    """Same sum via ``(log n)^r = sum_j C(r,j) (log N)^j log(n/N)^(r-j)``."""
    L = math.log(inst.N) if inst.N > 0 else 0.0
    total = 0j
    for j in range(inst.r + 1):
        total += math.comb(inst.r, j) * L**j * _weighted_sum(inst, lambda ns, k=inst.r - j: np.log(ns / inst.N) ** k)
    return total


def afe_tail_bound(q: int, T: float, n: int, N: float, A: float) -> float:
    """Per-term size ``(qT/(nN))^A / sqrt(T)`` after shifting to Re s = A."""
    return (q * T / (n * N)) ** A / math.sqrt(T)


@dataclass(frozen=True)
class ContourConfig:
    re: float = CONTOUR_RE
    step: float = CONTOUR_STEP
    half_width: float = CONTOUR_HALF_WIDTH
    term_tol: float = TERM_TOL
    chunk: int = 64
    max_terms: int = 4096


_LINE_CACHE: dict = {}


def _mellin_line(window: SmoothWindow, V: float, step: float, re: float, k: int):
    """Grid ``v`` and ``ghat_k(1/2 - re - iv)``, cached per window and grid."""
    key = (id(window), V, step, re, k)
    hit = _LINE_CACHE.get(key)
    if hit is None or hit[0] is not window:
        v = np.arange(-V, V + step / 2, step)
        hit = (window, v, window.mellin_grid(0.5 - re - 1j * v, k))
        if len(_LINE_CACHE) > 32:
            _LINE_CACHE.clear()
        _LINE_CACHE[key] = hit
    return hit[1], hit[2]


@lru_cache(maxsize=256)
def _dual_terms(window: SmoothWindow, q: int, a: int, N: float, t: float, k: int,
                cfg: ContourConfig) -> np.ndarray:
    """``I_n = step * sum_v (q/(2 pi n N))^s gamma(s, a) ghat_k(1/2 - s - it)`` for n = 1, 2, ...

    These depend on the character only through its parity, so they are shared
    by every character of a modulus.
    """
    V = cfg.half_width + math.ceil(abs(t))
    v, gh = _mellin_line(window, V, cfg.step, cfg.re, k)
    s = cfg.re + 1j * (v - t)
    kernel = gamma_factor_grid(s, a) * gh
    edge = max(abs(kernel[0]), abs(kernel[-1]))
    if edge > CONTOUR_TAIL * np.abs(kernel).max():
        raise QuadratureError(f"contour integrand not negligible at |Im s| = {V}: {edge:.3g}")
    chunks = []
    used = 0
    while True:
        ns = np.arange(used + 1, used + cfg.chunk + 1)
        X = np.log(q / (2 * math.pi * ns * N))
        terms = (np.exp(np.outer(X, s)) @ kernel) * cfg.step
        chunks.append(terms)
        used += cfg.chunk
        tail = np.abs(terms[-cfg.chunk // 4 :]).max()
        if tail < cfg.term_tol:
            break
        if used >= cfg.max_terms:
            raise QuadratureError(f"dual sum not converged after {used} terms (tail {tail:.3g})")
    out = np.concatenate(chunks)
    out.setflags(write=False)
    return out


def _transformed_piece(inst: AFEInstance, k: int, cfg: ContourConfig) -> tuple[complex, int]:
    """Transform of the sum with weight ``g(u) (log u)^k``; returns (value, terms used)."""
    chi, N = inst.character, inst.N
    q = chi.modulus
    terms = _dual_terms(inst.window, q, chi.parity, float(N), float(inst.t), k, cfg)
    ns = np.arange(1, len(terms) + 1)
    total = np.dot(np.conj(chi.values())[ns % q], terms)
    pref = root_number(chi) * cmath.exp(np.conj(inst.s0) * math.log(N)) / (math.sqrt(q) * math.pi)
    out = pref * total
    if q == 1:
        # the zeta pole at s0 + w = 1 is crossed when the contour moves
        w = 1 - inst.s0
        out += inst.window.mellin_grid(np.array([w]), k)[0] * cmath.exp(w * math.log(N))
    return out, len(terms)


def afe_transformed_sum(inst: AFEInstance, config: ContourConfig | None = None) -> complex:
    """The smoothed sum rebuilt from the dual side of the functional equation.

    For each log power the contour integral over Re s = 5/4 is a trapezoid sum
    in Im s (the integrand is analytic and decays like ``exp(-c sqrt|v|)``, so
    the rule converges geometrically); the dual sum over n runs until its
    terms fall below the configured tolerance.
    """
    cfg = config or ContourConfig()
    if 4 * inst.N < 1:
        return 0j
    L = math.log(inst.N)
    total = 0j
    for j in range(inst.r + 1):
        piece, _ = _transformed_piece(inst, inst.r - j, cfg)
        total += math.comb(inst.r, j) * L**j * piece
    return total


def short_mean_value(chi: DirichletCharacter, M: int, t: float = 0.0) -> float:
    """``int_{-M^2}^{M^2} |sum_{n<=M} chi(n) n^(-1/2-i(u+t))|^2 du`` in closed form."""
    ns = np.arange(1, M + 1)
    b = chi(ns) * ns ** (-0.5) * np.exp(-1j * t * np.log(ns))
    U = float(M) ** 2
    diff = np.log(ns)[None, :] - np.log(ns)[:, None]  # log(n/m)
    with np.errstate(divide="ignore", invalid="ignore"):
        kern = np.where(diff == 0, 2 * U, 2 * np.sin(U * diff) / diff)
    return float(np.real(b @ kern @ np.conj(b)))


# --- Perron ------------------------------------------------------------------


@dataclass(frozen=True)
class PerronResult:
    value: complex
    error: float
    direct: complex

    @property
    def residual(self) -> float:
        return abs(self.value - self.direct)


def _perron_kernel(lam: float, T0: float) -> tuple[float, float]:
    """``(1/2pi) int_{-T0}^{T0} e^(i u lam) / (1/2 + iu) du`` and its quadrature error."""
    f_cos = lambda u: 0.5 / (0.25 + u * u)
    f_sin = lambda u: u / (0.25 + u * u)
    if lam == 0:
        c, ec = integrate.quad(f_cos, 0, T0, epsabs=1e-12, limit=400)
        return c / math.pi, ec / math.pi
    c = integrate.quad(f_cos, 0, T0, weight="cos", wvar=lam, epsabs=1e-12, limit=400, full_output=1)
    s = integrate.quad(f_sin, 0, T0, weight="sin", wvar=lam, epsabs=1e-12, limit=400, full_output=1)
    if len(c) > 3 or len(s) > 3:
        raise QuadratureError(f"Perron kernel quadrature failed at lambda = {lam}")
    return (c[0] + s[0]) / math.pi, (c[1] + s[1]) / math.pi


def perron_truncated(coeffs: CoeffSequence, chi: DirichletCharacter, z: float, T0: float) -> PerronResult:
    """``(1/2 pi i) int_{1/2-iT0}^{1/2+iT0} F(s, chi) z^s / s ds`` term by term.

    The reported error is the classical truncation bound
    ``sum_n |a_n| (z/n)^(1/2) min(1, 2/(pi T0 |log(z/n)|))`` plus half of any
    coefficient sitting exactly at ``n = z`` and the quadrature error.
    """
    if z <= 0 or T0 <= 0:
        raise ValueError(f"need z > 0 and T0 > 0, got z={z}, T0={T0}")
    vals, errs, direct = [], 0.0, []
    for n, a in zip(coeffs.support().tolist(), coeffs.values.tolist()):
        if a == 0:
            continue
        c = a * chi(n)
        if c == 0:
            continue
        lam = math.log(z / n)
        kern, qerr = _perron_kernel(lam, T0)
        amp = math.sqrt(z / n)
        vals.append(c * amp * kern)
        if n <= z:
            direct.append(c)
        if lam == 0:
            errs += abs(c) * 0.5
        else:
            errs += abs(c) * amp * min(1.0, 2.0 / (math.pi * T0 * abs(lam)))
        errs += abs(c) * amp * qerr
    value = complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))
    dsum = complex(math.fsum(v.real for v in direct), math.fsum(v.imag for v in direct))
    return PerronResult(value, errs, dsum)
