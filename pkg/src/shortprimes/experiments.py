"""Averaged prime-count errors in short progressions, run at desk scale.

The fast paths here read the shared sieve table; every sampled value can be
cross-checked against :mod:`shortprimes.oracle`, which shares no code with
them.  Theorem-shaped quantities are reported as trends, never asserted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import oracle
from .sieve import euler_phi, small_primes, table, window

KINDS = ("E", "Eprime", "Elambda")
ORACLE_TOL = 1e-9
COVER_SLACK = 1e-9
NEAR_THRESHOLD = 1e-7
SMK_LIMIT = 5 * 10**7
EXACT_LIMIT = 10**6


class ConfigError(ValueError):
    """Inconsistent or out-of-range experiment parameters."""


class HypothesisWarning(UserWarning):
    """Parameters lie outside the range the averaged bound is stated for."""


def alpha(theta: float, epsilon: float) -> float:
    """Piecewise exponent for the modulus range at interval length ``x^theta``.

    Raises:
        ConfigError: theta outside ``[1/6 + 2 epsilon, 1]``.
    """
    if 5 / 8 <= theta <= 1:
        return (1 - theta) / 3
    if 13 / 24 <= theta < 5 / 8:
        return 1 / 8
    if 1 / 2 <= theta < 13 / 24:
        return 2 / 3 - theta
    if 1 / 6 + 2 * epsilon <= theta < 1 / 2:
        return 1 / 6
    raise ConfigError(f"theta={theta} outside [1/6 + 2*epsilon, 1] with epsilon={epsilon}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters shared by the averaged-error experiments.

    Exactly one of ``theta`` (``h = x^theta``) and ``h`` must be given.
    ``theorem`` picks which modulus-range hypothesis is checked: 1 uses
    ``1 - 2/density_c``, 2 the piecewise :func:`alpha`, 3 the constant 1/15.
    """

    x: float
    theta: float | None = None
    h: float | None = None
    Q: int = 1
    A: float = 1.0
    epsilon: float = 0.05
    samples: int = 200
    seed: int = 0
    strata: int = 256
    theorem: int = 2
    density_c: float = 12 / 5

    def __post_init__(self):
        if self.theta is not None and self.h is not None:
            raise ConfigError("both 'h' and 'theta' set; give exactly one")
        if self.theta is None and self.h is None:
            raise ConfigError("one of 'h' or 'theta' is required")
        if not self.x > 1:
            raise ConfigError(f"x must exceed 1, got {self.x}")
        if not self.length > 0:
            raise ConfigError(f"interval length must be positive, got {self.length}")
        if self.Q < 1:
            raise ConfigError(f"Q must be >= 1, got {self.Q}")
        if self.samples < 0 or self.strata < 1:
            raise ConfigError(f"need samples >= 0 and strata >= 1, got {self.samples}, {self.strata}")
        if self.theorem not in (1, 2, 3):
            raise ConfigError(f"theorem must be 1, 2 or 3, got {self.theorem}")

    @property
    def length(self) -> float:
        """The interval length h."""
        return self.h if self.h is not None else self.x**self.theta

    @property
    def exponent(self) -> float:
        """theta with ``h = x^theta``."""
        return self.theta if self.theta is not None else math.log(self.h) / math.log(self.x)

    @property
    def L(self) -> float:
        return math.log(self.x)

    @property
    def eta(self) -> float:
        return self.length / (self.x * self.L ** (self.A + 1))

    @property
    def alpha(self) -> float | None:
        """Hypothesis exponent for the selected theorem, None when theta is out of range."""
        if self.theorem == 1:
            return 1 - 2 / self.density_c
        if self.theorem == 3:
            return 1 / 15
        try:
            return alpha(self.exponent, self.epsilon)
        except ConfigError:
            return None

    def beta(self, D: float) -> float:
        """``log_x(eta x / D^2)``."""
        return math.log(self.eta * self.x / D**2) / self.L

    def hypothesis_holds(self) -> bool:
        a = self.alpha
        return a is not None and self.Q**2 <= self.length / self.x ** (a + self.epsilon)

    def as_dict(self) -> dict:
        out = asdict(self)
        out.update(length=self.length, exponent=self.exponent, eta=self.eta, alpha=self.alpha)
        return out


class WindowSums:
    """Prime and prime-power weights of one window ``(y, y + h]`` from the sieve."""

    def __init__(self, y: float, h: float):
        self.y, self.h = y, h
        first, last = window(y, h)
        if last < first:
            self.primes = self.powers = np.zeros(0, dtype=np.int64)
            self.prime_logs = self.power_logs = np.zeros(0)
            return
        tab = table(last + 1)
        lam = tab.lam[first : last + 1]
        self.powers = np.flatnonzero(lam) + first
        self.power_logs = lam[self.powers - first]
        keep = tab.is_prime[self.powers]
        self.primes, self.prime_logs = self.powers[keep], self.power_logs[keep]

    def class_sums(self, q: int, weighted: str = "theta") -> tuple[dict[int, float], float]:
        """Per reduced residue the weighted sum, plus the total over n coprime to q."""
        ns, ws = (self.primes, self.prime_logs) if weighted == "theta" else (self.powers, self.power_logs)
        coprime = np.gcd(ns, q) == 1
        ns, ws = ns[coprime], ws[coprime]
        res = ns % q
        order = np.argsort(res, kind="stable")
        reduced = [a for a in range(q) if math.gcd(a, q) == 1]
        cuts = np.searchsorted(res[order], reduced + [q])
        parts = np.split(ws[order], cuts[1:-1])
        sums = {a: math.fsum(part.tolist()) for a, part in zip(reduced, parts)}
        return sums, math.fsum(ws.tolist())

    def error_terms(self, q: int) -> tuple[float, float, float]:
        """``(E, E', E'')`` at modulus q."""
        if q < 1:
            raise ValueError(f"q must be >= 1, got {q}")
        phi = euler_phi(q)
        theta, theta_cop = self.class_sums(q, "theta")
        psi, psi_cop = self.class_sums(q, "psi")
        E = max(abs(v - self.h / phi) for v in theta.values())
        Ep = max(abs(v - theta_cop / phi) for v in theta.values())
        Ell = max(abs(v - psi_cop / phi) for v in psi.values())
        return E, Ep, Ell


def _check_args(h: float, q: int) -> None:
    if q < 1 or not h > 0:
        raise ValueError(f"need q >= 1 and h > 0, got q={q}, h={h}")


def error_term(y: float, h: float, q: int) -> float:
    """Largest deviation of a reduced class's log-prime sum from ``h/phi(q)``."""
    _check_args(h, q)
    return WindowSums(y, h).error_terms(q)[0]


def error_term_prime(y: float, h: float, q: int) -> float:
    """As :func:`error_term`, compared with the coprime total over phi(q)."""
    _check_args(h, q)
    return WindowSums(y, h).error_terms(q)[1]


def error_term_lambda(y: float, h: float, q: int) -> float:
    """As :func:`error_term_prime` with von Mangoldt weights on both sides."""
    _check_args(h, q)
    return WindowSums(y, h).error_terms(q)[2]


def higher_power_mass(y: float, h: float) -> float:
    """Sum of log p over proper prime powers ``p^k``, ``k >= 2``, in the window."""
    ws = WindowSums(y, h)
    return math.fsum(ws.power_logs[~np.isin(ws.powers, ws.primes)].tolist())


def _matches(fast: float, ref: float, kind: str) -> bool:
    if kind == "E":
        return fast == ref
    return abs(fast - ref) <= ORACLE_TOL * max(1.0, abs(ref))


@dataclass
class ErrorReport:
    """Sampled ``sum_{q<=Q}`` error terms with an aggregate block.

    ``rows`` holds one dict per (y, q) with all three error terms;
    ``samples`` one dict per y with the summed value of ``kind``.
    """

    kind: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    samples: list[dict] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    @property
    def mismatches(self) -> int:
        return self.aggregate.get("oracle_mismatches", 0)


def _stratified_ys(cfg: ExperimentConfig) -> list[tuple[int, float]]:
    rng = np.random.default_rng(cfg.seed)
    S = min(cfg.strata, cfg.samples)
    counts = [cfg.samples // S + (1 if s < cfg.samples % S else 0) for s in range(S)]
    out = []
    for s, n in enumerate(counts):
        for u in rng.random(n):
            out.append((s, cfg.x + cfg.x * (s + float(u)) / S))
    return out


def _stratified_mean(strata: list[int], values: list[float]) -> tuple[float, float]:
    """Equal-weight stratified mean and its standard error.

    Strata with a single draw are collapsed in adjacent pairs to estimate variance.
    """
    by: dict[int, list[float]] = {}
    for s, v in zip(strata, values):
        by.setdefault(s, []).append(v)
    keys = sorted(by)
    S = len(keys)
    means = [float(np.mean(by[k])) for k in keys]
    mean = math.fsum(means) / S
    if S == 1 and len(by[keys[0]]) == 1:
        return mean, math.nan
    if all(len(by[k]) >= 2 for k in keys):
        var = math.fsum(np.var(by[k], ddof=1) / len(by[k]) for k in keys) / S**2
    else:
        pairs = [(means[i], means[i + 1]) for i in range(0, S - 1, 2)]
        var = math.fsum((a - b) ** 2 for a, b in pairs) / S**2
        if S % 2:
            var += (means[-1] - mean) ** 2 / S**2
    return mean, math.sqrt(var)


def averaged_error(cfg: ExperimentConfig, kind: str = "E", check_oracle: bool = True) -> ErrorReport:
    """Stratified estimate of ``(1/(hx)) int_x^{2x} sum_{q<=Q} E(y,h;q) dy``.

    Every sampled (y, q) row is recomputed by the brute-force enumerator when
    ``check_oracle`` is set; disagreements are counted in the aggregate.

    Raises:
        ConfigError: zero samples or unknown kind.
    """
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    if cfg.samples == 0:
        raise ConfigError("averaged_error needs at least one sample")
    if not cfg.hypothesis_holds():
        warnings.warn(
            f"Q={cfg.Q} outside the stated range for theta={cfg.exponent:.4f} (alpha={cfg.alpha})",
            HypothesisWarning,
            stacklevel=2,
        )
    idx = KINDS.index(kind)
    h = cfg.length
    report = ErrorReport(kind=kind, config=cfg.as_dict())
    mismatches = 0
    strata, values = [], []
    for s, y in _stratified_ys(cfg):
        fast_ws = WindowSums(y, h)
        ref_ws = oracle.Window(y, h) if check_oracle else None
        per_q = []
        for q in range(1, cfg.Q + 1):
            terms = fast_ws.error_terms(q)
            row = {"y": y, "q": q, "E": terms[0], "Eprime": terms[1], "Elambda": terms[2]}
            if ref_ws is not None:
                ref = ref_ws.error_terms(q)
                ok = all(_matches(f, r, k) for f, r, k in zip(terms, ref, KINDS))
                row["oracle_match"] = ok
                mismatches += not ok
            report.rows.append(row)
            per_q.append(terms[idx])
        total = math.fsum(per_q)
        report.samples.append({"y": y, "stratum": s, "value": total})
        strata.append(s)
        values.append(total)
    mean, stderr = _stratified_mean(strata, values)
    report.aggregate = {
        "integral": cfg.x * mean,
        "integral_stderr": cfg.x * stderr,
        "normalized": mean / h,
        "normalized_stderr": stderr / h,
        "normalized_per_modulus": mean / (h * cfg.Q),
        "samples": len(values),
        "strata": len(set(strata)),
        "oracle_checked": check_oracle,
        "oracle_mismatches": mismatches,
        "hypothesis_holds": cfg.hypothesis_holds(),
    }
    return report


def averaged_error_exact(cfg: ExperimentConfig, kind: str = "E") -> float:
    """``(1/(hx)) int_x^{2x} sum_{q<=Q} E dy`` by summing over constant pieces.

    The integrand only changes where y or y + h crosses an integer, so each
    unit interval splits into at most two pieces.  Class sums come from
    prefix sums, which makes this exact up to float cancellation (about
    ``1e-10`` relative at ``x = 10^6``).
    """
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {KINDS}, got {kind!r}")
    if cfg.x > EXACT_LIMIT:
        raise ConfigError(f"exact mode supports x <= {EXACT_LIMIT}, got {cfg.x}")
    x, h = cfg.x, cfg.length
    H = math.floor(Fraction(h))
    f = float(Fraction(h) - H)
    ms = np.arange(math.floor(x), math.floor(2 * x) + 1, dtype=np.int64)
    lefts = [ms.astype(float)]
    rights = [ms + (1.0 - f)]
    his = [ms + H]
    if f > 0:
        lefts.append(ms + (1.0 - f))
        rights.append(ms + 1.0)
        his.append(ms + H + 1)
    left = np.clip(np.concatenate(lefts), x, 2 * x)
    right = np.clip(np.concatenate(rights), x, 2 * x)
    hi = np.concatenate(his)
    lo = np.concatenate([ms + 1] * len(lefts))
    keep = right > left
    width, lo, hi = (right - left)[keep], lo[keep], hi[keep]
    top = int(hi.max()) + 1
    tab = table(top + 1)
    n = np.arange(top)
    weights = tab.lam[:top] * (tab.is_prime[:top] if kind != "Elambda" else 1.0)
    total = np.zeros(len(width))
    for q in range(1, cfg.Q + 1):
        phi = euler_phi(q)
        cop = np.gcd(n, q) == 1
        cop_cum = np.cumsum(weights * cop)
        ref = h / phi if kind == "E" else (cop_cum[hi] - cop_cum[lo - 1]) / phi
        worst = np.zeros(len(width))
        for a in range(q):
            if math.gcd(a, q) != 1:
                continue
            cum = np.cumsum(weights * (n % q == a))
            np.maximum(worst, np.abs(cum[hi] - cum[lo - 1] - ref), out=worst)
        total += worst
    return math.fsum((total * width).tolist()) / (h * x)


@dataclass(frozen=True)
class CoverCheck:
    """E' over one long window against its cover by geometric blocks."""

    lhs: float
    rhs: float
    block_sum: float
    boundary: float
    blocks: int

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + COVER_SLACK * max(1.0, self.rhs)


def cover_blocks(y: float, h: float, eta: float) -> list[tuple[float, float]]:
    """Blocks ``(y_j, y_{j+1}]`` with ``y_{j+1} = (1 + eta) y_j`` covering ``(y, y + h]``.

    Lengths are returned as ``y_{j+1} - y_j`` so consecutive blocks tile exactly.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    out = []
    top = Fraction(y) + Fraction(h)
    cur = y
    while Fraction(cur) < top:
        nxt = cur + eta * cur
        out.append((cur, nxt - cur))
        cur = nxt
    return out


def dyadic_cover_check(y: float, h: float, q: int, eta: float) -> CoverCheck:
    """Compare ``E'(y,h;q)`` with the block sum plus the overshoot boundary term.

    The boundary term is the coprime log-prime mass of the part of the last
    block lying beyond ``y + h``; the triangle inequality then gives lhs <= rhs.
    """
    _check_args(h, q)
    blocks = cover_blocks(y, h, eta)
    lhs = error_term_prime(y, h, q)
    block_sum = math.fsum(error_term_prime(yj, hj, q) for yj, hj in blocks)
    last, end = window(y, h)[1], window(*blocks[-1])[1]
    over = WindowSums(last, end - last) if end > last else None
    boundary = over.class_sums(q, "theta")[1] if over is not None else 0.0
    return CoverCheck(lhs, block_sum + boundary, block_sum, boundary, len(blocks))


@dataclass
class PairFraction:
    """Share of pairs ``(q, n)`` whose every reduced class gets ``c h / phi(q)``."""

    c: float
    passes: int
    total: int
    mode: str
    oracle_passes: int | None = None
    mismatches: int = 0
    recomputed: int = 0

    @property
    def fraction(self) -> float:
        return self.passes / self.total if self.total else math.nan


def _pair_min_ratios(x: int, h: float, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Per ``n = 1..x``: ``min_a theta_a phi/h`` and the minimising class sum."""
    H = math.floor(Fraction(h))
    top = x + H + 1
    tab = table(top + 1)
    n = np.arange(top)
    w = tab.lam[:top] * tab.is_prime[:top]
    phi = euler_phi(q)
    start = np.arange(1, x + 1)
    low = np.full(x, np.inf)
    for a in range(q):
        if math.gcd(a, q) != 1:
            continue
        cum = np.cumsum(w * (n % q == a))
        np.minimum(low, cum[start + H] - cum[start], out=low)
    return low * phi / h, low


def _pair_passes_fast(n: int, h: float, q: int, c: float) -> bool:
    sums, _ = WindowSums(n, h).class_sums(q, "theta")
    need = c * h / euler_phi(q)
    return all(v >= need for v in sums.values())


def theorem3_pair_fraction(
    cfg: ExperimentConfig, c: float, mode: str = "exhaustive", check_oracle: bool = True
) -> PairFraction:
    """Fraction of pairs ``q <= Q``, ``1 <= n <= x`` with every class well stocked.

    ``exhaustive`` scans all pairs through prefix sums and recomputes pairs
    within ``NEAR_THRESHOLD`` of the cut with exact fsum; the oracle then
    recounts by an event sweep.  ``sampled`` draws ``cfg.samples`` pairs and
    checks each one with the oracle.
    """
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    x, h = int(cfg.x), cfg.length
    if mode == "sampled":
        rng = np.random.default_rng(cfg.seed)
        qs = rng.integers(1, cfg.Q + 1, cfg.samples)
        ns = rng.integers(1, x + 1, cfg.samples)
        out = PairFraction(c, 0, cfg.samples, mode, oracle_passes=0 if check_oracle else None)
        for q, n in zip(qs.tolist(), ns.tolist()):
            ok = _pair_passes_fast(n, h, q, c)
            out.passes += ok
            if check_oracle:
                ref = oracle.pair_passes(n, h, q, c)
                out.oracle_passes += ref
                out.mismatches += ok != ref
        return out
    if mode != "exhaustive":
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    out = PairFraction(c, 0, cfg.Q * x, mode)
    for q in range(1, cfg.Q + 1):
        need = c * h / euler_phi(q)
        _, low = _pair_min_ratios(x, h, q)
        passed = low >= need
        near = np.flatnonzero(np.abs(low - need) <= NEAR_THRESHOLD * max(1.0, need))
        for i in near.tolist():
            passed[i] = _pair_passes_fast(i + 1, h, q, c)
        out.recomputed += len(near)
        out.passes += int(passed.sum())
    if check_oracle:
        out.oracle_passes = oracle.pair_count(x, h, cfg.Q, c)
        out.mismatches = abs(out.passes - out.oracle_passes)
    return out


def pair_threshold_curve(cfg: ExperimentConfig, cs: Sequence[float]) -> list[tuple[float, float]]:
    """``(c, fraction)`` for each c, from the per-pair minimal class ratio.

    A pair passes at c iff its ratio ``min_a theta_a phi(q) / h`` is at least
    c, so one scan gives the whole curve.  Values within float rounding of a
    cut may differ from :func:`theorem3_pair_fraction`, which recomputes them.
    """
    x = int(cfg.x)
    ratios = np.sort(np.concatenate([_pair_min_ratios(x, cfg.length, q)[0] for q in range(1, cfg.Q + 1)]))
    total = len(ratios)
    return [(float(c), float(total - np.searchsorted(ratios, c, side="left")) / total) for c in cs]


def _hasse_bounds(m: np.ndarray, k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer range of the open interval ``(m^2 k - 2m sqrt k + 1, m^2 k + 2m sqrt k + 1)``."""
    centre = m * m * k
    sq = 4 * m * m * k
    r = np.array([math.isqrt(int(v)) for v in sq.tolist()], dtype=np.int64)
    exact = r * r == sq
    lo = np.where(exact, centre - r + 2, centre - r + 1)
    hi = np.where(exact, centre + r, centre + r + 1)
    return lo, hi


def smk_table(M: int, K: int) -> np.ndarray:
    """Boolean ``[m-1, k-1]``: a prime ``p = 1 (mod m)`` lies in the Hasse interval.

    Raises:
        ValueError: M or K below 1, or the largest endpoint beyond ``SMK_LIMIT``.
    """
    if M < 1 or K < 1:
        raise ValueError(f"need M, K >= 1, got M={M}, K={K}")
    top = M * M * K + 2 * M * math.isqrt(K + 1) + 2
    if top > SMK_LIMIT:
        raise ValueError(f"M^2 K range {top} exceeds the sieve limit {SMK_LIMIT}")
    primes = small_primes(top)
    ks = np.arange(1, K + 1, dtype=np.int64)
    out = np.zeros((M, K), dtype=bool)
    for m in range(1, M + 1):
        pm = primes[primes % m == 1] if m > 1 else primes
        lo, hi = _hasse_bounds(np.full(K, m, dtype=np.int64), ks)
        out[m - 1] = np.searchsorted(pm, lo, side="left") < np.searchsorted(pm, hi, side="right")
    return out


def smk_count(M: int, K: int) -> int:
    """Number of ``(m, k)``, ``m <= M``, ``k <= K``, whose Hasse interval has a prime ``= 1 mod m``."""
    return int(smk_table(M, K).sum())


def smk_failures(M: int, K: int) -> list[tuple[int, int]]:
    """Pairs ``(m, k)`` that do not contribute to :func:`smk_count`."""
    fails = np.argwhere(~smk_table(M, K)) + 1
    return [(int(m), int(k)) for m, k in fails]
