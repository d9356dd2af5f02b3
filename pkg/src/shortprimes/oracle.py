"""Brute-force reference enumerators, written without the sieve module.

Everything here re-derives primes and interval membership from scratch:
primes in a window come from marking multiples of trial-division primes,
membership ``y < n <= y + h`` comes from floors of exact rationals, and
Miller-Rabin is available to audit the window sieve itself.  Sums use
:func:`math.log` and :func:`math.fsum`, so they match the fast path exactly
when both see the same primes.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3 * 10^24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _trial_primes(limit: int) -> list[int]:
    out = []
    for n in range(2, limit + 1):
        if all(n % p for p in out if p * p <= n):
            out.append(n)
    return out


def _members(y: float, h: float) -> range:
    """Integers n with y < n <= y + h, from exact rationals."""
    yq, top = Fraction(y), Fraction(y) + Fraction(h)
    start = math.floor(yq) + 1
    stop = math.floor(top) + 1
    assert Fraction(start) > yq and Fraction(start - 1) <= yq
    return range(start, max(stop, start))


def window_primes(y: float, h: float) -> list[int]:
    ns = _members(y, h)
    if len(ns) == 0:
        return []
    lo, hi = ns.start, ns.stop - 1
    flags = np.ones(hi - lo + 1, dtype=bool)
    for p in _trial_primes(math.isqrt(hi)):
        first = max(p * p, (lo + p - 1) // p * p)
        flags[first - lo :: p] = False
    return [n for n in (np.flatnonzero(flags) + lo).tolist() if n >= 2]


def window_prime_powers(y: float, h: float, primes: list[int] | None = None) -> list[tuple[int, int]]:
    """Pairs ``(n, p)`` with ``n = p^k``, ``k >= 1``, inside the window."""
    ns = _members(y, h)
    if len(ns) == 0:
        return []
    lo, hi = ns.start, ns.stop - 1
    out = [(p, p) for p in (window_primes(y, h) if primes is None else primes)]
    for p in _trial_primes(math.isqrt(hi)):
        pk = p * p
        while pk <= hi:
            if pk >= lo:
                out.append((pk, p))
            pk *= p
    return sorted(out)


def totient(q: int) -> int:
    return sum(1 for a in range(1, q + 1) if math.gcd(a, q) == 1)


class Window:
    """Primes and prime powers of one interval, enumerated once."""

    def __init__(self, y: float, h: float):
        self.y, self.h = y, h
        self.primes = window_primes(y, h)
        self.powers = window_prime_powers(y, h, self.primes)
        self._logs = {p: math.log(p) for p in self.primes}
        self._logs.update((p, math.log(p)) for _, p in self.powers if p not in self._logs)

    def class_sums(self, q: int, weighted: str = "theta") -> tuple[dict[int, float], float]:
        """Per reduced residue: sum of log p (or Lambda); plus the coprime total."""
        items = [(p, p) for p in self.primes] if weighted == "theta" else self.powers
        groups: dict[int, list[float]] = {a: [] for a in range(q) if math.gcd(a, q) == 1}
        coprime = []
        for n, p in items:
            if math.gcd(n, q) != 1:
                continue
            w = self._logs[p]
            groups[n % q].append(w)
            coprime.append(w)
        return {a: math.fsum(v) for a, v in groups.items()}, math.fsum(coprime)

    def error_terms(self, q: int) -> tuple[float, float, float]:
        """``(E, E', E'')`` for modulus q."""
        phi, h = totient(q), self.h
        theta, theta_cop = self.class_sums(q, "theta")
        psi, psi_cop = self.class_sums(q, "psi")
        E = max(abs(v - h / phi) for v in theta.values())
        Ep = max(abs(v - theta_cop / phi) for v in theta.values())
        Ell = max(abs(v - psi_cop / phi) for v in psi.values())
        return E, Ep, Ell


def error_terms(y: float, h: float, q: int) -> tuple[float, float, float]:
    return Window(y, h).error_terms(q)


def pair_passes(n: int, h: float, q: int, c: float) -> bool:
    """Every reduced class mod q gets at least ``c h / phi(q)`` of log p in ``(n, n+h]``."""
    theta, _ = Window(n, h).class_sums(q, "theta")
    phi = totient(q)
    return all(v >= c * h / phi for v in theta.values())


def hasse_window_has_prime(m: int, k: int, dps: int = 40) -> bool:
    """Scan the open interval ``(m^2 k - 2m sqrt k + 1, m^2 k + 2m sqrt k + 1)`` for a prime = 1 mod m."""
    with mpmath.workdps(dps):
        root = mpmath.sqrt(k)
        lo = m * m * k - 2 * m * root + 1
        hi = m * m * k + 2 * m * root + 1
        p = int(mpmath.floor(lo)) + 1
        p += (1 - p) % m
        while p < hi:
            if p > lo and is_prime(p):
                return True
            p += m
    return False


def smk_count(M: int, K: int) -> int:
    return sum(hasse_window_has_prime(m, k) for m in range(1, M + 1) for k in range(1, K + 1))


def pair_thresholds(x: int, h: float, q: int) -> list[tuple[int, int, dict[int, float]]]:
    """Runs ``(n_start, n_stop, class sums)`` covering integers ``1 <= n <= x``.

    The window ``(n, n + h]`` holds prime p exactly when ``p - floor(h) <= n < p``,
    so its contents change only at those event points; each run is summed once.
    """
    H = math.floor(Fraction(h))
    primes = window_primes(0, x + H)
    events = {1, x + 1}
    for p in primes:
        for e in (p - H, p):
            if 1 < e <= x:
                events.add(e)
    cuts = sorted(events)
    reduced = [a for a in range(q) if math.gcd(a, q) == 1]
    out = []
    lo_idx = 0
    for start, stop in zip(cuts, cuts[1:]):
        while lo_idx < len(primes) and primes[lo_idx] <= start:
            lo_idx += 1
        groups: dict[int, list[float]] = {a: [] for a in reduced}
        j = lo_idx
        while j < len(primes) and primes[j] <= start + H:
            p = primes[j]
            if math.gcd(p, q) == 1:
                groups[p % q].append(math.log(p))
            j += 1
        out.append((start, stop, {a: math.fsum(v) for a, v in groups.items()}))
    return out


def pair_count(x: int, h: float, Q: int, c: float) -> int:
    """Number of ``(q, n)``, ``q <= Q``, ``n <= x``, passing :func:`pair_passes`."""
    total = 0
    for q in range(1, Q + 1):
        need = c * h / totient(q)
        for start, stop, sums in pair_thresholds(x, h, q):
            if all(v >= need for v in sums.values()):
                total += stop - start
    return total
