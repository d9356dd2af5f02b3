"""Segmented arithmetic tables: primality, von Mangoldt, Moebius.

Every interval sum in the package goes through :func:`window`, which fixes the
half-open convention ``y < n <= y + h``.  Logarithms are taken with
:func:`math.log` (not the numpy ufunc) so that sums built here and sums built
by an independent enumerator agree bit-for-bit after :func:`math.fsum`.
"""

from __future__ import annotations

import math
import os
import struct
import tempfile
import threading
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

SEGMENT_CAP = 1 << 22
CACHE_MAGIC = b"SAPS"
CACHE_VERSION = 1
_HEADER = struct.Struct("<IQQ")


class SegmentError(ValueError):
    pass


def window(y: float, h: float) -> tuple[int, int]:
    """Integer range ``[first, last]`` of n with ``y < n <= y + h``.

    ``y + h`` is formed exactly, so the right endpoint never moves by rounding.
    """
    if y < 0 or h < 0:
        raise ValueError(f"window needs y >= 0 and h >= 0, got y={y}, h={h}")
    return math.floor(y) + 1, math.floor(Fraction(y) + Fraction(h))


def _eratosthenes(limit: int) -> np.ndarray:
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    out = np.flatnonzero(flags).astype(np.int64)
    out.setflags(write=False)
    return out


_base = {"limit": 1, "primes": np.zeros(0, dtype=np.int64)}
_base_lock = threading.Lock()


def small_primes(limit: int) -> np.ndarray:
    """All primes ``<= limit`` (a view into a cache grown by doubling)."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    with _base_lock:
        if _base["limit"] < limit:
            grown = max(limit, 2 * _base["limit"], 1 << 12)
            _base["primes"] = _eratosthenes(grown)
            _base["limit"] = grown
        primes = _base["primes"]
    return primes[: np.searchsorted(primes, limit, side="right")]


def _logs(values) -> np.ndarray:
    return np.fromiter((math.log(int(v)) for v in values), dtype=np.float64, count=len(values))


@dataclass(frozen=True, eq=False)
class SieveSegment:
    """Arithmetic tables over the integer window ``[lo, hi)``.

    ``is_prime[i]``, ``lam[i]`` and ``mu[i]`` describe ``n = lo + i``.
    """

    lo: int
    hi: int
    is_prime: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    def __len__(self) -> int:
        return self.hi - self.lo

    def primes(self) -> np.ndarray:
        return np.flatnonzero(self.is_prime) + self.lo

    def to_bytes(self) -> bytes:
        bits = np.packbits(self.is_prime, bitorder="little")
        return b"".join(
            [
                CACHE_MAGIC,
                _HEADER.pack(CACHE_VERSION, self.lo, self.hi),
                bits.tobytes(),
                self.lam.astype("<f8").tobytes(),
                self.mu.astype("i1").tobytes(),
            ]
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "SieveSegment":
        if blob[:4] != CACHE_MAGIC:
            raise SegmentError("bad magic in segment cache file")
        version, lo, hi = _HEADER.unpack_from(blob, 4)
        if version != CACHE_VERSION:
            raise SegmentError(f"unsupported segment cache version {version}")
        n = hi - lo
        off = 4 + _HEADER.size
        nbits = (n + 7) // 8
        expected = off + nbits + 8 * n + n
        if len(blob) != expected:
            raise SegmentError(f"segment cache truncated: {len(blob)} bytes, expected {expected}")
        bits = np.frombuffer(blob, dtype=np.uint8, count=nbits, offset=off)
        is_prime = np.unpackbits(bits, count=n, bitorder="little").astype(bool)
        off += nbits
        lam = np.frombuffer(blob, dtype="<f8", count=n, offset=off).astype(np.float64)
        off += 8 * n
        mu = np.frombuffer(blob, dtype="i1", count=n, offset=off).astype(np.int8)
        return _frozen_segment(lo, hi, is_prime, lam, mu)


def _frozen_segment(lo, hi, is_prime, lam, mu) -> SieveSegment:
    for arr in (is_prime, lam, mu):
        arr.setflags(write=False)
    return SieveSegment(lo, hi, is_prime, lam, mu)


def build_segment(lo: int, hi: int, max_size: int = SEGMENT_CAP) -> SieveSegment:
    """Sieve the window ``[lo, hi)`` using base primes up to ``sqrt(hi)``."""
    if lo < 2:
        raise SegmentError(f"segment must start at lo >= 2, got {lo}")
    if hi <= lo:
        raise SegmentError(f"empty segment [{lo}, {hi})")
    if hi - lo > max_size:
        raise SegmentError(f"segment length {hi - lo} exceeds cap {max_size}")

    n = hi - lo
    numbers = np.arange(lo, hi, dtype=np.int64)
    is_prime = np.ones(n, dtype=bool)
    mu = np.ones(n, dtype=np.int8)
    radical = np.ones(n, dtype=np.int64)
    lam = np.zeros(n, dtype=np.float64)

    for p in small_primes(math.isqrt(hi - 1)).tolist():
        first = -(-lo // p) * p
        is_prime[max(first, p * p) - lo :: p] = False
        mu[first - lo :: p] *= -1
        radical[first - lo :: p] *= p
        p2 = p * p
        mu[-(-lo // p2) * p2 - lo :: p2] = 0
        logp = math.log(p)
        pk = p2
        while pk < hi:
            if pk >= lo:
                lam[pk - lo] = logp
            pk *= p

    # a squarefree n < hi has at most one prime factor above sqrt(hi)
    big = (radical != numbers) & (mu != 0)
    mu[big] *= -1
    prime_idx = np.flatnonzero(is_prime)
    lam[prime_idx] = _logs(prime_idx + lo)
    return _frozen_segment(lo, hi, is_prime, lam, mu)


def monolithic_tables(hi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unsegmented reference tables over ``[0, hi)``.

    Loops over every prime below ``hi`` rather than tracking a radical, so it
    shares no leftover-factor logic with :func:`build_segment`.
    """
    is_prime = np.zeros(hi, dtype=bool)
    lam = np.zeros(hi, dtype=np.float64)
    mu = np.ones(hi, dtype=np.int8)
    if hi > 0:
        mu[0] = 0
    primes = small_primes(hi - 1)
    is_prime[primes] = True
    for p in primes.tolist():
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
        logp = math.log(p)
        pk = p
        while pk < hi:
            lam[pk] = logp
            pk *= p
    return is_prime, lam, mu


class SegmentCache:
    """On-disk cache of segments keyed by ``(lo, hi)``.

    Writes for one key are serialized by a per-key lock and land atomically
    via rename, so concurrent readers never see a partial file.
    """

    def __init__(self, directory: str | os.PathLike, max_size: int = SEGMENT_CAP):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.max_size = max_size
        self._locks: dict[tuple[int, int], threading.Lock] = {}
        self._guard = threading.Lock()

    def path(self, lo: int, hi: int) -> Path:
        return self.directory / f"seg_{lo}_{hi}.saps"

    def _lock(self, key) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(key, threading.Lock())

    def get(self, lo: int, hi: int) -> SieveSegment:
        path = self.path(lo, hi)
        if path.exists():
            return SieveSegment.from_bytes(path.read_bytes())
        with self._lock((lo, hi)):
            if path.exists():
                return SieveSegment.from_bytes(path.read_bytes())
            seg = build_segment(lo, hi, self.max_size)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "wb") as fh:
                fh.write(seg.to_bytes())
            os.replace(tmp, path)
            return seg


class ArithmeticTable:
    """Contiguous tables over ``[0, hi)`` assembled from segments."""

    def __init__(self, hi: int, segment_size: int = SEGMENT_CAP, cache: SegmentCache | None = None):
        hi = max(int(hi), 3)
        self.hi = hi
        self.is_prime = np.zeros(hi, dtype=bool)
        self.lam = np.zeros(hi, dtype=np.float64)
        self.mu = np.zeros(hi, dtype=np.int8)
        self.mu[1] = 1
        for lo in range(2, hi, segment_size):
            top = min(lo + segment_size, hi)
            seg = cache.get(lo, top) if cache is not None else build_segment(lo, top, segment_size)
            self.is_prime[lo:top] = seg.is_prime
            self.lam[lo:top] = seg.lam
            self.mu[lo:top] = seg.mu
        for arr in (self.is_prime, self.lam, self.mu):
            arr.setflags(write=False)
        self._primes = None

    @property
    def primes(self) -> np.ndarray:
        if self._primes is None:
            self._primes = np.flatnonzero(self.is_prime).astype(np.int64)
        return self._primes

    def _check(self, last: int) -> None:
        if last >= self.hi:
            raise IndexError(f"table covers n < {self.hi}, asked for {last}")

    def _progression(self, arr, y, h, q, a):
        if q < 1 or not 0 <= a < q:
            raise ValueError(f"need q >= 1 and 0 <= a < q, got q={q}, a={a}")
        first, last = window(y, h)
        if last < first:
            return arr[0:0]
        self._check(last)
        start = first + (a - first) % q
        return arr[start : last + 1 : q]

    def psi_short(self, y: float, h: float, q: int = 1, a: int = 0) -> float:
        return math.fsum(self._progression(self.lam, y, h, q, a).tolist())

    def theta_short(self, y: float, h: float, q: int = 1, a: int = 0) -> float:
        lam = self._progression(self.lam, y, h, q, a)
        flags = self._progression(self.is_prime, y, h, q, a)
        return math.fsum(lam[flags].tolist())

    def primes_in(self, y: float, h: float) -> np.ndarray:
        """Primes p with ``y < p <= y + h``."""
        first, last = window(y, h)
        if last < first:
            return self.primes[0:0]
        self._check(last)
        lo = np.searchsorted(self.primes, first, side="left")
        hi = np.searchsorted(self.primes, last, side="right")
        return self.primes[lo:hi]

    def prime_powers_in(self, y: float, h: float) -> np.ndarray:
        """Integers with ``lam > 0`` in the window (primes and proper powers)."""
        first, last = window(y, h)
        if last < first:
            return np.zeros(0, dtype=np.int64)
        self._check(last)
        return np.flatnonzero(self.lam[first : last + 1]) + first


_shared: ArithmeticTable | None = None
_shared_lock = threading.Lock()
_shared_cache: SegmentCache | None = None


def set_cache_dir(directory: str | os.PathLike | None) -> None:
    """Back the shared table with an on-disk segment cache (None disables it)."""
    global _shared_cache, _shared
    with _shared_lock:
        _shared_cache = SegmentCache(directory) if directory is not None else None
        _shared = None


def table(hi: int) -> ArithmeticTable:
    """Process-wide table covering at least ``[0, hi)``; grows by doubling."""
    global _shared
    with _shared_lock:
        if _shared is None or _shared.hi < hi:
            size = max(1 << 16, 1 << max(int(hi) - 1, 1).bit_length())
            if _shared is not None:
                size = max(size, 2 * _shared.hi)
            _shared = ArithmeticTable(size, cache=_shared_cache)
        return _shared


def psi_short(y: float, h: float, q: int = 1, a: int = 0) -> float:
    """Sum of Lambda(n) over ``y < n <= y + h`` with ``n = a (mod q)``."""
    return table(window(y, h)[1] + 1).psi_short(y, h, q, a)


def theta_short(y: float, h: float, q: int = 1, a: int = 0) -> float:
    """Sum of log p over primes ``y < p <= y + h`` with ``p = a (mod q)``."""
    return table(window(y, h)[1] + 1).theta_short(y, h, q, a)


def factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division with sieved primes."""
    if n < 1:
        raise ValueError(f"factorize needs n >= 1, got {n}")
    out = []
    for p in small_primes(max(math.isqrt(n), 2)).tolist():
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    result = n
    for p, _ in factorize(n):
        result -= result // p
    return result


def omega(n: int) -> int:
    """Number of distinct prime factors."""
    return len(factorize(n))


def tau_m(m: int, n: int) -> int:
    """Number of ordered m-tuples of positive integers with product n."""
    if m < 1 or n < 1:
        raise ValueError(f"tau_m needs m, n >= 1, got m={m}, n={n}")
    out = 1
    for _, e in factorize(n):
        out *= math.comb(e + m - 1, m - 1)
    return out


def tau_m_table(m: int, hi: int) -> np.ndarray:
    """``tau_m(n)`` for ``0 <= n < hi`` (index 0 holds 0) by repeated convolution with 1."""
    if m < 1:
        raise ValueError(f"tau_m_table needs m >= 1, got {m}")
    out = np.ones(hi, dtype=np.int64)
    out[:1] = 0
    for _ in range(m - 1):
        nxt = np.zeros(hi, dtype=np.int64)
        for d in range(1, hi):
            nxt[d::d] += out[d]
        out = nxt
    return out


def rough_indicator(n: int, z: float) -> bool:
    """True iff no prime ``p < z`` divides n."""
    if n < 1:
        raise ValueError(f"rough_indicator needs n >= 1, got {n}")
    limit = math.ceil(z) - 1
    for p in small_primes(max(min(limit, n), 2)).tolist():
        if p >= z:
            break
        if n % p == 0:
            return False
    return True
