"""Dirichlet characters modulo q via discrete logarithms.

The unit group ``(Z/qZ)*`` is split into cyclic components: one per odd prime
power (generated by its smallest primitive root), ``-1`` for ``4 | q``, and
``-1, 5`` for ``8 | q``.  A character is an exponent vector ``k`` with
``chi(g_i) = exp(2 pi i k_i / ord_i)``.  Labels enumerate exponent vectors
lexicographically (2-part first, then odd primes ascending), so label 0 is the
principal character.  Character keys are the strings ``"q.label"``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .sieve import factorize

MODULUS_CAP = 10**6


@dataclass(frozen=True)
class Component:
    modulus: int
    prime: int
    generator: int
    order: int
    dlog: np.ndarray = field(repr=False, compare=False)


def _smallest_primitive_root(p: int, e: int) -> int:
    phi = p - 1
    factors = [r for r, _ in factorize(phi)] if phi > 1 else []
    for g in range(2, p * p + 2):
        if g % p == 0:
            continue
        if all(pow(g, phi // r, p) != 1 for r in factors):
            if e == 1 or pow(g, p - 1, p * p) != 1:
                return g
    raise RuntimeError(f"no primitive root found for {p}^{e}")


def _cyclic_dlog(modulus: int, g: int, order: int) -> np.ndarray:
    table = np.full(modulus, -1, dtype=np.int64)
    x = 1
    for k in range(order):
        table[x] = k
        x = x * g % modulus
    return table


def _components(q: int) -> list[Component]:
    comps = []
    for p, e in factorize(q) if q > 1 else []:
        pe = p**e
        if p == 2:
            if e == 1:
                continue
            sign = np.full(pe, -1, dtype=np.int64)
            if e == 2:
                sign[1], sign[3] = 0, 1
                comps.append(Component(pe, 2, pe - 1, 2, sign))
                continue
            five = np.full(pe, -1, dtype=np.int64)
            x = 1
            for b in range(pe // 4):
                five[x], sign[x] = b, 0
                five[pe - x], sign[pe - x] = b, 1
                x = x * 5 % pe
            comps.append(Component(pe, 2, pe - 1, 2, sign))
            comps.append(Component(pe, 2, 5, pe // 4, five))
        else:
            g = _smallest_primitive_root(p, e)
            phi = pe - pe // p
            comps.append(Component(pe, p, g, phi, _cyclic_dlog(pe, g, phi)))
    return comps


class CharacterGroup:
    """The group of Dirichlet characters modulo q."""

    def __init__(self, q: int, cap: int = MODULUS_CAP):
        if q < 1:
            raise ValueError(f"modulus must be >= 1, got {q}")
        if q > cap:
            raise ValueError(f"modulus {q} exceeds cap {cap}")
        self.modulus = q
        self.factorization = factorize(q) if q > 1 else []
        self.components = _components(q)
        self.orders = [c.order for c in self.components]
        self.order = math.prod(self.orders)
        self.exponent = math.lcm(*self.orders) if self.orders else 1
        residues = np.arange(q)
        units = np.gcd(residues, q) == 1
        self._unit_mask = units
        # per-residue log vector, scaled into Z/exponent
        self._scaled_logs = [
            np.where(units, c.dlog[residues % c.modulus], 0) * (self.exponent // c.order)
            for c in self.components
        ]
        self._roots = _roots_of_unity(self.exponent)
        self._cache: dict[int, DirichletCharacter] = {}

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"CharacterGroup({self.modulus})"

    def exponents_of(self, label: int) -> tuple[int, ...]:
        if not 0 <= label < self.order:
            raise ValueError(f"label {label} out of range for modulus {self.modulus}")
        out = []
        for o in reversed(self.orders):
            label, k = divmod(label, o)
            out.append(k)
        return tuple(reversed(out))

    def label_of(self, exponents) -> int:
        label = 0
        for k, o in zip(exponents, self.orders):
            label = label * o + (k % o)
        return label

    def character(self, label: int) -> "DirichletCharacter":
        chi = self._cache.get(label)
        if chi is None:
            chi = DirichletCharacter(self, label, self.exponents_of(label))
            self._cache[label] = chi
        return chi

    def characters(self) -> list["DirichletCharacter"]:
        return [self.character(i) for i in range(self.order)]

    def log_numerators(self, exponents) -> np.ndarray:
        """``j(r)`` with ``chi(r) = exp(2 pi i j(r) / exponent)`` for each residue r."""
        total = np.zeros(self.modulus, dtype=np.int64)
        for k, scaled in zip(exponents, self._scaled_logs):
            if k:
                total = (total + k * scaled) % self.exponent
        return total


@lru_cache(maxsize=64)
def _roots_of_unity(L: int) -> np.ndarray:
    j = np.arange(L)
    roots = np.exp(2j * np.pi * j / L)
    for frac, val in ((0, 1), (1, 1j), (2, -1), (3, -1j)):
        if (frac * L) % 4 == 0:
            roots[frac * L // 4] = val
    if L % 2 == 0:
        # force exact conjugate symmetry
        half = L // 2
        roots[half + 1 :] = np.conj(roots[1:half][::-1])
    roots.setflags(write=False)
    return roots


@lru_cache(maxsize=512)
def character_group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    group: CharacterGroup = field(repr=False)
    label: int
    exponents: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return self.group.modulus

    @property
    def key(self) -> str:
        return f"{self.modulus}.{self.label}"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DirichletCharacter)
            and self.modulus == other.modulus
            and self.label == other.label
        )

    def __hash__(self) -> int:
        return hash((self.modulus, self.label))

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.key})"

    def log_numerators(self) -> np.ndarray:
        return _numerators(self)

    def values(self) -> np.ndarray:
        """``chi(r)`` for residues ``r = 0..q-1`` (zero off the units)."""
        return _values(self)

    def __call__(self, n):
        vals = self.values()
        if isinstance(n, np.ndarray):
            return vals[n % self.modulus]
        return complex(vals[int(n) % self.modulus])

    @property
    def is_principal(self) -> bool:
        return not any(self.exponents)

    @property
    def order(self) -> int:
        o = 1
        for k, m in zip(self.exponents, self.group.orders):
            o = math.lcm(o, m // math.gcd(k, m))
        return o

    @property
    def is_real(self) -> bool:
        return self.order <= 2

    @property
    def parity(self) -> int:
        """0 if the character is even, 1 if odd."""
        if self.modulus <= 2:
            return 0
        j = int(self.log_numerators()[self.modulus - 1])
        return 0 if j == 0 else 1

    def conj(self) -> "DirichletCharacter":
        neg = tuple((-k) % o for k, o in zip(self.exponents, self.group.orders))
        return self.group.character(self.group.label_of(neg))

    @property
    def conductor(self) -> int:
        return conductor_and_inducer(self)[0]

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus


@lru_cache(maxsize=4096)
def _numerators(chi: DirichletCharacter) -> np.ndarray:
    out = chi.group.log_numerators(chi.exponents)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4096)
def _values(chi: DirichletCharacter) -> np.ndarray:
    g = chi.group
    vals = np.where(g._unit_mask, g._roots[chi.log_numerators()], 0)
    vals = vals.astype(np.complex128)
    vals.setflags(write=False)
    return vals


def enumerate_characters(q: int, cap: int = MODULUS_CAP) -> list[DirichletCharacter]:
    """All phi(q) characters modulo q, ordered by label; label 0 is principal."""
    if q > cap:
        raise ValueError(f"modulus {q} exceeds cap {cap}")
    return character_group(q).characters()


def primitive_characters(q: int) -> list[DirichletCharacter]:
    return [chi for chi in enumerate_characters(q) if chi.is_primitive]


def from_key(key: str) -> DirichletCharacter:
    """Parse a ``"q.label"`` key."""
    try:
        q_s, label_s = key.split(".")
        q, label = int(q_s), int(label_s)
    except ValueError:
        raise ValueError(f"malformed character key {key!r}") from None
    return character_group(q).character(label)


def eval(chi: DirichletCharacter, n: int) -> complex:  # noqa: A001 - mirrors the documented op name
    if n < 0:
        raise ValueError(f"eval needs n >= 0, got {n}")
    return chi(n)


def _odd_conductor(comp: Component, k: int) -> int:
    if k == 0:
        return 1
    p, f = comp.prime, comp.modulus
    # chi factors through p^j iff p^(e-j) divides k
    while f > p and k % p == 0:
        k //= p
        f //= p
    return f


def _two_part_conductor(comps: list[Component], ks: list[int]) -> int:
    if not comps:
        return 1
    if len(comps) == 1:  # modulus 4
        return 4 if ks[0] else 1
    five, (a, b) = comps[1], ks
    if b == 0:
        return 4 if a else 1
    e = five.modulus.bit_length() - 1
    v = (b & -b).bit_length() - 1
    return 2 ** (e - v)


@lru_cache(maxsize=4096)
def conductor_and_inducer(chi: DirichletCharacter) -> tuple[int, DirichletCharacter]:
    """Conductor d and the primitive character mod d that induces chi."""
    comps = chi.group.components
    two = [(c, k) for c, k in zip(comps, chi.exponents) if c.prime == 2]
    d = _two_part_conductor([c for c, _ in two], [k for _, k in two])
    for c, k in zip(comps, chi.exponents):
        if c.prime != 2:
            d *= _odd_conductor(c, k)
    if d == chi.modulus:
        return d, chi
    return d, _restrict(chi, d)


def _restrict(chi: DirichletCharacter, d: int) -> DirichletCharacter:
    q = chi.modulus
    target = character_group(d)
    nums = chi.log_numerators()
    L = chi.group.exponent
    exps = []
    for comp in target.components:
        # element that is the generator on this component and 1 elsewhere mod d
        rest = d // comp.modulus
        gen = _crt(comp.generator, comp.modulus, 1, rest)
        n = gen
        while math.gcd(n, q) != 1:
            n += d
        frac = Fraction(int(nums[n % q]), L) * comp.order
        if frac.denominator != 1:
            raise AssertionError(f"{chi!r} does not factor through modulus {d}")
        exps.append(int(frac) % comp.order)
    return target.character(target.label_of(exps))


def _crt(a: int, m: int, b: int, n: int) -> int:
    if n == 1:
        return a % m
    inv = pow(m, -1, n)
    return (a + m * ((b - a) * inv % n)) % (m * n)


def gauss_sum(chi: DirichletCharacter) -> complex:
    """``tau(chi) = sum_a chi(a) e(a/q)`` for primitive chi."""
    if not chi.is_primitive:
        raise ValueError(f"gauss_sum needs a primitive character, {chi.key} has conductor {chi.conductor}")
    q = chi.modulus
    re, im = [], []
    vals = chi.values()
    for a in range(1, q + 1):
        v = vals[a % q]
        if v == 0:
            continue
        e = cmath.exp(2j * math.pi * a / q)
        prod = v * e
        re.append(prod.real)
        im.append(prod.imag)
    return complex(math.fsum(re), math.fsum(im))


def orthogonality_residual(q: int) -> float:
    """Worst deviation of both orthogonality relations from ``phi(q)`` times the identity.

    Rows: ``sum_a chi(a) conj(psi(a))``; columns: ``sum_chi chi(a) conj(chi(b))`` over units a, b.
    """
    vals = np.stack([chi.values() for chi in enumerate_characters(q)])
    units = np.flatnonzero(np.abs(vals[0]) > 0)
    phi = len(units)
    vals = vals[:, units]
    eye = phi * np.eye(phi)
    rows = vals @ vals.conj().T
    cols = vals.T @ vals.conj()
    return float(max(np.abs(rows - eye).max(), np.abs(cols - eye).max()))
