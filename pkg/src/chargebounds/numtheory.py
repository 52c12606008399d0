"""Primes, primorial levels, CRT coordinates and residue-class algebra.

Residues are 0-based throughout: the class ``r mod m`` is stored with
``0 <= r < m``.  Texts that number residues ``1..p`` with ``p`` standing
for the zero class map onto this convention by reducing mod ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Optional, Sequence, Tuple

from .errors import LevelTooLargeError, ResourceError

DEFAULT_LEVEL_CAP = 8
MAX_MODULUS_BITS = 4096

CrtTuple = Tuple[int, ...]


def is_prime(n: int) -> bool:
    """Deterministic trial division."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    f = 5
    while f * f <= n:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


def first_primes(n: int) -> list[int]:
    out: list[int] = []
    c = 2
    while len(out) < n:
        if is_prime(c):
            out.append(c)
        c += 1
    return out


def prime_factors(m: int) -> list[int]:
    """Distinct prime factors of ``|m|`` in increasing order (trial division)."""
    m = abs(m)
    out = []
    f = 2
    while f * f <= m:
        if m % f == 0:
            out.append(f)
            while m % f == 0:
                m //= f
        f += 1 if f == 2 else 2
    if m > 1:
        out.append(m)
    return out


@dataclass(frozen=True)
class Level:
    """Truncation to the first ``n`` primes and their primorial."""

    n: int
    primes: Tuple[int, ...]
    primorial: int

    def __post_init__(self):
        if len(self.primes) != self.n:
            raise ValueError("primes must have length n")
        if math.prod(self.primes) != self.primorial:
            raise ValueError("primorial must be the product of primes")

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.primes

    def __repr__(self):
        return f"Level(n={self.n}, primorial={self.primorial})"


@lru_cache(maxsize=None)
def _level(n: int) -> Level:
    ps = tuple(first_primes(n))
    return Level(n, ps, math.prod(ps))


def make_level(n: int, cap: int = DEFAULT_LEVEL_CAP) -> Level:
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    if n > cap:
        raise LevelTooLargeError(n, cap)
    return _level(n)


@dataclass(frozen=True, order=True)
class ResidueClass:
    """The set ``{shift + k*modulus : k in Z}``."""

    shift: int
    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError(f"modulus must be positive, got {self.modulus}")
        if not 0 <= self.shift < self.modulus:
            raise ValueError(f"shift {self.shift} not in [0, {self.modulus})")

    @classmethod
    def of(cls, r: int, m: int) -> "ResidueClass":
        """Build ``r mod m`` for any integer ``r``."""
        if m < 1:
            raise ValueError(f"modulus must be positive, got {m}")
        return cls(r % m, m)

    def __contains__(self, z: int) -> bool:
        return (z - self.shift) % self.modulus == 0

    def least_positive(self) -> int:
        return self.shift if self.shift > 0 else self.modulus

    def __str__(self):
        return f"{self.shift} mod {self.modulus}"


def _check_tuple(level: Level, j: Sequence[int]) -> None:
    if len(j) != level.n:
        raise ValueError(f"tuple length {len(j)} != level {level.n}")
    for c, p in zip(j, level.primes):
        if not 0 <= c < p:
            raise ValueError(f"coordinate {c} outside [0, {p})")


@lru_cache(maxsize=None)
def _crt_weights(level: Level) -> Tuple[int, ...]:
    # e_i = (P/p_i) * ((P/p_i)^-1 mod p_i): e_i = 1 mod p_i, 0 mod p_k (k != i)
    P = level.primorial
    return tuple((P // p) * pow(P // p, -1, p) for p in level.primes)


def crt_shift(level: Level, j: Sequence[int]) -> int:
    """The unique ``s`` in ``[0, N!_p)`` with ``s = j[i] (mod p_i)`` for all i."""
    _check_tuple(level, j)
    return sum(c * e for c, e in zip(j, _crt_weights(level))) % level.primorial


def crt_invert(level: Level, s: int) -> CrtTuple:
    return tuple(s % p for p in level.primes)


def all_tuples(level: Level) -> Iterable[CrtTuple]:
    """Every CRT tuple of the level, in lexicographic order."""
    import itertools

    return itertools.product(*(range(p) for p in level.primes))


def _lcm(a: int, b: int) -> int:
    return a // math.gcd(a, b) * b


def classes_intersect(a: ResidueClass, b: ResidueClass) -> bool:
    return (a.shift - b.shift) % math.gcd(a.modulus, b.modulus) == 0


def _merge(a: ResidueClass, b: ResidueClass) -> Optional[ResidueClass]:
    g = math.gcd(a.modulus, b.modulus)
    diff = b.shift - a.shift
    if diff % g:
        return None
    m = a.modulus // g * b.modulus
    if m.bit_length() > MAX_MODULUS_BITS:
        raise ResourceError(f"intersection modulus exceeds {MAX_MODULUS_BITS} bits")
    ma, mb = a.modulus // g, b.modulus // g
    # a.shift + a.modulus * t = b.shift (mod b.modulus)  <=>  ma * t = diff/g (mod mb)
    t = (diff // g) * pow(ma, -1, mb) % mb if mb > 1 else 0
    return ResidueClass((a.shift + a.modulus * t) % m, m)


def intersect_classes(classes: Sequence[ResidueClass]) -> Optional[ResidueClass]:
    """Exact intersection of finitely many classes, or ``None`` when empty.

    Moduli need not be coprime; the result lives mod the lcm of the moduli.
    An empty list yields the whole integers (``0 mod 1``).
    """
    out: Optional[ResidueClass] = ResidueClass(0, 1)
    for c in classes:
        out = _merge(out, c)
        if out is None:
            return None
    return out


def class_contains_prime(c: ResidueClass) -> bool:
    """Whether the class contains at least one (positive) prime.

    With ``s0`` the least positive member: a coprime pair ``(s0, m)`` gives
    infinitely many primes by Dirichlet; otherwise every member shares the
    factor ``gcd(s0, m) > 1`` and only ``s0`` itself can be prime.
    """
    s0 = c.least_positive()
    return math.gcd(s0, c.modulus) == 1 or is_prime(s0)


def unique_prime(c: ResidueClass) -> Optional[int]:
    """The only prime of a class whose members share a factor, if any.

    Returns ``None`` when the class is coprime (infinitely many primes) or
    prime-free.
    """
    s0 = c.least_positive()
    if math.gcd(s0, c.modulus) != 1 and is_prime(s0):
        return s0
    return None


def class_contains_composite(c: ResidueClass) -> bool:
    """Always true.

    If ``gcd(s0, m) > 1`` all members but possibly ``s0`` are proper
    multiples of a common factor.  Otherwise pick a prime ``q`` not dividing
    ``m``: the class meets ``0 mod q`` in a class mod ``q*m`` whose members
    beyond ``q`` are composite.
    """
    return True


def lcm_all(ms: Iterable[int]) -> int:
    return reduce(_lcm, ms, 1)
