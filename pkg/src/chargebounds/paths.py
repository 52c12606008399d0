"""Path multisets: integral witnesses with uniform coordinate marginals.

A path is a CRT tuple ``t`` (one residue per prime of the level).  A
multiset ``J`` of paths respects the marginals when, for every coordinate
``n``, each residue of ``p_n`` occurs ``N!_p / p_n`` times in that
coordinate.  Such a ``J`` spreads mass ``mult(t) / N!_p`` on the class
``crt_shift(t) mod N!_p``; that measure is feasible for the dual of the
covering LP, so ``witness_count(J, alive) / N!_p`` is a lower bound on the
LP optimum.

Coordinates are 0-based indices into the level's primes.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import DonorShortageError, ElementNotPresentError
from .numtheory import CrtTuple, Level, _crt_weights, all_tuples, crt_shift
from .setexpr import AliveVector

log = logging.getLogger(__name__)


class PathMultiset:
    """Immutable sparse multiset of CRT tuples."""

    __slots__ = ("level", "_counts", "_marginals")

    def __init__(self, level: Level, counts: Mapping[CrtTuple, int]):
        clean = {}
        for t, c in counts.items():
            t = tuple(int(v) for v in t)
            if len(t) != level.n or any(not 0 <= v < p for v, p in zip(t, level.primes)):
                raise ValueError(f"path {t} is not valid at level {level.n}")
            if c < 0:
                raise ValueError(f"negative multiplicity for {t}")
            if c:
                clean[t] = int(c)
        self.level = level
        self._counts = MappingProxyType(dict(sorted(clean.items())))
        self._marginals = None

    @classmethod
    def full_product(cls, level: Level) -> "PathMultiset":
        return cls(level, {t: 1 for t in all_tuples(level)})

    @property
    def counts(self) -> Mapping[CrtTuple, int]:
        return self._counts

    def __len__(self) -> int:
        return sum(self._counts.values())

    def __getitem__(self, t: Sequence[int]) -> int:
        return self._counts.get(tuple(t), 0)

    def __eq__(self, other):
        return (isinstance(other, PathMultiset) and self.level == other.level
                and dict(self._counts) == dict(other._counts))

    def __hash__(self):
        return hash((self.level, tuple(self._counts.items())))

    def __repr__(self):
        return f"PathMultiset(level={self.level.n}, paths={len(self)}, distinct={len(self._counts)})"

    def elements(self) -> Iterable[CrtTuple]:
        """Each path repeated by multiplicity, lexicographically."""
        for t, c in self._counts.items():
            for _ in range(c):
                yield t

    def projections(self) -> Tuple[Tuple[int, ...], ...]:
        """Per coordinate, the multiplicity of each residue."""
        if self._marginals is None:
            out = [[0] * p for p in self.level.primes]
            for t, c in self._counts.items():
                for n, v in enumerate(t):
                    out[n][v] += c
            self._marginals = tuple(tuple(r) for r in out)
        return self._marginals

    def respects_marginals(self) -> bool:
        P = self.level.primorial
        return all(all(c == P // p for c in row)
                   for row, p in zip(self.projections(), self.level.primes))

    def shift_counts(self) -> Dict[int, int]:
        """Multiplicity landing on each class ``s mod N!_p``."""
        out: Dict[int, int] = {}
        for t, c in self._counts.items():
            s = crt_shift(self.level, t)
            out[s] = out.get(s, 0) + c
        return out

    def to_pairs(self) -> List[Tuple[List[int], int]]:
        return [(list(t), c) for t, c in self._counts.items()]


def _replace(t: CrtTuple, n: int, v: int) -> CrtTuple:
    return t[:n] + (v,) + t[n + 1:]


def exchange(J: PathMultiset, j: Sequence[int], k: Sequence[int], n_star: int) -> PathMultiset:
    """Swap coordinate ``n_star`` between one copy of ``j`` and one of ``k``."""
    j, k = tuple(j), tuple(k)
    need = Counter([j, k])
    for t, c in need.items():
        if J[t] < c:
            raise ElementNotPresentError(f"path {t} has multiplicity {J[t]} < {c}")
    counts = dict(J.counts)
    j2, k2 = _replace(j, n_star, k[n_star]), _replace(k, n_star, j[n_star])
    for t in (j, k):
        counts[t] -= 1
    for t in (j2, k2):
        counts[t] = counts.get(t, 0) + 1
    return PathMultiset(J.level, counts)


def redirect_pairs(J: PathMultiset, i: int, j: int, A_i: Iterable[int],
                   A_j: Iterable[int]) -> List[Tuple[CrtTuple, CrtTuple]]:
    """The (recipient, donor) pairs whose ``j`` coordinates :func:`redirect` swaps.

    Donors (``t[j] in A_j``, ``t[i] not in A_i``) are paired in lexicographic
    order with recipients (``t[i] in A_i``, ``t[j] not in A_j``).
    """
    A_i, A_j = frozenset(A_i), frozenset(A_j)
    proj = J.projections()
    have_i = sum(proj[i][v] for v in A_i if v < len(proj[i]))
    have_j = sum(proj[j][v] for v in A_j if v < len(proj[j]))
    if have_i > have_j:
        raise DonorShortageError(have_i, have_j)
    if i == j:
        if any(t[i] in A_i and t[i] not in A_j for t in J.counts):
            raise ValueError("with i == j the redirect needs A_i & proj inside A_j")
        return []
    donors = [t for t in J.elements() if t[j] in A_j and t[i] not in A_i]
    recipients = [t for t in J.elements() if t[i] in A_i and t[j] not in A_j]
    return list(zip(recipients, donors))


def redirect(J: PathMultiset, i: int, j: int, A_i: Iterable[int], A_j: Iterable[int]) -> PathMultiset:
    """Rearrange coordinate ``j`` so every path through ``A_i`` at ``i`` passes ``A_j`` at ``j``.

    Each pair from :func:`redirect_pairs` swaps its ``j`` coordinates, so
    projections are unchanged.
    """
    pairs = redirect_pairs(J, i, j, A_i, A_j)
    if not pairs:
        return J
    counts = dict(J.counts)
    for r, d in pairs:
        r2, d2 = _replace(r, j, d[j]), _replace(d, j, r[j])
        counts[r] -= 1
        counts[d] -= 1
        counts[r2] = counts.get(r2, 0) + 1
        counts[d2] = counts.get(d2, 0) + 1
    return PathMultiset(J.level, counts)


def _validate_partitions(level: Level, partitions) -> List[Tuple[frozenset, frozenset]]:
    if len(partitions) != level.n:
        raise ValueError(f"need one partition per coordinate ({level.n})")
    out = []
    for (A, B), p in zip(partitions, level.primes):
        A, B = frozenset(A), frozenset(B)
        if A & B or (A | B) != frozenset(range(p)):
            raise ValueError(f"{sorted(A)}, {sorted(B)} do not partition range({p})")
        out.append((A, B))
    return out


def product_bottleneck(level: Level, B: Sequence[Iterable[int]]) -> int:
    """Coordinate minimizing ``|B_n| / p_n`` (smallest index on ties)."""
    sizes = [Fraction(len(frozenset(b)), p) for b, p in zip(B, level.primes)]
    return min(range(level.n), key=lambda n: (sizes[n], n))


def intersect_products_witness(level: Level, partitions) -> PathMultiset:
    """Marginal-respecting ``J`` with ``(N!_p/p_k)|B_k|`` paths inside ``x B_n``.

    ``k`` is the coordinate minimizing ``|B_n|/p_n``, equivalently maximizing
    ``|A_n|/|B_n|``; no marginal-respecting multiset can beat that count
    since coordinate ``k`` alone caps it.  Starting from the full product,
    coordinate ``n`` is redirected so that passing ``B_k`` at ``k`` forces
    passing ``B_n`` at ``n``.
    """
    parts = _validate_partitions(level, partitions)
    B = [b for _, b in parts]
    k = product_bottleneck(level, B)
    J = PathMultiset.full_product(level)
    for n in range(level.n):
        if n != k:
            J = redirect(J, k, n, B[k], B[n])
    return J


def product_count(J: PathMultiset, sets: Sequence[Iterable[int]]) -> int:
    sets = [frozenset(s) for s in sets]
    return sum(c for t, c in J.counts.items() if all(v in s for v, s in zip(t, sets)))


@dataclass(frozen=True)
class ProductSpec:
    """Per coordinate ``I_n`` and ``K_n``; the region is ``x I_n`` minus ``x K_n``."""

    level: Level
    I: Tuple[frozenset, ...]
    K: Tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.I) != self.level.n or len(self.K) != self.level.n:
            raise ValueError("need I_n and K_n for every coordinate")
        for s, p in itertools.chain(zip(self.I, self.level.primes), zip(self.K, self.level.primes)):
            if any(not 0 <= v < p for v in s):
                raise ValueError(f"set {sorted(s)} outside range({p})")

    @classmethod
    def of(cls, level: Level, I, K=None) -> "ProductSpec":
        K = K if K is not None else [()] * level.n
        return cls(level, tuple(frozenset(s) for s in I), tuple(frozenset(s) for s in K))

    @property
    def H(self) -> Tuple[frozenset, ...]:
        return tuple(i - k for i, k in zip(self.I, self.K))

    def __contains__(self, t) -> bool:
        return (all(v in s for v, s in zip(t, self.I))
                and not all(v in s for v, s in zip(t, self.K)))

    def region_tensor(self) -> np.ndarray:
        def ind(sets):
            out = np.ones(self.level.primes, dtype=bool)
            for n, (s, p) in enumerate(zip(sets, self.level.primes)):
                mask = np.zeros(p, dtype=bool)
                mask[list(s)] = True
                shape = [1] * self.level.n
                shape[n] = p
                out &= mask.reshape(shape)
            return out
        return ind(self.I) & ~ind(self.K)


def thin_count_sides(spec: ProductSpec) -> Tuple[int, int]:
    """Both sides of the donation-sufficiency inequality, in exact integers.

    Left: sum over ``m = 0..N*-2`` of ``(N* - 1 - m)`` times, for every
    ``m``-subset ``T`` of the coordinates with nonempty ``H``, the product of
    ``K`` sizes on ``T``, ``H`` sizes on the rest of those coordinates and
    ``I`` sizes elsewhere.  An empty range ``0..N*-2`` means ``m = 0`` only.
    Right: the product of the ``K`` sizes.
    """
    Hs = spec.H
    star = [n for n in range(spec.level.n) if Hs[n]]
    rest = [n for n in range(spec.level.n) if not Hs[n]]
    n_star = len(star)
    i_rest = math.prod(len(spec.I[n]) for n in rest)
    left = 0
    for m in range(0, max(n_star - 2, 0) + 1):
        inner = 0
        for T in itertools.combinations(star, m):
            Ts = set(T)
            inner += (math.prod(len(spec.K[n]) for n in T)
                      * math.prod(len(Hs[n]) for n in star if n not in Ts))
        left += (n_star - 1 - m) * inner * i_rest
    right = math.prod(len(k) for k in spec.K)
    return left, right


def check_thin_count(spec: ProductSpec) -> bool:
    left, right = thin_count_sides(spec)
    return left >= right


def alive_tensor(alive: AliveVector) -> np.ndarray:
    """``T[t] = alive[crt_shift(t)]`` as an array shaped by the level's primes."""
    level = alive.level
    P = level.primorial
    shifts = np.zeros(level.primes, dtype=np.int64)
    for n, (p, e) in enumerate(zip(level.primes, _crt_weights(level))):
        shape = [1] * level.n
        shape[n] = p
        shifts = shifts + (np.arange(p, dtype=np.int64) * (e % P)).reshape(shape) % P
    return alive.bits[shifts % P]


def _donate(level: Level, live: np.ndarray, start: Optional[PathMultiset] = None,
            reverse_partners: bool = False) -> Dict[CrtTuple, int]:
    """Exhaust enlivening, life-preserving exchanges on a copy of ``start``.

    Scan order: dead paths lexicographically, then coordinate, then the
    replacement residue, then partner paths lexicographically (or in
    reverse order).  Each applied exchange raises the live count, so the
    loop terminates.  Counts are kept in a dense tensor so that partner
    search is one masked scan of a slice.
    """
    J = start if start is not None else PathMultiset.full_product(level)
    C = np.zeros(level.primes, dtype=np.int64)
    for t, c in J.counts.items():
        C[t] = c

    def axis_slice(n, v):
        return (slice(None),) * n + (v,)

    def try_enliven(d) -> bool:
        for n, p in enumerate(level.primes):
            # partners k have k[n] = v; they receive d[n] in return
            back = live[axis_slice(n, d[n])]
            for v in range(p):
                if v == d[n]:
                    continue
                d2 = _replace(d, n, v)
                if not live[d2]:
                    continue
                sl = axis_slice(n, v)
                ok = ((C[sl] > 0) & (back | ~live[sl])).ravel()
                if not ok.any():
                    continue
                flat = (len(ok) - 1 - int(np.argmax(ok[::-1]))) if reverse_partners \
                    else int(np.argmax(ok))
                rest = np.unravel_index(flat, C[sl].shape)
                k = tuple(int(x) for x in rest[:n]) + (v,) + tuple(int(x) for x in rest[n:])
                k2 = _replace(k, n, d[n])
                C[d] -= 1
                C[k] -= 1
                C[d2] += 1
                C[k2] += 1
                return True
        return False

    changed = True
    while changed:
        changed = False
        for idx in np.argwhere((C > 0) & ~live):
            d = tuple(int(x) for x in idx)
            while C[d] > 0 and try_enliven(d):
                changed = True
    return {tuple(int(x) for x in idx): int(C[tuple(idx)]) for idx in np.argwhere(C > 0)}


def donate_greedy(level: Level, alive: AliveVector) -> PathMultiset:
    """Local search from the full product by successive donations.

    Two passes differ only in the order partners are tried (lexicographic,
    then reversed); neither dominates the other, so the better local
    optimum is kept, the lexicographic one on ties.
    """
    if alive.level != level:
        raise ValueError("alive vector belongs to another level")
    live = alive_tensor(alive)
    best = None
    for rev in (False, True):
        counts = _donate(level, live, reverse_partners=rev)
        score = sum(c for t, c in counts.items() if live[t])
        if best is None or score > best[0]:
            best = (score, counts)
    return PathMultiset(level, best[1])


def donate_into_region(spec: ProductSpec, start: Optional[PathMultiset] = None) -> PathMultiset:
    """Donations that treat only the difference-of-products region as alive."""
    return PathMultiset(spec.level, _donate(spec.level, spec.region_tensor(), start))


def witness_count(J: PathMultiset, alive: AliveVector) -> int:
    if J.level != alive.level:
        raise ValueError("witness and alive vector have different levels")
    live = alive_tensor(alive)
    return sum(c for t, c in J.counts.items() if live[t])


def witness_measure(J: PathMultiset) -> Dict[int, Fraction]:
    """``y_s = mult(s) / N!_p`` on each class mod the primorial."""
    P = J.level.primorial
    return {s: Fraction(c, P) for s, c in sorted(J.shift_counts().items())}


def witness_dual_feasible(J: PathMultiset, moduli: Iterable[int]) -> bool:
    """Whether ``witness_measure(J)`` gives every class mod ``m`` mass ``1/m``."""
    y = witness_measure(J)
    for m in moduli:
        sums = [Fraction(0)] * m
        for s, v in y.items():
            sums[s % m] += v
        if any(v != Fraction(1, m) for v in sums):
            return False
    return True
