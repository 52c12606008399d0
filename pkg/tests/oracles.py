"""Brute-force oracles, deliberately independent of the library internals."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


def trial_prime(n):
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def scan_shift(primes, j):
    """Least x >= 0 with x = j_i (mod p_i), by scanning."""
    P = math.prod(primes)
    for x in range(P):
        if all(x % p == c for p, c in zip(primes, j)):
            return x
    raise AssertionError("no solution")


def scan_intersection(classes):
    """Members of the intersection in [0, lcm) by scanning; returns (shift, lcm) or None."""
    L = math.lcm(*(m for _, m in classes)) if classes else 1
    hits = [x for x in range(L) if all((x - r) % m == 0 for r, m in classes)]
    if not hits:
        return None
    assert len(hits) == 1
    return hits[0], L


def scan_class_has_prime(r, m, limit):
    """Whether one of the first ``limit`` positive members of ``r mod m`` is prime."""
    x = r % m or m
    for _ in range(limit):
        if trial_prime(x):
            return True
        x += m
    return False


def scan_alive(member, primes, span_factor=2):
    """alive[s] iff some z in [-k*P, k*P) with z = s mod P is a member (k = span_factor)."""
    P = math.prod(primes)
    bits = [False] * P
    for z in range(-span_factor * P, span_factor * P):
        if not bits[z % P] and member(z):
            bits[z % P] = True
    return bits


def lp_vertex_value(objective, rows, senses, rhs, free):
    """Minimum over the vertices of a pointed polyhedron, or None if infeasible.

    Constraints are the rows plus ``x_j >= 0`` for non-free variables.  The
    caller guarantees the polyhedron is bounded (so the optimum is a vertex).
    A float pass only screens out singular or clearly infeasible candidate
    vertices; every surviving candidate is solved and checked exactly.
    """
    n = len(objective)
    cons = [(dict(r), s, Fraction(b)) for r, s, b in zip(rows, senses, rhs)]
    cons += [({j: Fraction(1)}, ">=", Fraction(0)) for j in range(n) if not free[j]]
    eq = [c for c in cons if c[1] == "="]
    ineq = [c for c in cons if c[1] != "="]
    dense = np.array([[float(r.get(j, 0)) for j in range(n)] for r, _, _ in cons]).reshape(len(cons), n)
    bvec = np.array([float(b) for _, _, b in cons])
    is_eq = np.array([s == "=" for _, s, _ in cons])
    eq_idx = [k for k, c in enumerate(cons) if c[1] == "="]
    ineq_idx = [k for k, c in enumerate(cons) if c[1] != "="]
    best = None
    for extra in itertools.combinations(range(len(ineq)), max(0, n - _rank(eq, n))):
        pick = eq_idx + [ineq_idx[k] for k in extra]
        sub = dense[pick]
        if n and np.linalg.matrix_rank(sub, tol=1e-9) < n:
            continue
        xf = np.linalg.lstsq(sub, bvec[pick], rcond=None)[0] if n else np.zeros(0)
        lhs = dense @ xf
        slack = 1e-6 * (1 + np.abs(bvec))
        if np.any(np.abs(lhs[is_eq] - bvec[is_eq]) > slack[is_eq]) or \
                np.any(lhs[~is_eq] < bvec[~is_eq] - slack[~is_eq]):
            continue
        x = _solve_square([cons[k] for k in pick], n)
        if x is None:
            continue
        ok = True
        for r, s, b in cons:
            lhs = sum(Fraction(v) * x[j] for j, v in r.items())
            if (s == "=" and lhs != b) or (s == ">=" and lhs < b):
                ok = False
                break
        if ok:
            val = sum(Fraction(c) * v for c, v in zip(objective, x))
            best = val if best is None or val < best else best
    return best


def _rank(rows, n):
    A = [[Fraction(r.get(j, 0)) for j in range(n)] for r, _, _ in rows]
    rank = 0
    for col in range(n):
        p = next((i for i in range(rank, len(A)) if A[i][col] != 0), None)
        if p is None:
            continue
        A[rank], A[p] = A[p], A[rank]
        for i in range(rank + 1, len(A)):
            f = A[i][col] / A[rank][col]
            A[i] = [a - f * b for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def _solve_square(tight, n):
    """Unique solution of the tight system (rank n), by Gaussian elimination."""
    A = [[Fraction(r.get(j, 0)) for j in range(n)] + [b] for r, _, b in tight]
    rank_rows = []
    row = 0
    piv_cols = []
    for col in range(n):
        p = next((i for i in range(row, len(A)) if A[i][col] != 0), None)
        if p is None:
            return None
        A[row], A[p] = A[p], A[row]
        pv = A[row][col]
        A[row] = [v / pv for v in A[row]]
        for i in range(len(A)):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[row])]
        piv_cols.append(col)
        row += 1
    for i in range(row, len(A)):
        if A[i][n] != 0:
            return None
    return [A[i][n] for i in range(n)]


def _tables(shape, total, caps):
    """All nonnegative integer tables of ``shape`` summing to ``total`` whose
    per-axis marginals stay within ``caps``."""
    cells = list(itertools.product(*(range(p) for p in shape)))

    def rec(idx, left, used):
        if idx == len(cells) - 1:
            cell = cells[idx]
            if all(used[a][cell[a]] + left <= caps[a][cell[a]] for a in range(len(shape))):
                yield (left,)
            return
        cell = cells[idx]
        room = min([left] + [caps[a][cell[a]] - used[a][cell[a]] for a in range(len(shape))])
        for v in range(room + 1):
            for a in range(len(shape)):
                used[a][cell[a]] += v
            for rest in rec(idx + 1, left - v, used):
                yield (v,) + rest
            for a in range(len(shape)):
                used[a][cell[a]] -= v

    if not cells:
        yield ()
        return
    yield from rec(0, total, [[0] * p for p in shape])


def _compositions(total, caps):
    """Vectors ``v`` with ``sum(v) == total`` and ``0 <= v[i] <= caps[i]``."""
    if not caps:
        if total == 0:
            yield ()
        return
    for v in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - v, caps[1:]):
            yield (v,) + rest


def integral_max(primes, live):
    """Maximum live count over all marginal-respecting path multisets.

    ``live(t)`` says whether tuple ``t`` is alive.  Exhaustive: the paths are
    split into slices by their last coordinate.  Dynamic programming runs
    over the slices, branching on each slice's per-axis margins; the best
    live count of a slice with given margins comes from enumerating every
    table with those margins.
    """
    primes = tuple(primes)
    P = math.prod(primes)
    if len(primes) == 1:
        return sum(1 for v in range(primes[0]) if live((v,)))
    head, last = primes[:-1], primes[-1]
    per_slice = P // last
    cells = list(itertools.product(*(range(p) for p in head)))

    @lru_cache(maxsize=None)
    def slice_gain(k, margins):
        best = None
        for tab in _tables(head, per_slice, [list(m) for m in margins]):
            gain = sum(c for cell, c in zip(cells, tab) if c and live(cell + (k,)))
            best = gain if best is None or gain > best else best
        return best

    @lru_cache(maxsize=None)
    def best(k, remaining):
        if k == last:
            return 0 if all(v == 0 for row in remaining for v in row) else None
        out = None
        for margins in itertools.product(*(_compositions(per_slice, row) for row in remaining)):
            gain = slice_gain(k, margins)
            if gain is None:
                continue
            new = tuple(tuple(a - b for a, b in zip(row, m)) for row, m in zip(remaining, margins))
            sub = best(k + 1, new)
            if sub is not None and (out is None or gain + sub > out):
                out = gain + sub
        return out

    start = tuple(tuple([P // p] * p) for p in head)
    return best(0, start)


def check_certificate(objective, rows, senses, rhs, free, x, y):
    """Strong-duality check for ``min c.x, A x (>=|=) b`` from scratch.

    Column sums are formed from a dense copy of the rows so nothing is shared
    with the library's sparse bookkeeping.
    """
    n = len(objective)
    A = [[Fraction(r.get(j, 0)) for j in range(n)] for r in rows]
    for i, (s, b) in enumerate(zip(senses, rhs)):
        lhs = sum(a * v for a, v in zip(A[i], x))
        if s == ">=" and (lhs < b or y[i] < 0):
            return False
        if s == "=" and lhs != b:
            return False
    for j in range(n):
        col = sum(A[i][j] * y[i] for i in range(len(A)))
        if free[j] and col != objective[j]:
            return False
        if not free[j] and (col > objective[j] or x[j] < 0):
            return False
    primal = sum(Fraction(c) * v for c, v in zip(objective, x))
    dual = sum(Fraction(b) * v for b, v in zip(rhs, y))
    return primal == dual
