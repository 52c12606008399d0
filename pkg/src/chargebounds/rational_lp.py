"""Exact rational linear programming with verified duality certificates.

Problems have the form::

    minimize    c . x
    subject to  A_i . x  >=  b_i   or   A_i . x  =  b_i     (per row)
                x_j >= 0  or  x_j free                       (per variable)

and the dual::

    maximize    b . y
    subject to  y_i >= 0 on '>=' rows, free on '=' rows
                A^T_j . y  =  c_j  (x_j free)   or   <= c_j  (x_j >= 0)

All arithmetic uses :class:`fractions.Fraction`.  The simplex engine is a
two-phase revised simplex with Bland's rule; it runs on whichever of the
primal or the dual has fewer rows, and both vectors are always returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .errors import ResourceError

log = logging.getLogger(__name__)

Rational = Fraction
GE, EQ = ">=", "="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
MAX_NONZEROS = 10**6
MAX_PIVOTS = 10**6

ZERO = Fraction(0)
ONE = Fraction(1)


def as_rational(v) -> Fraction:
    if isinstance(v, str):
        return Fraction(v)
    return v if isinstance(v, Fraction) else Fraction(v)


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class LpProblem:
    """Minimization LP with sparse rows (``{column: coefficient}``)."""

    objective: Tuple[Fraction, ...]
    rows: Tuple[Mapping[int, Fraction], ...]
    senses: Tuple[str, ...]
    rhs: Tuple[Fraction, ...]
    free: Tuple[bool, ...]

    def __post_init__(self):
        n, m = len(self.objective), len(self.rows)
        if len(self.senses) != m or len(self.rhs) != m:
            raise ValueError("rows, senses and rhs must have equal length")
        if len(self.free) != n:
            raise ValueError("free flags must match the number of variables")
        for s in self.senses:
            if s not in (GE, EQ):
                raise ValueError(f"unknown sense {s!r}")
        for r in self.rows:
            for j in r:
                if not 0 <= j < n:
                    raise ValueError(f"column index {j} out of range")

    @classmethod
    def build(cls, objective, rows, senses, rhs, free=None) -> "LpProblem":
        objective = tuple(as_rational(c) for c in objective)
        rows = tuple({int(j): as_rational(v) for j, v in dict(r).items() if v != 0}
                     for r in rows)
        if free is None:
            free = (False,) * len(objective)
        elif isinstance(free, bool):
            free = (free,) * len(objective)
        return cls(objective, rows, tuple(senses), tuple(as_rational(b) for b in rhs),
                   tuple(bool(f) for f in free))

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def nonzeros(self) -> int:
        return sum(len(r) for r in self.rows)

    def columns(self) -> List[Dict[int, Fraction]]:
        cols: List[Dict[int, Fraction]] = [dict() for _ in self.objective]
        for i, r in enumerate(self.rows):
            for j, v in r.items():
                cols[j][i] = v
        return cols


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: Optional[Fraction] = None
    primal: Tuple[Fraction, ...] = ()
    dual: Tuple[Fraction, ...] = ()
    certificate_ok: bool = False
    pivots: int = 0
    orientation: str = ""


# ---------------------------------------------------------------- verification


def verify_certificate(problem: LpProblem, solution: LpSolution) -> bool:
    """Recheck primal feasibility, dual feasibility and equal objectives."""
    if solution.status != OPTIMAL:
        return False
    x, y = solution.primal, solution.dual
    if len(x) != problem.n_vars or len(y) != problem.n_rows:
        return False
    for j, f in enumerate(problem.free):
        if not f and x[j] < 0:
            return False
    for i, (r, s, b) in enumerate(zip(problem.rows, problem.senses, problem.rhs)):
        lhs = sum((v * x[j] for j, v in r.items()), ZERO)
        if (s == GE and lhs < b) or (s == EQ and lhs != b):
            return False
        if s == GE and y[i] < 0:
            return False
    reduced = list(problem.objective)
    for i, r in enumerate(problem.rows):
        if y[i]:
            for j, v in r.items():
                reduced[j] -= v * y[i]
    for j, f in enumerate(problem.free):
        if (f and reduced[j] != 0) or (not f and reduced[j] < 0):
            return False
    primal_value = sum((c * v for c, v in zip(problem.objective, x)), ZERO)
    dual_value = sum((b * v for b, v in zip(problem.rhs, y)), ZERO)
    return primal_value == dual_value == solution.value


# ---------------------------------------------------------------- standard form engine


@dataclass
class _StdResult:
    status: str
    x: List[Fraction] = field(default_factory=list)
    y: List[Fraction] = field(default_factory=list)
    value: Fraction = ZERO
    pivots: int = 0


def _simplex_std(cols: Sequence[Mapping[int, Fraction]], cost: Sequence[Fraction],
                 b: Sequence[Fraction], max_pivots: int = MAX_PIVOTS) -> _StdResult:
    """Solve ``min cost.x  s.t.  A x = b, x >= 0`` given sparse columns of A.

    Returns primal ``x`` and row duals ``y`` (``cost - A^T y >= 0`` at optimum).
    """
    m, n = len(b), len(cols)
    sign = [ONE if bi >= 0 else -ONE for bi in b]
    b = [abs(bi) for bi in b]
    cols = [{i: sign[i] * v for i, v in c.items()} for c in cols]
    # artificial columns n..n+m-1
    basis = list(range(n, n + m))
    binv = [[ONE if r == c else ZERO for c in range(m)] for r in range(m)]
    xb = list(b)
    pivots = 0

    def column(j):
        if j >= n:
            return {j - n: ONE}
        return cols[j]

    def ftran(col):
        u = [ZERO] * m
        for i, v in col.items():
            for r in range(m):
                w = binv[r][i]
                if w:
                    u[r] += w * v
        return u

    def duals(cb):
        y = [ZERO] * m
        for r in range(m):
            if cb[r]:
                row = binv[r]
                for i in range(m):
                    if row[i]:
                        y[i] += cb[r] * row[i]
        return y

    def pivot(r, j, u):
        nonlocal pivots
        pivots += 1
        if pivots > max_pivots:
            raise ResourceError(f"simplex exceeded {max_pivots} pivots")
        p = u[r]
        prow = [v / p for v in binv[r]]
        binv[r] = prow
        xr = xb[r] / p
        xb[r] = xr
        for k in range(m):
            if k != r and u[k]:
                f = u[k]
                row = binv[k]
                for i in range(m):
                    if prow[i]:
                        row[i] -= f * prow[i]
                xb[k] -= f * xr
        basis[r] = j

    def run(costf, allowed):
        """Bland's rule: lowest-index entering column, lowest-index leaving."""
        while True:
            cb = [costf(j) for j in basis]
            y = duals(cb)
            in_basis = set(basis)
            enter = None
            for j in range(n + m):
                if j in in_basis or not allowed(j):
                    continue
                d = costf(j) - sum((y[i] * v for i, v in column(j).items()), ZERO)
                if d < 0:
                    enter = j
                    break
            if enter is None:
                return OPTIMAL, y
            u = ftran(column(enter))
            best = None
            for r in range(m):
                if u[r] > 0:
                    ratio = xb[r] / u[r]
                    if (best is None or ratio < best[0]
                            or (ratio == best[0] and basis[r] < basis[best[1]])):
                        best = (ratio, r)
            if best is None:
                return UNBOUNDED, y
            pivot(best[1], enter, u)

    # phase I: minimize the sum of artificials
    status, _ = run(lambda j: ONE if j >= n else ZERO, lambda j: True)
    infeas = sum((xb[r] for r in range(m) if basis[r] >= n), ZERO)
    if infeas > 0:
        return _StdResult(INFEASIBLE, pivots=pivots)
    # drive zero-level artificials out; rows where that fails are redundant
    redundant = set()
    for r in range(m):
        if basis[r] < n:
            continue
        in_basis = set(basis)
        for j in range(n):
            if j in in_basis:
                continue
            col = cols[j]
            ur = sum((binv[r][i] * v for i, v in col.items()), ZERO)
            if ur:
                pivot(r, j, ftran(col))
                break
        else:
            redundant.add(r)

    def cost2(j):
        return cost[j] if j < n else ZERO

    # artificials may stay basic (at zero) in redundant rows, never re-enter
    status, y = run(cost2, lambda j: j < n)
    x = [ZERO] * n
    for r, j in enumerate(basis):
        if j < n:
            x[j] = xb[r]
    if status == UNBOUNDED:
        return _StdResult(UNBOUNDED, x=x, pivots=pivots)
    y = [y[i] * sign[i] for i in range(m)]
    value = sum((cost[j] * x[j] for j in range(n) if x[j]), ZERO)
    return _StdResult(OPTIMAL, x=x, y=y, value=value, pivots=pivots)


# ---------------------------------------------------------------- orientations


def _solve_primal_form(p: LpProblem, max_pivots: int) -> LpSolution:
    # columns: x_j (or x_j+ , x_j-) then one surplus per '>=' row
    pcols = p.columns()
    cols, cost, back = [], [], []
    for j, col in enumerate(pcols):
        cols.append(dict(col))
        cost.append(p.objective[j])
        back.append((j, ONE))
        if p.free[j]:
            cols.append({i: -v for i, v in col.items()})
            cost.append(-p.objective[j])
            back.append((j, -ONE))
    for i, s in enumerate(p.senses):
        if s == GE:
            cols.append({i: -ONE})
            cost.append(ZERO)
            back.append((None, ZERO))
    res = _simplex_std(cols, cost, p.rhs, max_pivots)
    if res.status != OPTIMAL:
        return LpSolution(res.status, pivots=res.pivots, orientation="primal")
    x = [ZERO] * p.n_vars
    for k, (j, sgn) in enumerate(back):
        if j is not None and res.x[k]:
            x[j] += sgn * res.x[k]
    return LpSolution(OPTIMAL, res.value, tuple(x), tuple(res.y),
                      pivots=res.pivots, orientation="primal")


def _solve_dual_form(p: LpProblem, max_pivots: int) -> LpSolution:
    # min -b.y  s.t.  A^T_j . y (+ t_j) = c_j ; y_i >= 0 (split if free), t_j >= 0
    cols, cost, back = [], [], []
    for i, (r, s) in enumerate(zip(p.rows, p.senses)):
        cols.append(dict(r))
        cost.append(-p.rhs[i])
        back.append((i, ONE))
        if s == EQ:
            cols.append({j: -v for j, v in r.items()})
            cost.append(p.rhs[i])
            back.append((i, -ONE))
    for j, f in enumerate(p.free):
        if not f:
            cols.append({j: ONE})
            cost.append(ZERO)
            back.append((None, ZERO))
    res = _simplex_std(cols, cost, p.objective, max_pivots)
    if res.status == UNBOUNDED:
        return LpSolution(INFEASIBLE, pivots=res.pivots, orientation="dual")
    if res.status == INFEASIBLE:
        # dual infeasible: primal is unbounded or infeasible; let the primal decide
        sol = _solve_primal_form(p, max_pivots)
        return LpSolution(sol.status, sol.value, sol.primal, sol.dual,
                          pivots=res.pivots + sol.pivots, orientation="primal")
    y = [ZERO] * p.n_rows
    for k, (i, sgn) in enumerate(back):
        if i is not None and res.x[k]:
            y[i] += sgn * res.x[k]
    x = tuple(-w for w in res.y)
    return LpSolution(OPTIMAL, -res.value, x, tuple(y),
                      pivots=res.pivots, orientation="dual")


def solve(problem: LpProblem, orientation: str = "auto",
          max_nonzeros: int = MAX_NONZEROS, max_pivots: int = MAX_PIVOTS) -> LpSolution:
    """Exact optimum with primal and dual vectors and a checked certificate.

    ``orientation`` is ``"auto"`` (fewer standard-form rows wins),
    ``"primal"`` or ``"dual"``.
    """
    if problem.nonzeros > max_nonzeros:
        raise ResourceError(f"{problem.nonzeros} nonzeros exceed the budget {max_nonzeros}")
    if orientation == "auto":
        orientation = "dual" if problem.n_vars < problem.n_rows else "primal"
    if orientation == "dual":
        sol = _solve_dual_form(problem, max_pivots)
    elif orientation == "primal":
        sol = _solve_primal_form(problem, max_pivots)
    else:
        raise ValueError(f"unknown orientation {orientation!r}")
    if sol.status != OPTIMAL:
        return sol
    ok = verify_certificate(problem, sol)
    if not ok:
        log.error("certificate check failed for a %s-form solve", sol.orientation)
    return LpSolution(sol.status, sol.value, sol.primal, sol.dual, ok,
                      sol.pivots, sol.orientation)
