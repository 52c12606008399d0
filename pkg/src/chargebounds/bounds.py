"""Certified sup/inf brackets for the probability of a set under PR charges.

At level ``n`` the charges are constrained only on the classes mod ``1`` and
mod the first ``n`` primes (the class PR_n).  The covering LP

    minimize    sum_{m, j} alpha[m, j] / m
    subject to  sum_m alpha[m, s mod m] >= alive[s]     for s in [0, N!_p)

has optimum exactly ``sup`` over PR_n, which is an upper bound for the sup
over PR and is nonincreasing in ``n``.  Marginal-respecting path multisets
are feasible for its dual, so any of them certifies a lower bound on the
same LP value.  Infimum bounds come from the complement:
``inf mu(S) = 1 - sup mu(complement of S)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import paths
from .errors import InternalError, LevelTooLargeError, ResourceError
from .numtheory import DEFAULT_LEVEL_CAP, Level, _crt_weights, make_level
from .paths import PathMultiset, ProductSpec
from .rational_lp import GE, OPTIMAL, LpProblem, LpSolution, solve, verify_certificate
from .setexpr import (
    ALL,
    NONPRIMES,
    PRIMES,
    AliveVector,
    Complement,
    NormalForm,
    alive_vector,
    normalize,
    parse,
    to_text,
)

log = logging.getLogger(__name__)

LP_LEVEL_CAP = 6
LP_ROW_CAP = 30030
GREEDY_LEVEL_CAP = 5
WITNESS_LEVEL_CAP = 7


@dataclass(frozen=True)
class ConstraintFamily:
    """Moduli whose classes carry uniform mass ``1/m``; always includes 1."""

    moduli: Tuple[int, ...]
    kind: str = "custom"

    def __post_init__(self):
        if 1 not in self.moduli:
            raise ValueError("a constraint family must contain the modulus 1")
        if len(set(self.moduli)) != len(self.moduli) or any(m < 1 for m in self.moduli):
            raise ValueError(f"moduli must be distinct positive integers: {self.moduli}")

    @classmethod
    def pr(cls, level: Level) -> "ConstraintFamily":
        return cls((1,) + level.primes, "pr")

    @classmethod
    def custom(cls, moduli: Sequence[int]) -> "ConstraintFamily":
        return cls(tuple(sorted(set(moduli) | {1})), "custom")

    def at_level(self, level: Level) -> "ConstraintFamily":
        """The PR family of ``level``, or the custom moduli dividing its primorial."""
        if self.kind == "pr":
            return ConstraintFamily.pr(level)
        return ConstraintFamily(tuple(m for m in self.moduli if level.primorial % m == 0),
                                self.kind)

    @property
    def is_pr(self) -> bool:
        return self.kind == "pr"


def _family_for(level: Level, family: Optional[ConstraintFamily]) -> ConstraintFamily:
    return ConstraintFamily.pr(level) if family is None else family.at_level(level)


def lp_variables(family: ConstraintFamily) -> List[Tuple[int, int]]:
    return [(m, j) for m in family.moduli for j in range(m)]


def build_lp(alive: AliveVector, family: ConstraintFamily) -> LpProblem:
    """Covering LP over free ``alpha[m, j]``; one ``>=`` row per class mod N!_p."""
    P = alive.level.primorial
    for m in family.moduli:
        if P % m:
            raise ValueError(f"modulus {m} does not divide the primorial {P}")
    vars_ = lp_variables(family)
    index = {v: k for k, v in enumerate(vars_)}
    objective = [Fraction(1, m) for m, _ in vars_]
    one = Fraction(1)
    rows = [{index[(m, s % m)]: one for m in family.moduli} for s in range(P)]
    rhs = [one if b else Fraction(0) for b in alive.bits.tolist()]
    return LpProblem.build(objective, rows, [GE] * P, rhs, free=True)


def build_inf_lp(alive: AliveVector, family: ConstraintFamily) -> LpProblem:
    """Infimum LP for the complement ``T`` of the set whose alive vector is given.

    ``inf mu(T) = max sum alpha/m  s.t.  sum_m alpha[m, s mod m] <= [class s inside T]``,
    and a class lies inside ``T`` exactly when it misses ``S``.  Written as a
    minimization of ``-sum alpha/m`` with negated rows, so ``inf = -value``.
    """
    P = alive.level.primorial
    vars_ = lp_variables(family)
    index = {v: k for k, v in enumerate(vars_)}
    objective = [-Fraction(1, m) for m, _ in vars_]
    rows = [{index[(m, s % m)]: Fraction(-1) for m in family.moduli} for s in range(P)]
    rhs = [Fraction(-1) if not b else Fraction(0) for b in alive.bits.tolist()]
    return LpProblem.build(objective, rows, [GE] * P, rhs, free=True)


@dataclass(frozen=True)
class UpperBound:
    value: Fraction
    source: str
    problem: Optional[LpProblem] = None
    solution: Optional[LpSolution] = None

    @property
    def certificate_ok(self) -> bool:
        return self.solution is not None and self.solution.certificate_ok


@dataclass(frozen=True)
class LowerBound:
    value: Fraction
    method: str
    witness: Optional[PathMultiset] = None
    count: int = 0


def _as_alive(expr, level: Level) -> AliveVector:
    if isinstance(expr, AliveVector):
        return expr
    if isinstance(expr, str):
        expr = parse(expr)
    return alive_vector(expr, level)


def upper_sup(expr, level: Level, family: Optional[ConstraintFamily] = None,
              row_cap: int = LP_ROW_CAP) -> UpperBound:
    """Exact LP optimum (sup over the truncated class) with its certificate."""
    alive = _as_alive(expr, level)
    if level.primorial > row_cap:
        raise ResourceError(f"LP at level {level.n} needs {level.primorial} rows, cap {row_cap}")
    fam = _family_for(level, family)
    problem = build_lp(alive, fam)
    sol = solve(problem)
    if sol.status != OPTIMAL:
        raise InternalError(f"covering LP reported {sol.status}")
    if not sol.certificate_ok:
        raise InternalError("covering LP certificate failed verification")
    return UpperBound(sol.value, "lp", problem, sol)


# ---------------------------------------------------------------- lower bounds


def _nonzero(p):
    return frozenset(range(1, p))


def detect_products(nf: NormalForm, level: Level) -> List[ProductSpec]:
    """Products of residue sets implied by single atoms of the normal form.

    A class ``r mod m`` contributes ``{r mod p}`` on primes dividing ``m``
    and every residue elsewhere; intersecting with the primes removes the
    zero residue elsewhere (coprime classes hold infinitely many primes).
    """
    out = []
    for a in nf.atoms:
        r, m = a.cls.shift, a.cls.modulus
        if a.kind == PRIMES and math.gcd(r, m) != 1:
            continue
        sets = []
        for p in level.primes:
            if m % p == 0:
                sets.append(frozenset({r % p}))
            elif a.kind == PRIMES:
                sets.append(_nonzero(p))
            else:
                sets.append(frozenset(range(p)))
        out.append(ProductSpec.of(level, sets))
    return out


def detect_difference(live: np.ndarray, level: Level) -> Optional[ProductSpec]:
    """Whole product minus the bounding box of the dead tuples."""
    dead = np.argwhere(~live)
    if len(dead) == 0:
        return None
    K = [frozenset(int(v) for v in np.unique(dead[:, n])) for n in range(level.n)]
    return ProductSpec.of(level, [range(p) for p in level.primes], K)


def detect_box(live: np.ndarray, level: Level) -> Optional[ProductSpec]:
    """Grow a product of residue sets from the first alive tuple.

    Coordinates are widened from the largest prime down, residues in
    increasing order, keeping the product inside the alive tuples.
    """
    hits = np.argwhere(live)
    if len(hits) == 0:
        return None
    sets = [[int(v)] for v in hits[0]]
    for n in reversed(range(level.n)):
        for v in range(level.primes[n]):
            if v in sets[n]:
                continue
            trial = sets[:n] + [[v]] + sets[n + 1:]
            if live[np.ix_(*trial)].all():
                sets[n].append(v)
    return ProductSpec.of(level, sets)


def _region_inside(spec: ProductSpec, live: np.ndarray) -> bool:
    return bool(np.all(live[spec.region_tensor()]))


def _candidates(alive: AliveVector, nf: Optional[NormalForm], greedy_cap: int):
    level = alive.level
    live = paths.alive_tensor(alive)
    polish = level.n <= greedy_cap
    yield "full-product", PathMultiset.full_product(level)
    if polish:
        yield "donate-greedy", paths.donate_greedy(level, alive)
    for k, spec in enumerate(detect_products(nf, level) if nf is not None else []):
        if not _region_inside(spec, live):
            continue
        parts = [(frozenset(range(p)) - i, i) for i, p in zip(spec.I, level.primes)]
        W = paths.intersect_products_witness(level, parts)
        yield f"product[{k}]", W
        if polish:
            yield f"product[{k}]+donations", PathMultiset(level, paths._donate(level, live, W))
    box = detect_box(live, level)
    if box is not None:
        parts = [(frozenset(range(p)) - i, i) for i, p in zip(box.I, level.primes)]
        W = paths.intersect_products_witness(level, parts)
        yield "box-product", W
        if polish:
            yield "box-product+donations", PathMultiset(level, paths._donate(level, live, W))
    spec = detect_difference(live, level)
    if spec is not None and paths.check_thin_count(spec) and _region_inside(spec, live):
        W = paths.donate_into_region(spec)
        yield "difference-of-products", W
        if polish:
            yield "difference-of-products+donations", PathMultiset(level, paths._donate(level, live, W))


def _product_formula(nf: Optional[NormalForm], alive: AliveVector) -> LowerBound:
    """``min_n |I_n|/p_n`` over detected products, without building witnesses."""
    level = alive.level
    best = LowerBound(Fraction(0), "trivial")
    if nf is None:
        return best
    for k, spec in enumerate(detect_products(nf, level)):
        # containment check through the alive bits of the product's classes
        v = min(Fraction(len(i), p) for i, p in zip(spec.I, level.primes))
        if v > best.value and _product_alive(spec, alive):
            best = LowerBound(v, f"product[{k}]-formula")
    return best


def _product_alive(spec: ProductSpec, alive: AliveVector) -> bool:
    level = alive.level
    P = level.primorial
    weights = _crt_weights(level)
    sel = np.zeros(1, dtype=np.int64)
    for s, e in zip(spec.I, weights):
        vals = np.array(sorted(s), dtype=np.int64) * (e % P) % P
        sel = (sel[:, None] + vals[None, :]).reshape(-1) % P
    return bool(alive.bits[sel].all())


def lower_sup(expr, level: Level, family: Optional[ConstraintFamily] = None,
              greedy_cap: int = GREEDY_LEVEL_CAP,
              witness_cap: int = WITNESS_LEVEL_CAP) -> LowerBound:
    """Best recounted witness ``count / N!_p`` among the constructions.

    Candidates: the full product, greedy donation, each detected product
    witness and the difference-of-products witness (the last two also
    polished by further donations).  Only witnesses that are feasible for
    the family's dual count.  Above ``witness_cap`` no paths are built and
    the product formula is reported instead.
    """
    if isinstance(expr, str):
        expr = parse(expr)
    nf = None
    if isinstance(expr, NormalForm):
        nf = expr
    elif not isinstance(expr, AliveVector):
        nf = normalize(expr)
    alive = expr if isinstance(expr, AliveVector) else alive_vector(nf, level)
    fam = _family_for(level, family)
    if level.n > witness_cap:
        return _product_formula(nf, alive) if fam.is_pr else LowerBound(Fraction(0), "trivial")
    best: Optional[LowerBound] = None
    for method, W in _candidates(alive, nf, greedy_cap):
        if not W.respects_marginals():
            raise InternalError(f"{method} witness breaks the marginals")
        if not fam.is_pr and not paths.witness_dual_feasible(W, fam.moduli):
            continue
        c = paths.witness_count(W, alive)
        if best is None or c > best.count:
            best = LowerBound(Fraction(c, level.primorial), method, W, c)
    if best is None:
        return LowerBound(Fraction(0), "trivial")
    return best


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class LevelBounds:
    level: Level
    upper_sup: Fraction
    lower_sup: Fraction
    lower_inf: Fraction
    upper_inf: Fraction
    upper: UpperBound
    lower: LowerBound
    complement_upper: UpperBound
    complement_lower: LowerBound

    @property
    def n(self) -> int:
        return self.level.n

    @property
    def primorial(self) -> int:
        return self.level.primorial


@dataclass(frozen=True)
class BoundsReport:
    expression: str
    family: str
    levels: Tuple[LevelBounds, ...] = field(default_factory=tuple)

    def column(self, name: str) -> List[Fraction]:
        return [getattr(lb, name) for lb in self.levels]


def _parse_family(family) -> Optional[ConstraintFamily]:
    if family is None or family == "pr":
        return None
    if isinstance(family, ConstraintFamily):
        return None if family.is_pr else family
    return ConstraintFamily.custom(family)


def _upper_at(alive, level, fam, lp_cap, row_cap, prev: Optional[UpperBound]) -> UpperBound:
    if level.n <= lp_cap and level.primorial <= row_cap:
        return upper_sup(alive, level, fam, row_cap)
    if prev is None:
        raise ResourceError(f"no LP allowed at level {level.n} and no lower level to inherit from")
    # the previous optimum stays feasible: alive bits only refine
    return UpperBound(prev.value, f"inherited:{prev.source}" if not prev.source.startswith("inherited")
                      else prev.source, prev.problem, prev.solution)


def bounds_report(expr, max_level: int, family="pr", level_cap: int = DEFAULT_LEVEL_CAP,
                  lp_cap: int = LP_LEVEL_CAP, row_cap: int = LP_ROW_CAP,
                  greedy_cap: int = GREEDY_LEVEL_CAP,
                  witness_cap: int = WITNESS_LEVEL_CAP) -> BoundsReport:
    """Per-level sup and inf brackets for ``expr`` and levels ``1..max_level``.

    Levels above ``lp_cap`` (or beyond ``row_cap`` LP rows) are witness-only:
    their upper bounds are inherited from the last solved level.
    """
    if max_level < 1:
        raise ValueError("max_level must be >= 1")
    if max_level > level_cap:
        raise LevelTooLargeError(max_level, level_cap)
    text = expr if isinstance(expr, str) else to_text(expr)
    ast = parse(expr) if isinstance(expr, str) else expr
    nf = normalize(ast)
    nf_c = normalize(Complement(ast))
    fam = _parse_family(family)
    out = []
    prev_u = prev_uc = None
    for n in range(1, max_level + 1):
        level = make_level(n, level_cap)
        alive = alive_vector(nf, level)
        alive_c = alive_vector(nf_c, level)
        u = _upper_at(alive, level, fam, lp_cap, row_cap, prev_u)
        uc = _upper_at(alive_c, level, fam, lp_cap, row_cap, prev_uc)
        lo = lower_sup(nf, level, fam, greedy_cap, witness_cap)
        loc = lower_sup(nf_c, level, fam, greedy_cap, witness_cap)
        lb = LevelBounds(level, u.value, lo.value, 1 - uc.value, 1 - loc.value, u, lo, uc, loc)
        _check_level(lb, prev_u)
        out.append(lb)
        prev_u, prev_uc = u, uc
    return BoundsReport(text, "pr" if fam is None else ",".join(map(str, fam.moduli)), tuple(out))


def _check_level(lb: LevelBounds, prev: Optional[UpperBound]) -> None:
    problems = []
    if lb.lower_sup > lb.upper_sup:
        problems.append(f"lower_sup {lb.lower_sup} > upper_sup {lb.upper_sup}")
    if lb.lower_inf > lb.upper_inf:
        problems.append(f"lower_inf {lb.lower_inf} > upper_inf {lb.upper_inf}")
    if prev is not None and lb.upper_sup > prev.value:
        problems.append(f"upper_sup rose from {prev.value} to {lb.upper_sup}")
    for ub in (lb.upper, lb.complement_upper):
        if ub.source == "lp" and not (ub.certificate_ok and verify_certificate(ub.problem, ub.solution)):
            problems.append("LP certificate failed")
    for lo in (lb.lower, lb.complement_lower):
        if lo.witness is not None and not paths.witness_dual_feasible(
                lo.witness, (1,) + lb.level.primes):
            problems.append(f"{lo.method} witness is not dual feasible")
    if problems:
        raise InternalError(f"level {lb.n}: " + "; ".join(problems))
