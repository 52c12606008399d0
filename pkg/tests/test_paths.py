import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from chargebounds.errors import DonorShortageError, ElementNotPresentError
from chargebounds.numtheory import all_tuples, crt_shift, make_level
from chargebounds.paths import (
    PathMultiset, ProductSpec, check_thin_count, donate_greedy, donate_into_region,
    exchange, intersect_products_witness, product_bottleneck, product_count, redirect,
    redirect_pairs, thin_count_sides, witness_count, witness_dual_feasible,
    witness_measure)
from chargebounds.setexpr import alive_vector
from oracles import integral_max

L2 = make_level(2)


def _recount(J):
    """Per-coordinate residue counts, recomputed from the expanded elements."""
    out = [[0] * p for p in J.level.primes]
    for t in J.elements():
        for n, v in enumerate(t):
            out[n][v] += 1
    return out


def _random_multiset(rng, level, size):
    counts = {}
    for _ in range(size):
        t = tuple(rng.randrange(p) for p in level.primes)
        counts[t] = counts.get(t, 0) + 1
    return PathMultiset(level, counts)


# ---------------------------------------------------------------- multisets

def test_full_product_respects_marginals():
    for n in (1, 2, 3, 4):
        J = PathMultiset.full_product(make_level(n))
        assert len(J) == make_level(n).primorial and J.respects_marginals()


def test_multiset_validation():
    with pytest.raises(ValueError):
        PathMultiset(L2, {(0, 3): 1})
    with pytest.raises(ValueError):
        PathMultiset(L2, {(0, 1): -1})
    assert PathMultiset(L2, {(0, 1): 0}) == PathMultiset(L2, {})


def test_to_pairs():
    J = PathMultiset(L2, {(1, 1): 2, (0, 2): 1})
    assert J.to_pairs() == [([0, 2], 1), ([1, 1], 2)]


# ---------------------------------------------------------------- exchange

def test_exchange_example():
    # coordinates are 0-based: "coordinate 2" is index 1
    J = PathMultiset(L2, {(1, 1): 1, (0, 2): 1})
    assert exchange(J, (1, 1), (0, 2), 1) == PathMultiset(L2, {(1, 2): 1, (0, 1): 1})


def test_exchange_of_equal_paths():
    J = PathMultiset(L2, {(1, 1): 2})
    assert exchange(J, (1, 1), (1, 1), 0) == J
    with pytest.raises(ElementNotPresentError):
        exchange(PathMultiset(L2, {(1, 1): 1}), (1, 1), (1, 1), 0)
    with pytest.raises(ElementNotPresentError):
        exchange(J, (1, 1), (0, 0), 0)


def test_exchange_preserves_projections_on_random_cases():
    rng = random.Random(5)
    for _ in range(50):
        lv = make_level(rng.randint(1, 4))
        J = _random_multiset(rng, lv, rng.randint(2, 40))
        j, k = rng.sample(list(J.elements()), 2)
        J2 = exchange(J, j, k, rng.randrange(lv.n))
        assert _recount(J2) == _recount(J) and len(J2) == len(J)


# ---------------------------------------------------------------- redirect

def test_redirect_same_coordinate_is_identity():
    J = PathMultiset.full_product(L2)
    assert redirect(J, 0, 0, {1}, {1}) == J


def test_redirect_example():
    J = redirect(PathMultiset.full_product(L2), 0, 1, {1}, {1, 2})
    assert all(t[1] in (1, 2) for t in J.elements() if t[0] == 1)
    assert J.respects_marginals()


def test_redirect_donor_shortage():
    with pytest.raises(DonorShortageError) as info:
        redirect(PathMultiset.full_product(L2), 0, 1, {0, 1}, {0})
    assert (info.value.recipients, info.value.donors) == (6, 2)
    assert "6" in str(info.value) and "2" in str(info.value)


@settings(max_examples=100)
@given(st.integers(1, 3), st.randoms(use_true_random=False))
def test_redirect_postcondition(n, rnd):
    lv = make_level(n)
    if n == 1:
        return
    i, j = rnd.sample(range(n), 2)
    A_i = {v for v in range(lv.primes[i]) if rnd.random() < 0.5}
    A_j = {v for v in range(lv.primes[j]) if rnd.random() < 0.6}
    J = PathMultiset.full_product(lv)
    need = sum(1 for t in J.elements() if t[i] in A_i)
    have = sum(1 for t in J.elements() if t[j] in A_j)
    if need > have:
        with pytest.raises(DonorShortageError):
            redirect(J, i, j, A_i, A_j)
        return
    J2 = redirect(J, i, j, A_i, A_j)
    assert _recount(J2) == _recount(J)
    assert all(t[j] in A_j for t in J2.elements() if t[i] in A_i)


# ---------------------------------------------------------------- intersecting products

def _partition(B, p):
    return (set(range(p)) - set(B), set(B))


def test_intersect_products_examples():
    L1 = make_level(1)
    J = intersect_products_witness(L1, [({0}, {1})])
    assert product_count(J, [{1}]) == 1
    J = intersect_products_witness(L2, [_partition({1}, 2), _partition({1, 2}, 3)])
    assert product_count(J, [{1}, {1, 2}]) == 3


def test_intersect_products_small_bottleneck():
    # B = ({0,1}, {1}): coordinate 1 caps the count at (6/3)*1 = 2
    B = [{0, 1}, {1}]
    assert product_bottleneck(L2, B) == 1
    J = intersect_products_witness(L2, [_partition(b, p) for b, p in zip(B, L2.primes)])
    assert product_count(J, B) == 2
    assert integral_max(L2.primes, lambda t: t[0] in B[0] and t[1] in B[1]) == 2


def test_intersect_products_degenerate():
    J = intersect_products_witness(L2, [_partition(set(), 2), _partition(set(), 3)])
    assert J == PathMultiset.full_product(L2)
    assert product_count(J, [set(), set()]) == 0
    with pytest.raises(ValueError):
        intersect_products_witness(L2, [({0}, {0, 1}), ({0, 1, 2}, set())])


def test_intersect_products_random_families_step_by_step():
    rng = random.Random(20240612)
    for _ in range(100):
        lv = make_level(rng.randint(1, 3))
        B = [{v for v in range(p) if rng.random() < 0.5} for p in lv.primes]
        parts = [_partition(b, p) for b, p in zip(B, lv.primes)]
        k = product_bottleneck(lv, B)
        # replay the construction one exchange at a time
        J = PathMultiset.full_product(lv)
        base = _recount(J)
        for n in range(lv.n):
            if n == k:
                continue
            for r, d in redirect_pairs(J, k, n, B[k], B[n]):
                J = exchange(J, r, d, n)
                assert _recount(J) == base
        witness = intersect_products_witness(lv, parts)
        assert witness == J and witness.respects_marginals()
        stated = lv.primorial // lv.primes[k] * len(B[k])
        assert product_count(witness, B) == stated
        # no marginal-respecting multiset can do better: each coordinate caps it
        assert stated == min(lv.primorial // p * len(b) for b, p in zip(B, lv.primes))


# ---------------------------------------------------------------- thin count

def test_thin_count_empty_k():
    spec = ProductSpec.of(make_level(3), [{1}, {0, 1}, {3}])
    assert thin_count_sides(spec)[1] == 0 and check_thin_count(spec)


@pytest.mark.parametrize("n, i1, i2", [(2, 0, 1), (3, 0, 1), (3, 1, 2), (4, 0, 3), (5, 2, 4)])
def test_thin_count_two_prime_factor_class(n, i1, i2):
    lv = make_level(n)
    full = [set(range(p)) for p in lv.primes]
    K = [set(s) for s in full]
    K[i1], K[i2] = {1}, {1}
    left, right = thin_count_sides(ProductSpec.of(lv, full, K))
    rest = math.prod(len(full[m]) for m in range(n) if m not in (i1, i2))
    assert right == rest
    assert left == (lv.primes[i1] - 1) * (lv.primes[i2] - 1) * rest
    assert check_thin_count(ProductSpec.of(lv, full, K))


def test_thin_count_single_free_coordinate_fails():
    spec = ProductSpec.of(L2, [{1}, {1, 2}], [{1}, {1}])
    assert thin_count_sides(spec) == (0, 1)
    assert not check_thin_count(spec)


def test_donations_fill_a_thin_region():
    lv = make_level(3)
    full = [set(range(p)) for p in lv.primes]
    K = [{1}, {1}, set(range(5))]
    spec = ProductSpec.of(lv, full, K)
    J = donate_into_region(spec)
    region = spec.region_tensor()
    assert J.respects_marginals()
    assert sum(c for t, c in J.counts.items() if region[t]) == lv.primorial


# ---------------------------------------------------------------- donation

def test_donate_greedy_extremes():
    for n in (1, 2, 3):
        lv = make_level(n)
        full = donate_greedy(lv, alive_vector("all", lv))
        assert full == PathMultiset.full_product(lv)
        assert witness_count(full, alive_vector("all", lv)) == lv.primorial
        assert witness_count(donate_greedy(lv, alive_vector("empty", lv)),
                             alive_vector("empty", lv)) == 0


def test_donate_greedy_primes_level_two():
    av = alive_vector("primes", L2)
    J = donate_greedy(L2, av)
    assert witness_count(J, av) == 5 and J.respects_marginals()


def test_witness_count_examples():
    J = PathMultiset.full_product(L2)
    assert witness_count(J, alive_vector("class(1,6)", L2)) == 1
    assert witness_count(J, alive_vector("all", L2)) == 6


ACCEPTANCE_SETS = ["primes", "!primes", "class(1,6)", "!class(1,6)", "class(3,4)",
                   "!class(3,4)", "{5}", "!{5}"]


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("text", ACCEPTANCE_SETS)
def test_donate_greedy_reaches_integral_maximum(text, n):
    lv = make_level(n)
    av = alive_vector(text, lv)
    got = witness_count(donate_greedy(lv, av), av)
    live = lambda t: bool(av[crt_shift(lv, t)])  # noqa: E731
    assert got == integral_max(lv.primes, live)


@settings(max_examples=40)
@given(st.integers(1, 4), st.randoms(use_true_random=False))
def test_donation_never_breaks_marginals_and_is_dual_feasible(n, rnd):
    lv = make_level(n)
    bits = [rnd.random() < 0.4 for _ in range(lv.primorial)]
    from chargebounds.setexpr import AliveVector
    import numpy as np
    av = AliveVector(lv, np.array(bits, dtype=bool))
    J = donate_greedy(lv, av)
    assert J.respects_marginals()
    assert witness_count(J, av) >= sum(bits)
    assert witness_dual_feasible(J, (1,) + lv.primes)
    y = witness_measure(J)
    assert sum(y.values()) == 1 and all(v > 0 for v in y.values())


def test_dual_feasibility_detects_bad_measure():
    J = PathMultiset(L2, {(0, 0): 6})
    assert not witness_dual_feasible(J, (1, 2, 3))
    assert witness_dual_feasible(J, (1,))


def test_integral_oracle_against_naive_enumeration():
    # all multisets of 6 paths at level 2, filtered by the marginals
    tuples = list(all_tuples(L2))
    feasible = []
    for combo in itertools.combinations_with_replacement(tuples, 6):
        J = PathMultiset(L2, {t: combo.count(t) for t in set(combo)})
        if J.respects_marginals():
            feasible.append(combo)
    rng = random.Random(3)
    for _ in range(30):
        live_set = {t for t in tuples if rng.random() < 0.5}
        naive = max(sum(1 for t in combo if t in live_set) for combo in feasible)
        assert integral_max(L2.primes, lambda t: t in live_set) == naive
