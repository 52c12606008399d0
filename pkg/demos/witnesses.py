"""
Paths, exchanges and donations
==============================

A path picks one residue per constrained prime; the full product of all
paths gives every residue its fair share.  Swapping one coordinate
between two paths keeps those shares, which is how dead paths (classes
that miss the set) get turned into live ones.
"""

from chargebounds import (PathMultiset, alive_vector, crt_shift, donate_greedy,
                          exchange, make_level, witness_count)
from chargebounds.paths import witness_measure

lv = make_level(2)
J = PathMultiset.full_product(lv)
alive = alive_vector("primes", lv)
print("alive classes mod 6:", alive.shifts())
print("full product hits", witness_count(J, alive), "of", lv.primorial)

# (0, 1) is 4 mod 6 (dead); swapping its second coordinate with (1, 0)
# gives (0, 0) and (1, 1): still one dead path, so look for a better donor
for partner in [(1, 2), (1, 0)]:
    J2 = exchange(J, (0, 1), partner, 1)
    print("swap with", partner, "->", witness_count(J2, alive), "live, marginals kept:",
          J2.respects_marginals())

# greedy donation finds the optimum here
W = donate_greedy(lv, alive)
print("greedy witness:", W.to_pairs())
print("live count:", witness_count(W, alive))
print("as a charge on classes:", {s: str(v) for s, v in witness_measure(W).items()})
print("shift of each path:", {t: crt_shift(lv, t) for t in W.counts})
