"""
How much mass can the primes get?
=================================

Charges that give every residue class mod p the mass 1/p can still put a
lot of weight on the primes.  Truncating to the first n primes gives an
exact LP (upper bound) and a path-multiset witness (lower bound).
"""

from fractions import Fraction

from chargebounds import bounds_report, make_level, upper_sup

# the report brackets sup mu(primes) at each truncation level
report = bounds_report("primes", 5)
print(f"{'level':>5} {'N!_p':>6} {'upper':>10} {'lower':>12}")
for lb in report.levels:
    print(f"{lb.n:>5} {lb.primorial:>6} {str(lb.upper_sup):>10} {str(lb.lower_sup):>12}")

# every lower bound stays at or above one half: the odd numbers carry 1/2
# and a witness can place all of it on classes that still hold primes
assert all(v >= Fraction(1, 2) for v in report.column("lower_sup"))

# the upper bounds only shrink as more primes are constrained
ups = report.column("upper_sup")
print("nonincreasing:", all(a >= b for a, b in zip(ups, ups[1:])))

# the dual of the LP is itself a charge on the classes mod N!_p
ub = upper_sup("primes", make_level(3))
y = ub.solution.dual
print("dual mass on classes mod 30:", [str(v) for v in y if v])
print("inf mu(primes) bracket:", report.levels[-1].lower_inf, report.levels[-1].upper_inf)
