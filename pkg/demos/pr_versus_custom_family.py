"""
Prime moduli against a wider family
===================================

Adding the composite modulus 6 to the constraint family forces
mu(1 mod 6) = 1/6, while prime moduli alone allow anything in [0, 1/3].
"""

from chargebounds import bounds_report

pr = bounds_report("class(1,6)", 3)
wide = bounds_report("class(1,6)", 3, family=[2, 3, 6])

print("level  PR bracket        family 1,2,3,6")
for a, b in zip(pr.levels, wide.levels):
    print(f"{a.n:>5}  [{a.lower_inf}, {a.upper_sup}]".ljust(25) + f"[{b.lower_inf}, {b.upper_sup}]")

# primes behave the same under both families at level 2 since 6 only
# splits classes that the primes already decide
print(bounds_report("primes", 2, family=[2, 3, 6]).column("upper_sup"))
