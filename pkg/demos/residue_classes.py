"""
Residue classes with composite moduli
=====================================

Only prime moduli are constrained, so a class like 1 mod 6 is not forced
to get 1/6.  Its sup and inf are pinned down exactly once 2 and 3 are
among the constrained primes.
"""

from chargebounds import bounds_report

for text in ["class(1,6)", "class(3,4)", "class(1,4)", "class(0,2)"]:
    r = bounds_report(text, 4)
    print(text)
    for lb in r.levels:
        print(f"  level {lb.n}: sup in [{lb.lower_sup}, {lb.upper_sup}],"
              f" inf in [{lb.lower_inf}, {lb.upper_inf}]")

# 1 mod 6 sits inside 1 mod 2 and 1 mod 3, so its mass is at most 1/3;
# a witness reaches 1/3, and its complement can take everything
