"""Exact bounds on how much probability a set of integers can receive from
charges that are uniform on residue classes of the first few primes."""

from .errors import (ChargeBoundsError, ComplexityError, DonorShortageError,
                     ElementNotPresentError, InternalError, LevelTooLargeError,
                     ParseError, ResourceError)
from .numtheory import (Level, ResidueClass, all_tuples, class_contains_composite,
                        class_contains_prime, classes_intersect, crt_invert, crt_shift,
                        first_primes, intersect_classes, is_prime, make_level)
from .setexpr import (AliveVector, NormalForm, alive_bit, alive_vector, member,
                      normalize, parse, to_text)
from .rational_lp import LpProblem, LpSolution, solve, verify_certificate
from .paths import (PathMultiset, ProductSpec, check_thin_count, donate_greedy,
                    exchange, intersect_products_witness, redirect, witness_count)
from .bounds import (BoundsReport, ConstraintFamily, LevelBounds, LowerBound, UpperBound,
                     bounds_report, build_inf_lp, build_lp, lower_sup, upper_sup)

__version__ = "0.1.0"
