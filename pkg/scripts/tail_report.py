#!/usr/bin/env python3
"""Fitted jump-size tail across the phase diagram.

Fits log p_i ~ c + e*log(i) + r*i over an i-window for a grid of alpha
values; prints the power-law exponent e and exponential rate r.  Expected:
e -> -3/2 below alpha = 2/3 (r = 0), e -> -5/2 at 2/3, and r -> log(2/alpha
- 2) above.

Usage: python3 scripts/tail_report.py [--i-lo 50] [--i-hi 800]
"""

import argparse
import math
import sys
from fractions import Fraction

from hptri.peeling_law import law_from_alpha, tail_exponent


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--i-lo", type=int, default=50)
    ap.add_argument("--i-hi", type=int, default=800)
    args = ap.parse_args(argv)
    grid = (Fraction(1, 10), Fraction(1, 3), Fraction(1, 2), Fraction(3, 5),
            Fraction(2, 3), Fraction(7, 10), Fraction(4, 5), Fraction(9, 10))
    print("%-8s %-13s %12s %12s %12s" % (
        "alpha", "phase", "exponent", "rate", "gamma_pred"))
    for a in grid:
        law = law_from_alpha(a)
        e, r = tail_exponent(law, args.i_lo, args.i_hi)
        pred = math.log(2 / float(a) - 2) if a > Fraction(2, 3) else 0.0
        print("%-8s %-13s %12.6f %12.6f %12.6f"
              % (a, law.phase, e, r, pred))
    return 0


if __name__ == "__main__":
    sys.exit(main())
