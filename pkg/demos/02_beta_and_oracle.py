#!/usr/bin/env python3
"""The exit-time tail beta(x) two ways: exact dynamic program vs series.

beta(x) is the probability that a centered +/-1 random walk on {0..N},
started at N/2, has not yet hit either boundary after x*N^2 steps (in the
large-N limit).  The package carries an exact finite-N computation
(srw_exit_survival, a vector dynamic program over the walk's distribution)
and the closed-form alternating series (beta).  This script shows how
quickly the finite-N curve converges to the series, which is the
calibration behind all the segregation-probability bounds.
"""

import sys

from offvoter.asymptotics import beta, srw_exit_survival, theorem31_bound


def main():
    xs = [0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0]
    print("x        beta(x)      N=50        N=200       |diff at 200|")
    curve = {}
    for n in (50, 200):
        curve[n] = srw_exit_survival(n, n // 2, int(2.0 * n * n))
    for x in xs:
        series = beta(x).value
        vals = [curve[n].probabilities[int(x * n * n)] for n in (50, 200)]
        print("%-8.2f %-12.6f %-11.6f %-11.6f %.6f"
              % (x, series, vals[0], vals[1], abs(vals[1] - series)))

    print("\nbeta(0) = %r (exactly, by the Leibniz series)" % beta(0.0).value)
    print("mass-conservation error of the N=200 program: %.2e"
          % curve[200].max_mass_error)

    print("\nsegregation lower bound beta(q/(2(1-q))) on a q grid:")
    for q in (0.1, 0.3, 0.5, 0.7, 0.9):
        print("  q=%.1f  bound=%.4f" % (q, theorem31_bound(q, 0.5, 0.0)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
