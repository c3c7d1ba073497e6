#!/usr/bin/env python3
"""Three opinions instead of two: more segregation, same machinery.

With K initial opinion groups the update rule stays a fair coin: the
sampled discordant edge either aligns both endpoints on the higher label
or on the lower one.  More groups mean more initially discordant edges
and a harder road to global consensus, so segregation becomes more
likely at the same n and q.
"""

import sys
from collections import Counter

from offvoter.model import ModelParams, run_to_absorption


def main(n=63, q=0.3, runs=150):
    for k in (2, 3):
        params = ModelParams(n=n, q=q, k=k)
        opinion = params.opinion_of()
        discordant = sum(1 for (a, b) in params.edge_list()
                         if opinion[a] != opinion[b])
        print("K=%d, initial counts %s, %d initially discordant edges"
              % (k, params.opinion_counts(), discordant))
        tally = Counter()
        survivors = Counter()
        for rep in range(runs):
            out = run_to_absorption(params, seed=1000 * k + rep)
            tally[out.outcome_class.value] += 1
            survivors[out.n_surviving] += 1
        for name, count in sorted(tally.items()):
            print("  %-24s %3d / %d" % (name, count, runs))
        print("  surviving-opinion counts: %s"
              % dict(sorted(survivors.items())))
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
