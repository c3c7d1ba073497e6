#!/usr/bin/env python3
"""Walk one trajectory of the opinion/deletion dynamics, step by step.

A population of n agents sits on a complete graph, half holding opinion 0
and half opinion 1.  Each step picks a uniformly random edge whose
endpoints disagree; with probability q both endpoints adopt one shared
opinion (fair coin), otherwise the edge is deleted for good.  The process
stops when no edge is discordant.
"""

import json
import sys
import tempfile
from pathlib import Path

from offvoter.model import ModelParams, run_to_absorption


def main(seed=7):
    params = ModelParams(n=24, q=0.4)
    print("n = %d agents, q = %.2f, initial opinions %s"
          % (params.n, params.q, params.opinion_counts()))

    trace_path = Path(tempfile.mkdtemp()) / "trace.jsonl"
    outcome = run_to_absorption(params, seed, trace=str(trace_path))

    print("\nfirst five steps:")
    with open(trace_path, encoding="utf-8") as fh:
        for line in [next(fh) for _ in range(5)]:
            ev = json.loads(line)
            print("  step %4d  %-16s edge %-9s counts %s  discordant %d"
                  % (ev["n"], ev["kind"], ev["edge"], ev["counts"],
                     ev["discordant"]))

    print("\nabsorbed after %d steps (%d opinion updates, %d deletions)"
          % (outcome.tau_abs, outcome.s_op_final, outcome.s_del_final))
    print("outcome: %s" % outcome.outcome_class.value)
    print("final opinion counts: %s" % (outcome.final_opinion_counts,))
    print("component sizes: %s" % (outcome.component_sizes,))
    print("edges remaining: %d of %d"
          % (outcome.edges_remaining, params.initial_edge_count()))

    # the same seed always reproduces the same trajectory, and the
    # compiled and pure-python engines agree draw for draw
    again = run_to_absorption(params, seed, engine="python")
    assert again == outcome
    print("\nre-running with the python engine reproduced the outcome")
    return 0


if __name__ == "__main__":
    sys.exit(main(int(sys.argv[1]) if len(sys.argv) > 1 else 7))
