#!/usr/bin/env python3
"""The delayed formulation, its jump chain, and the deletion-graph coupling.

The delayed model samples an arbitrary vertex pair each step: failure-coin
samples leave the companion deletion graph minus that pair (and delete the
model edge too when it was discordant), success-coin samples on discordant
edges perform the usual opinion update, and everything else idles.  Its
jump chain (the subsequence of non-idle steps on discordant edges) has the
same law as the direct model, and the deletion graph stays a subgraph of
the model graph at every step.  This script measures all three claims.
"""

import sys

from offvoter import delayed
from offvoter.model import ModelParams


def main():
    params = ModelParams(n=48, q=0.5)
    outcome, report = delayed.run_delayed(params, seed=3)
    print("delayed run at n=%d, q=%.1f:" % (params.n, params.q))
    print("  global steps %d, jump steps %d (ratio %.1f)"
          % (report.global_steps, outcome.tau_abs,
             report.global_steps / outcome.tau_abs))
    print("  failure-coin samples %d, opinion updates %d"
          % (report.x_e_count, report.x_op_count))
    print("  containment violations: %d (checked every step, plus %d "
          "full sweeps)" % (report.violations, report.full_checks))
    print("  outcome: %s" % outcome.outcome_class.value)

    print("\njump chain vs direct model, n=6, q=0.5, 20000 runs each:")
    eq = delayed.jump_chain_equivalence(6, 0.5, 20000, seed=9)
    print("  outcome-class TV %.4f, joint TV %.4f over %d support points"
          % (eq.tv_class_distance, eq.tv_distance, eq.support_size))
    print("  chi-square on the joint: p = %.4f" % eq.chi2_p_value)

    thresholds = delayed.connectivity_thresholds(256, kappa=0.5, eps=0.2,
                                                 q=0.5)
    print("\ndeletion-graph window at n=256, q=0.5 (kappa=0.5, eps=0.2):")
    print("  n1 = %.0f global steps, n2 = %.0f" %
          (thresholds.n1, thresholds.n2))
    audit = delayed.deletion_graph_audit(ModelParams(n=256, q=0.5),
                                         kappa=0.5, eps=0.2, runs=10,
                                         seed=1)
    print("  connected with min degree >= 128 through step %.0f in "
          "%.0f%% of 10 audited runs" % (audit.n2, 100 * audit.pass_rate))
    return 0


if __name__ == "__main__":
    sys.exit(main())
