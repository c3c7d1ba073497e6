"""Command-line interface.

Subcommands: simulate (one run, JSON outcome to stdout), sweep (config
JSON to CSV outputs), figures (derive figN.csv from a sweep directory),
check (self-check suites), beta (series evaluation), oracle (exact
survival-curve table).  Exit codes: 0 success, 1 failed check/assertion,
2 configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import asymptotics, delayed, experiments, model
from .rng import Xoshiro256


def _parse_init(text: str, k: int):
    if text == "balanced":
        return "balanced"
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise experiments.ConfigError(
            "--init must be 'balanced' or comma-separated counts") from None


def cmd_simulate(args) -> int:
    params = model.ModelParams(n=args.n, q=args.q, k=args.k, eps=args.eps,
                               init_opinions=_parse_init(args.init, args.k))
    engine = "python" if args.trace_out else args.engine
    outcome = model.run_to_absorption(params, args.seed, engine=engine,
                                      trace=args.trace_out)
    doc = {
        "outcome": outcome.outcome_class.value,
        "eps_consensus": outcome.eps_consensus,
        "strong_segregation": outcome.strong_segregation,
        "tau_abs": outcome.tau_abs,
        "final_opinion_counts": list(outcome.final_opinion_counts),
        "z_min_final": outcome.z_min_final,
        "n_surviving": outcome.n_surviving,
        "n_components": len(outcome.component_sizes),
        "c1": outcome.component_sizes[0],
        "edges_remaining": outcome.edges_remaining,
        "min_degree_final": outcome.min_degree_final,
        "s_op": outcome.s_op_final,
        "s_del": outcome.s_del_final,
        "seed": outcome.seed,
    }
    print(json.dumps(doc, indent=2))
    return 0


def cmd_sweep(args) -> int:
    config = experiments.ExperimentConfig.from_json_file(args.config)
    result = experiments.run_sweep(config)
    print("runs:      %s" % result.runs_csv)
    print("aggregate: %s" % result.aggregate_csv)
    print("manifest:  %s" % result.manifest)
    return 0


def cmd_figures(args) -> int:
    path = experiments.figure_datasets(args.from_dir, args.which)
    print(path)
    return 0


def cmd_beta(args) -> int:
    ev = asymptotics.beta(args.x, args.tol)
    print("beta(%.17g) = %.17g   (%d terms, tol %.3g)"
          % (ev.x, ev.value, ev.terms_used, ev.tol))
    return 0


def cmd_oracle(args) -> int:
    curve = asymptotics.srw_exit_survival(args.n, args.start, args.horizon)
    steps = sorted({min(args.horizon, round(args.horizon * i / 20))
                    for i in range(21)})
    print("exact survival, interval n=%d, start=%d" % (args.n, args.start))
    print("%10s  %12s" % ("step", "P(tau>step)"))
    for m in steps:
        print("%10d  %12.8f" % (m, curve.probabilities[m]))
    print("max mass-conservation error: %.3e" % curve.max_mass_error)
    return 0


def _report(lines, name: str, ok: bool, detail: str) -> bool:
    lines.append("%s  %s: %s" % ("PASS" if ok else "FAIL", name, detail))
    return ok


def _check_invariants(seed: int) -> tuple:
    lines = []
    ok = True
    rng = Xoshiro256(seed)
    # cross-engine identity over a spread of small configurations
    mismatches = 0
    cases = 0
    for n in (2, 3, 5, 8, 13):
        for q in (0.0, 0.3, 0.7, 1.0):
            for k in (2, 3):
                if k > n:
                    continue
                for _ in range(5):
                    s = rng.next_u64()
                    a = model.run_to_absorption(
                        model.ModelParams(n=n, q=q, k=k), s, engine="python")
                    b = model.run_to_absorption(
                        model.ModelParams(n=n, q=q, k=k), s,
                        engine="compiled")
                    cases += 1
                    if a != b:
                        mismatches += 1
    ok &= _report(lines, "engine-identity",
                  mismatches == 0, "%d/%d runs identical"
                  % (cases - mismatches, cases))
    # stepwise bookkeeping on small runs
    bad = 0
    for rep in range(20):
        params = model.ModelParams(n=10, q=0.4, k=2)
        state = model.init_state(params)
        while len(state.discordant) > 0:
            model.step(state, rng)
            recomputed = {e for e in state.graph.edges()
                          if state.opinion[e[0]] != state.opinion[e[1]]}
            if recomputed != set(state.discordant):
                bad += 1
            if state.s_op + state.s_del != state.step_count:
                bad += 1
            zmin = min(state.opinion_counts)
            mindeg = state.graph.min_degree()
            if mindeg >= zmin and len(state.discordant) < zmin * (mindeg - zmin):
                bad += 1
    ok &= _report(lines, "stepwise-bookkeeping", bad == 0,
                  "%d violations over 20 traced runs" % bad)
    walk = model.opinion_walk_check(model.ModelParams(n=32, q=0.5), 50, rng)
    ok &= _report(lines, "opinion-walk", walk.passed,
                  "+1 freq %.4f over %d updates, runs-test p=%.4f"
                  % (walk.n_up / max(1, walk.n_updates), walk.n_updates,
                     walk.runs_p_value))
    return ok, lines


def _check_coupling(seed: int) -> tuple:
    lines = []
    ok = True
    params = model.ModelParams(n=32, q=0.5)
    violations = 0
    for i in range(10):
        try:
            delayed.run_delayed(params, seed + i, full_check_every=16)
        except delayed.CouplingViolation:
            violations += 1
    ok &= _report(lines, "subgraph-coupling", violations == 0,
                  "%d violations over 10 runs at n=32" % violations)
    report = delayed.deletion_graph_audit(
        model.ModelParams(n=64, q=0.5), kappa=0.5, eps=0.2, runs=20,
        seed=seed)
    ok &= _report(lines, "degree-audit", report.pass_rate >= 0.9,
                  "pass rate %.2f to horizon %.0f" % (report.pass_rate,
                                                      report.n2))
    eq = delayed.jump_chain_equivalence(5, 0.5, 4000, seed)
    ok &= _report(lines, "jump-chain", eq.tv_class_distance <= 0.05
                  and eq.chi2_p_value >= 0.001,
                  "class TV %.4f (joint %.4f), chi2 p %.4f"
                  % (eq.tv_class_distance, eq.tv_distance, eq.chi2_p_value))
    return ok, lines


def _check_oracle(_seed: int) -> tuple:
    lines = []
    ok = True
    worst = 0.0
    for x in (0.05, 0.1, 0.2, 0.5, 1.0):
        curve = asymptotics.srw_exit_survival(200, 100, int(x * 200 * 200))
        diff = abs(curve.probabilities[int(x * 200 * 200)]
                   - asymptotics.beta(x).value)
        worst = max(worst, diff)
    ok &= _report(lines, "series-vs-dp", worst <= 0.01,
                  "max |DP - series| = %.5f at n=200" % worst)
    curve = asymptotics.srw_exit_survival(100, 50, 20 * 100 * 100)
    tail = curve.probabilities[-1]
    ok &= _report(lines, "long-horizon", tail <= 0.001,
                  "survival %.2e after 20*n^2 steps" % tail)
    ok &= _report(lines, "mass-conservation", curve.max_mass_error <= 1e-12,
                  "max error %.2e" % curve.max_mass_error)
    return ok, lines


def _check_lemma64(seed: int) -> tuple:
    lines = []
    ok = True
    p512 = asymptotics.deletion_bound_probability(
        asymptotics.DeletionBoundParams(n=512, q=0.3, r=1.1))
    ok &= _report(lines, "exact-tail", p512 >= 0.999,
                  "P = %.6f at n=512, q=0.3, r=1.1" % p512)
    params = asymptotics.DeletionBoundParams(n=128, q=0.3, r=1.1)
    exact = asymptotics.deletion_bound_probability(params)
    mc = asymptotics.deletion_bound_probability_mc(params, 3000, seed)
    se = max((exact * (1 - exact) / 3000) ** 0.5, 1.0 / 3000)
    ok &= _report(lines, "mc-agreement", abs(mc - exact) <= 4 * se,
                  "exact %.6f vs mc %.6f (4se = %.2g)"
                  % (exact, mc, 4 * se))
    return ok, lines


def _check_regimes(_seed: int) -> tuple:
    lines = []
    ok = True
    r32 = experiments.regime_checks(
        "thm32", {"n_grid": (64, 256), "replicates": 100})
    p_lo, p_hi = r32.points[0].p_hat, r32.points[-1].p_hat
    ok &= _report(lines, "slow-q-regime",
                  p_hi >= p_lo - 0.05 and p_hi >= 0.6,
                  "p_hat %.2f -> %.2f on the reduced ladder" % (p_lo, p_hi))
    r34 = experiments.regime_checks(
        "thm34", {"n_grid": (256,), "replicates": 100})
    ok &= _report(lines, "fast-q-regime", r34.points[0].p_hat >= 0.9,
                  "p_hat %.2f at n=256" % r34.points[0].p_hat)
    r45 = experiments.regime_checks(
        "prop45", {"n_grid": (129,), "replicates": 100})
    ok &= _report(lines, "three-opinion-survival",
                  r45.points[0].p_hat >= 0.3,
                  "p_hat %.2f at n=129" % r45.points[0].p_hat)
    return ok, lines


_SUITES = {
    "invariants": _check_invariants,
    "coupling": _check_coupling,
    "oracle": _check_oracle,
    "lemma64": _check_lemma64,
    "regimes": _check_regimes,
}


def cmd_check(args) -> int:
    ok, lines = _SUITES[args.suite](args.seed)
    for line in lines:
        print(line)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offvoter",
        description="Offended voter model simulator and verification tool")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one instance to absorption")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--init", default="balanced",
                   help="'balanced' or comma-separated per-opinion counts")
    p.add_argument("--engine", choices=("compiled", "python"),
                   default="compiled")
    p.add_argument("--trace-out", default=None,
                   help="write a JSON-lines step trace (python engine)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figures", help="derive a figure dataset CSV")
    p.add_argument("--which", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--from", dest="from_dir", required=True)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("check", help="run a self-check suite")
    p.add_argument("--suite", choices=sorted(_SUITES), required=True)
    p.add_argument("--seed", type=int, default=20260825)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("beta", help="evaluate the survival series")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_beta)

    p = sub.add_parser("oracle", help="exact survival-curve table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # every domain error (config, schema, parameter, threshold) is a
        # ValueError subclass
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("io error: %s" % exc, file=sys.stderr)
        return 2
    except AssertionError as exc:
        print("assertion failed: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
