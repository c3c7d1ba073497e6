"""End-to-end acceptance checks for the package.

Each test covers one headline claim at its stated tolerance and prints a
single PASS/FAIL line with the measured numbers (visible live thanks to
capsys.disabled()).  Everything is seeded, so a green run here is
reproducible bit for bit.

The segregation-bound sweep (N=512, nine q values, 500 replicates) is the
dominant cost, around ten minutes on one core; it is computed once per
module and shared by three tests.

Desk-scale note: the checks here run reduced grids.  The full-scale
profile (N=1024, 1000 replicates, 21 q values) lives in configs/full.json
and runs the same code paths, just longer.
"""

import csv
import math
from pathlib import Path

import pytest

from offvoter import asymptotics, delayed, experiments
from offvoter.model import ModelParams, Outcome


def announce(capsys, name, ok, detail):
    with capsys.disabled():
        print("\n%s %s: %s" % ("PASS" if ok else "FAIL", name, detail))


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def sweep_to_dir(tmp_root, name, **kwargs):
    out = tmp_root / name
    cfg = experiments.ExperimentConfig(name=name, output_dir=str(out),
                                       **kwargs)
    experiments.run_sweep(cfg)
    return cfg, out


@pytest.fixture(scope="module")
def tmp_root(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.fixture(scope="module")
def bound_sweep(tmp_root):
    """N=512 segregation sweep shared by the bound/closeness/tau tests."""
    q_grid = [round(0.1 * i, 1) for i in range(1, 10)]
    cfg, out = sweep_to_dir(tmp_root, "seg-bound-512", n_grid=[512],
                            q_grid=q_grid, replicates=500, base_seed=31)
    return cfg, read_rows(out / "aggregate.csv")


@pytest.fixture(scope="module")
def degenerate_sweep(tmp_root):
    """q in {0, 1} at N=64, also the rerun target for the byte check."""
    cfg, out = sweep_to_dir(tmp_root, "degenerate-64", n_grid=[64],
                            q_grid=[0.0, 1.0], replicates=100, base_seed=2)
    return cfg, out


@pytest.fixture(scope="module")
def matched_k_sweeps(tmp_root):
    """K=3 versus K=2 at the same N=513, q=0.3, and replicate seeds."""
    rows = {}
    for k in (3, 2):
        _, out = sweep_to_dir(tmp_root, "matched-k%d" % k, n_grid=[513],
                              q_grid=[0.3], k=k, replicates=300,
                              base_seed=12)
        rows[k] = read_rows(out / "aggregate.csv")[0]
    return rows


def test_exit_survival_matches_beta_series(capsys):
    n = 200
    xs = (0.05, 0.1, 0.2, 0.5, 1.0)
    curve = asymptotics.srw_exit_survival(n, n // 2,
                                          int(xs[-1] * n * n))
    worst = max(abs(curve.probabilities[int(x * n * n)]
                    - asymptotics.beta(x).value) for x in xs)
    announce(capsys, "oracle-series-agreement",
             worst <= 0.01,
             "max |exact - series| = %.5f over x in %s (tol 0.01)"
             % (worst, list(xs)))
    assert worst <= 0.01


def test_degenerate_q_endpoints_exact(capsys, degenerate_sweep):
    _, out = degenerate_sweep
    rows = read_rows(out / "runs.csv")
    assert len(rows) == 200
    bad = 0
    for row in rows:
        if row["status"] != "ok":
            bad += 1
        elif float(row["q"]) == 0.0:
            if (row["outcome"] != Outcome.SEGREGATION.value
                    or row["count_0"] != "32" or row["count_1"] != "32"):
                bad += 1
        else:
            if row["outcome"] != Outcome.CONNECTED_CONSENSUS.value:
                bad += 1
    announce(capsys, "degenerate-regimes", bad == 0,
             "q=0 all segregation with initial counts, q=1 all connected "
             "consensus; %d exceptions in 200 runs" % bad)
    assert bad == 0


def test_segregation_probability_respects_lower_bound(capsys, bound_sweep):
    _, rows = bound_sweep
    margins = []
    for row in rows:
        q = float(row["q"])
        p_hat = float(row["p_segregation"])
        hw = (float(row["p_segregation_hi"])
              - float(row["p_segregation_lo"])) / 2.0
        bound = asymptotics.theorem31_bound(q, 0.5, 0.0)
        margins.append((q, p_hat - (bound - 3.0 * hw)))
    worst_q, worst = min(margins, key=lambda t: t[1])
    announce(capsys, "segregation-lower-bound", worst >= 0.0,
             "min margin p_hat - (bound - 3*halfwidth) = %+.4f at q=%.1f "
             "(N=512, 500 reps)" % (worst, worst_q))
    assert worst >= 0.0


def test_segregation_probability_near_beta_prediction(capsys, bound_sweep):
    _, rows = bound_sweep
    row = next(r for r in rows if abs(float(r["q"]) - 0.3) < 1e-9)
    p_hat = float(row["p_segregation"])
    predicted = asymptotics.beta(0.3 / (2 * 0.7)).value
    assert abs(predicted - 0.442) < 1e-3
    diff = abs(p_hat - predicted)
    announce(capsys, "beta-closeness (soft)", diff <= 0.07,
             "|p_hat %.4f - beta prediction %.4f| = %.4f (tol 0.07, "
             "N=512, q=0.3)" % (p_hat, predicted, diff))
    assert diff <= 0.07


def test_median_absorption_time_concentrates(capsys, bound_sweep):
    _, rows = bound_sweep
    row = next(r for r in rows if abs(float(r["q"]) - 0.3) < 1e-9)
    med = float(row["tau_median_segregation"])
    ref = math.comb(512, 2) / 0.7
    assert ref == 186880.0
    rel = abs(med - ref) / ref
    announce(capsys, "absorption-time-concentration", rel <= 0.10,
             "median tau over segregation runs %.0f vs C(N,2)/(1-q) = "
             "%.0f, off by %.2f%%" % (med, ref, 100 * rel))
    assert rel <= 0.10


def test_minority_survival_under_vanishing_q(capsys):
    report = experiments.regime_checks("thm32")
    ladder = " ".join("%d:%.3f" % (p.n, p.p_hat) for p in report.points)
    final = report.points[-1]
    ok = report.monotone_nondecreasing and final.p_hat >= 0.85
    announce(capsys, "slow-rewiring-regime", ok,
             "P(z_min > 0.25N) ladder [%s], monotone=%s, final %.3f >= "
             "0.85 (200 reps each)" % (ladder,
                                       report.monotone_nondecreasing,
                                       final.p_hat))
    assert report.monotone_nondecreasing
    assert final.p_hat >= 0.85


def test_consensus_with_dense_graph_under_high_q(capsys):
    report = experiments.regime_checks("thm34")
    point = report.points[0]
    ok = point.p_hat >= 0.95
    announce(capsys, "fast-rewiring-regime", ok,
             "P(connected consensus and min degree >= 512) = %.3f at "
             "N=1024, q=%.5f (200 reps, need >= 0.95)"
             % (point.p_hat, point.q))
    assert ok


def test_deletion_graph_contained_in_model_graph(capsys):
    params = ModelParams(n=64, q=0.5)
    violations = 0
    sweeps = 0
    for seed in range(1, 101):
        _, rep = delayed.run_delayed(params, seed)
        violations += rep.violations
        sweeps += rep.full_checks
    announce(capsys, "coupling-invariant", violations == 0,
             "%d containment violations over 100 runs at N=64, q=0.5 "
             "(%d full sweeps plus per-step local checks)"
             % (violations, sweeps))
    assert violations == 0
    assert sweeps >= 100


def test_delayed_jump_chain_matches_direct_model(capsys):
    eq = delayed.jump_chain_equivalence(6, 0.5, 50000, 7)
    ok = (eq.tv_distance <= 0.02 and eq.tv_class_distance <= 0.02
          and eq.chi2_p_value >= 0.001)
    announce(capsys, "jump-chain-equivalence", ok,
             "joint TV %.4f, class TV %.4f (tol 0.02), chi-square "
             "p=%.4f over %d cells (50000 runs per model)"
             % (eq.tv_distance, eq.tv_class_distance, eq.chi2_p_value,
                eq.chi2_dof + 1))
    assert eq.tv_distance <= 0.02
    assert eq.tv_class_distance <= 0.02
    assert eq.chi2_p_value >= 0.001


def test_deletion_count_tail_bound_exact_and_mc(capsys):
    big = asymptotics.DeletionBoundParams(512, 0.3, 1.1)
    exact_big = asymptotics.deletion_bound_probability(big)
    small = asymptotics.DeletionBoundParams(128, 0.3, 1.1)
    exact = asymptotics.deletion_bound_probability(small)
    trials = 10000
    mc = asymptotics.deletion_bound_probability_mc(small, trials, 606)
    se = math.sqrt(exact * (1 - exact) / trials)
    ok = exact_big >= 0.999 and abs(mc - exact) <= 3 * se
    announce(capsys, "deletion-tail-bound", ok,
             "exact %.7f >= 0.999 at N=512; MC %.4f vs exact %.7f at "
             "N=128, |diff| %.2e <= 3se %.2e" % (exact_big, mc, exact,
                                                 abs(mc - exact), 3 * se))
    assert exact_big >= 0.999
    assert abs(mc - exact) <= 3 * se


def test_deletion_graph_audit_connectivity_window(capsys):
    report = delayed.deletion_graph_audit(ModelParams(n=256, q=0.5),
                                          kappa=0.5, eps=0.2, runs=100,
                                          seed=11)
    ok = report.pass_rate >= 0.95
    announce(capsys, "degree-audit", ok,
             "deletion graph connected with min degree >= 128 through "
             "step %d in %.0f%% of 100 runs (need >= 95%%)"
             % (int(report.n2), 100 * report.pass_rate))
    assert ok


def test_three_opinions_make_segregation_more_likely(capsys,
                                                     matched_k_sweeps):
    p3 = float(matched_k_sweeps[3]["p_segregation"])
    p2 = float(matched_k_sweeps[2]["p_segregation"])
    dc3 = float(matched_k_sweeps[3]["p_disconnected_consensus"])
    dc2 = float(matched_k_sweeps[2]["p_disconnected_consensus"])
    announce(capsys, "three-opinion-ordering", p3 >= p2,
             "P(segregation) %.3f with K=3 vs %.3f with K=2 at N=513, "
             "q=0.3, 300 reps; disconnected-consensus frequency %.4f / "
             "%.4f (reported, expected near 0)" % (p3, p2, dc3, dc2))
    assert p3 >= p2


def test_sweep_outputs_byte_identical_on_rerun(capsys, tmp_root,
                                               degenerate_sweep):
    cfg, first = degenerate_sweep
    rerun_dir = tmp_root / "degenerate-64-rerun"
    rerun = experiments.ExperimentConfig(
        name=cfg.name, n_grid=cfg.n_grid, q_grid=cfg.q_grid,
        replicates=cfg.replicates, base_seed=cfg.base_seed,
        output_dir=str(rerun_dir), workers=3)
    experiments.run_sweep(rerun)
    same = all(
        Path(first / f).read_bytes() == (rerun_dir / f).read_bytes()
        for f in ("runs.csv", "aggregate.csv"))
    announce(capsys, "byte-determinism", same,
             "rerun of the degenerate sweep (different worker count) "
             "reproduced runs.csv and aggregate.csv byte for byte")
    assert same
