"""Delayed chain, deletion-graph coupling, thresholds, and the audit.

The branch logic of delayed_step is verified post hoc against full state
snapshots; the coupling invariant is asserted both by the built-in checks
and by independent containment sweeps here; thresholds get frozen
high-precision values.
"""

import csv
import math
from collections import Counter, defaultdict

import numpy as np
import pytest
from scipy import stats

from offvoter.asymptotics import BadParams
from offvoter.delayed import (AuditReport, BudgetExceeded, CouplingViolation,
                              DivergentThreshold, connectivity_thresholds,
                              default_step_budget, delayed_step,
                              deletion_graph_audit, init_delayed,
                              jump_chain_equivalence, n1_threshold,
                              n2_threshold, run_delayed, verify_coupling)
from offvoter.model import ModelParams, Outcome, StepKind
from offvoter.rng import Xoshiro256, derive_stream


def snapshot(state):
    return {
        "counts": list(state.ovm.opinion_counts),
        "model_edges": set(state.ovm.graph.edges()),
        "del_edges": set(state.deletion_graph.edges()),
        "discordant": set(state.ovm.discordant),
        "s_op": state.ovm.s_op,
        "s_del": state.ovm.s_del,
        "m": state.m,
        "x_e": state.x_e_count,
        "x_op": state.x_op_count,
    }


def test_delayed_step_branches_against_snapshots():
    seen = Counter()
    for seed in range(12):
        state = init_delayed(ModelParams(n=5, q=0.5))
        rng = Xoshiro256(seed)
        while len(state.ovm.discordant) > 0:
            before = snapshot(state)
            ev = delayed_step(state, rng)
            after = snapshot(state)
            a, b = ev.pair
            assert 1 <= a < b <= 5
            assert ev.m == before["m"] + 1 == after["m"]
            was_discordant = ev.pair in before["discordant"]
            if ev.update_coin and was_discordant:
                seen["update"] += 1
                assert (ev.x_e, ev.x_op) == (1, 1)
                assert ev.kind in (StepKind.UPDATE_TO_HIGHER,
                                   StepKind.UPDATE_TO_LOWER)
                assert after["del_edges"] == before["del_edges"]
                assert after["model_edges"] == before["model_edges"]
                assert after["s_op"] == before["s_op"] + 1
                assert after["counts"] != before["counts"]
            elif ev.update_coin:
                seen["idle"] += 1
                assert (ev.x_e, ev.x_op) == (0, 0)
                assert ev.kind is None
                assert after == dict(before, m=after["m"])
            else:
                assert ev.pair not in after["del_edges"]
                assert after["del_edges"] >= before["del_edges"] - {ev.pair}
                if was_discordant:
                    seen["deletion"] += 1
                    assert (ev.x_e, ev.x_op) == (1, 0)
                    assert ev.kind is StepKind.DELETION
                    assert before["model_edges"] - after["model_edges"] \
                        == {ev.pair}
                    assert after["s_del"] == before["s_del"] + 1
                else:
                    seen["drop_or_noop"] += 1
                    assert (ev.x_e, ev.x_op) == (0, 0)
                    assert after["model_edges"] == before["model_edges"]
                    assert after["counts"] == before["counts"]
                    if ev.pair not in before["model_edges"]:
                        # coupling consequence: a pair the model already
                        # lost cannot still sit in the deletion graph
                        assert ev.pair not in before["del_edges"]
            assert after["x_e"] == before["x_e"] + ev.x_e
            assert after["x_op"] == before["x_op"] + ev.x_op
            verify_coupling(state)
    # all four branches actually exercised
    assert all(seen[k] > 10 for k in
               ("update", "idle", "deletion", "drop_or_noop")), seen


def test_pair_sampling_uniform_over_unordered_pairs():
    # An absorbed embedded model idles forever, leaving pure pair
    # sampling observable; chi-square over the C(5,2)=10 pairs.
    state = init_delayed(ModelParams(n=5, q=0.5, init_opinions=(5, 0)))
    rng = Xoshiro256(31337)
    counts = Counter()
    draws = 30_000
    for _ in range(draws):
        counts[delayed_step(state, rng).pair] += 1
    assert len(counts) == 10
    _, p = stats.chisquare([counts[k] for k in sorted(counts)])
    assert p > 1e-3


def test_run_delayed_two_vertices_forced_deletion():
    out, rep = run_delayed(ModelParams(n=2, q=0.0, init_opinions=(1, 1)),
                           seed=9)
    assert out.outcome_class is Outcome.SEGREGATION
    assert out.tau_abs == 1  # jump-chain time, not global time
    assert rep.global_steps == 1
    assert rep.x_e_count == 1 and rep.x_op_count == 0
    assert rep.violations == 0 and rep.first_violation_step == -1
    assert rep.full_checks >= 1


def test_run_delayed_small_batch_no_violations():
    p = ModelParams(n=32, q=0.5)
    for i in range(10):
        out, rep = run_delayed(p, int(derive_stream(50, 0, 0, i)),
                               full_check_every=16)
        assert rep.violations == 0
        assert out.tau_abs == out.s_op_final + out.s_del_final
        assert rep.x_e_count == out.tau_abs
        assert rep.x_op_count == out.s_op_final
        assert rep.global_steps >= out.tau_abs


def test_run_delayed_budget():
    with pytest.raises(BudgetExceeded) as exc:
        run_delayed(ModelParams(n=16, q=0.5), seed=1, step_budget=1)
    assert exc.value.budget == 1
    with pytest.raises(ValueError):
        run_delayed(ModelParams(n=16, q=0.5), seed=1, step_budget=0)
    # default budget: generous multiple of n^2/(1-q); None only at q=1
    assert default_step_budget(ModelParams(n=10, q=0.5)) == 10_000
    assert default_step_budget(ModelParams(n=10, q=0.0)) == 5_000
    assert default_step_budget(ModelParams(n=10, q=1.0)) is None


def test_run_delayed_voter_limit():
    out, rep = run_delayed(ModelParams(n=8, q=1.0), seed=4)
    assert out.outcome_class is Outcome.CONNECTED_CONSENSUS
    assert out.s_del_final == 0
    assert rep.x_e_count == rep.x_op_count == out.s_op_final


def test_indicator_frequencies_conditional_on_discordant_count():
    # P(X_e = 1 | E_d = d) = d / C(n,2) and P(X_op = 1 | E_d = d) =
    # q * d / C(n,2), independent of the rest of the state; bin global
    # steps on d and compare within 4 sigma.
    n, q = 6, 0.5
    pairs = n * (n - 1) / 2.0
    tallies = defaultdict(lambda: [0, 0, 0])  # d -> [steps, x_e, x_op]
    p = ModelParams(n=n, q=q)
    for i in range(1200):
        state = init_delayed(p)
        rng = Xoshiro256(int(derive_stream(60, 0, 0, i)))
        while len(state.ovm.discordant) > 0:
            d = len(state.ovm.discordant)
            ev = delayed_step(state, rng)
            t = tallies[d]
            t[0] += 1
            t[1] += ev.x_e
            t[2] += ev.x_op
    checked = 0
    for d, (steps, x_e, x_op) in tallies.items():
        if steps < 400:
            continue
        checked += 1
        p_e = d / pairs
        sigma_e = math.sqrt(p_e * (1 - p_e) / steps)
        assert abs(x_e / steps - p_e) < 4 * sigma_e, d
        p_op = q * d / pairs
        sigma_op = math.sqrt(p_op * (1 - p_op) / steps)
        assert abs(x_op / steps - p_op) < 4 * sigma_op, d
    assert checked >= 3


def test_jump_chain_equivalence_degenerate_q():
    # q=0: a single deterministic outcome key on both sides
    rep0 = jump_chain_equivalence(4, 0.0, 200, seed=70)
    assert rep0.support_size == 1
    assert rep0.tv_distance == 0.0 and rep0.tv_class_distance == 0.0
    assert rep0.chi2_p_value == 1.0
    # q=1: consensus with probability one on both sides
    rep1 = jump_chain_equivalence(4, 1.0, 300, seed=71)
    assert rep1.tv_class_distance == 0.0
    assert rep1.support_size <= 2  # the two consensus labels


def test_jump_chain_equivalence_moderate():
    rep = jump_chain_equivalence(5, 0.5, 4000, seed=72)
    assert rep.runs_per_model == 4000
    assert rep.support_size >= 2
    assert rep.tv_class_distance <= 0.05
    assert rep.tv_class_distance <= rep.tv_distance <= 1.0
    assert rep.chi2_p_value >= 0.001
    assert rep.chi2_dof >= 1


def test_threshold_frozen_values():
    n1 = n1_threshold(1000, 0.1, 0.5)
    assert abs(n1 - 2.4375e6) < 1e3
    n2 = n2_threshold(1000, 0.5, 0.25, 0.5)
    assert abs(n2 - 499500 * math.log(4.0 / 3.0)) < 1e-6
    assert abs(n2 - 1.4370e5) < 50.0
    # halving 1-q doubles both horizons
    assert np.isclose(n1_threshold(1000, 0.1, 0.75), 2 * n1)
    assert np.isclose(n2_threshold(1000, 0.5, 0.25, 0.75), 2 * n2)


def test_threshold_domains():
    with pytest.raises(DivergentThreshold):
        n1_threshold(1000, 0.1, 1.0)
    with pytest.raises(DivergentThreshold):
        n2_threshold(1000, 0.5, 0.25, 1.0)
    with pytest.raises(BadParams):
        n2_threshold(1000, 0.8, 0.3, 0.5)  # kappa + eps >= 1
    with pytest.raises(BadParams):
        n2_threshold(1000, 0.0, 0.25, 0.5)
    with pytest.raises(BadParams):
        n1_threshold(1000, 0.0, 0.5)
    with pytest.raises(BadParams):
        n1_threshold(3, 10.0, 0.5)  # log n <= log((1+eps) log n)
    with pytest.raises(BadParams):
        n1_threshold(2, 0.1, 0.5)


def test_degree_horizon_below_connectivity_horizon():
    for n in (100, 316, 1000):
        for q in (0.1, 0.5, 0.9):
            for kappa, eps in ((0.5, 0.25), (0.5, 0.2), (0.3, 0.1),
                               (0.7, 0.2)):
                th = connectivity_thresholds(n, kappa, eps, q)
                assert 0 < th.n2 <= th.n1
                assert th.kappa == kappa and th.eps == eps


def test_audit_vacuous_window():
    # kappa + eps near 1 shrinks the horizon below one step: the checked
    # window is empty and every run passes vacuously.
    p = ModelParams(n=8, q=0.0)
    assert math.floor(n2_threshold(8, 0.5, 0.49, 0.0)) == 0
    rep = deletion_graph_audit(p, kappa=0.5, eps=0.49, runs=6, seed=80)
    assert rep.pass_rate == 1.0
    assert all(r.passed and r.first_violation_step == -1 for r in rep.rows)


def test_audit_impossible_degree_fails_immediately():
    # kappa*n > n-1 cannot hold even on the complete graph
    p = ModelParams(n=50, q=0.5)
    assert math.floor(n2_threshold(50, 0.99, 0.005, 0.5)) >= 1
    rep = deletion_graph_audit(p, kappa=0.99, eps=0.005, runs=5, seed=81)
    assert rep.pass_rate == 0.0
    assert all(r.first_violation_step == 1 for r in rep.rows)


def test_audit_moderate_pass_rate_and_rows():
    p = ModelParams(n=64, q=0.5)
    rep = deletion_graph_audit(p, kappa=0.5, eps=0.2, runs=20, seed=82)
    assert rep.pass_rate >= 0.9
    assert len(rep.rows) == 20
    for r in rep.rows:
        assert r.n == 64 and r.q == 0.5
        assert r.passed == (r.first_violation_step == -1)
        assert r.n2 == rep.n2
    assert rep.pass_rate == sum(r.passed for r in rep.rows) / 20


def test_audit_requires_complete_graph_and_q_below_one():
    sparse = ModelParams(n=8, q=0.5, init_graph=((1, 2), (3, 4)),
                         init_opinions=(4, 4))
    with pytest.raises(BadParams):
        deletion_graph_audit(sparse, kappa=0.5, eps=0.2, runs=2, seed=1)
    with pytest.raises(DivergentThreshold):
        deletion_graph_audit(ModelParams(n=8, q=1.0), kappa=0.5, eps=0.2,
                             runs=2, seed=1)


def test_audit_csv_round_trip(tmp_path):
    p = ModelParams(n=16, q=0.3)
    rep = deletion_graph_audit(p, kappa=0.5, eps=0.2, runs=4, seed=83)
    path = tmp_path / "audit.csv"
    rep.write_csv(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "q", "kappa", "eps", "n2", "passed",
                       "first_violation_step"]
    assert len(rows) == 1 + 4
    for raw, r in zip(rows[1:], rep.rows):
        assert int(raw[0]) == r.n
        assert float(raw[1]) == r.q
        assert float(raw[4]) == r.n2
        assert raw[5] in ("0", "1") and bool(int(raw[5])) == r.passed
        assert int(raw[6]) == r.first_violation_step


def test_init_delayed_graphs_start_equal_but_independent():
    state = init_delayed(ModelParams(n=6, q=0.5))
    assert set(state.deletion_graph.edges()) == set(state.ovm.graph.edges())
    state.deletion_graph.remove_edge(1, 2)
    assert state.ovm.graph.has_edge(1, 2)
    # removing from the deletion graph alone keeps the coupling valid
    verify_coupling(state)


def test_verify_coupling_detects_planted_violation():
    state = init_delayed(ModelParams(n=6, q=0.5))
    # removing a model edge while leaving the deletion graph intact makes
    # the deletion graph a strict supergraph on that pair
    state.ovm.graph.remove_edge(2, 5)
    with pytest.raises(CouplingViolation):
        verify_coupling(state)
