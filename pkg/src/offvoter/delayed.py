"""Delayed formulation of the model, coupled with the dynamical deletion
graph, plus the connectivity-threshold formulas and their empirical audit.

Each global step samples an arbitrary unordered pair of distinct vertices
(not just a discordant edge) and flips the update/delete coin U:

- U = 0: the pair is removed from the deletion graph whenever present
  there; if the pair is currently a discordant edge of the embedded
  model, that edge is deleted there too (an X_e step).
- U = 1: the deletion graph is untouched; if the pair is discordant, the
  value coin V resolves an opinion update (an X_e and X_op step).
- Any other sample idles.

The embedded model therefore advances exactly on X_e steps, and the
sequence of those steps (its jump chain) has the law of the direct model;
jump_chain_equivalence measures that claim.  The deletion graph removes a
superset of the pairs the embedded model removes, so it stays a subgraph
of the embedded model's graph at every step: the coupling invariant.

Draw order per global step: pair (two rand_below draws), U, then V only
on update steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .asymptotics import BadParams
from .graph import DynamicGraph, edge_key
from .model import (ModelParams, RunOutcome, SimState, StepKind,
                    _build_outcome, apply_deletion, apply_update, init_state)
from .rng import Xoshiro256, derive_stream


class DivergentThreshold(ValueError):
    """Threshold formulas divide by 1-q; q=1 has no finite horizon."""


class BudgetExceeded(RuntimeError):
    """A delayed run hit its global-step budget before absorbing.

    The run must be discarded; its partial state is not a sample of the
    absorbed law.
    """

    def __init__(self, budget):
        super().__init__("delayed run exceeded %d global steps" % budget)
        self.budget = budget


class CouplingViolation(AssertionError):
    """An edge of the deletion graph was absent from the model graph."""


@dataclass(frozen=True)
class DelayedEvent:
    m: int
    pair: tuple
    update_coin: bool
    x_e: int
    x_op: int
    kind: StepKind = None


@dataclass
class DelayedState:
    """Embedded model state plus the coupled deletion graph and tallies."""

    ovm: SimState
    deletion_graph: DynamicGraph
    x_op_count: int = 0
    x_e_count: int = 0
    m: int = 0


def init_delayed(params: ModelParams) -> DelayedState:
    """Start both processes from the same edge set.

    The deletion graph starts equal to the model's initial graph (for the
    complete-graph default, all pairs), which makes the subgraph coupling
    hold at step 0 for any initial graph.
    """
    ovm = init_state(params)
    return DelayedState(ovm=ovm, deletion_graph=ovm.graph.copy())


def delayed_step(state: DelayedState, rng: Xoshiro256) -> DelayedEvent:
    """One global step; see the module docstring for the three branches.

    After mutating, asserts the local coupling postcondition on the
    sampled pair (the only pair whose membership changed): it must not be
    in the deletion graph while absent from the model graph.
    """
    ovm = state.ovm
    n = ovm.params.n
    x = rng.rand_below(n) + 1
    y = rng.rand_below(n - 1) + 1
    if y >= x:
        y += 1
    pair = edge_key(x, y)
    update_coin = rng.rand_unit() < ovm.params.q
    discordant = pair in ovm.discordant
    x_e = 0
    x_op = 0
    kind = None
    if not update_coin:
        if state.deletion_graph.has_edge(*pair):
            state.deletion_graph.remove_edge(*pair)
        if discordant:
            kind = apply_deletion(ovm, pair)
            x_e = 1
    elif discordant:
        kind = apply_update(ovm, pair, rng.rand_unit() < 0.5)
        x_e = 1
        x_op = 1
    state.m += 1
    state.x_e_count += x_e
    state.x_op_count += x_op
    if state.deletion_graph.has_edge(*pair) and not ovm.graph.has_edge(*pair):
        raise CouplingViolation("pair %r in deletion graph only at step %d"
                                % (pair, state.m))
    return DelayedEvent(m=state.m, pair=pair, update_coin=update_coin,
                        x_e=x_e, x_op=x_op, kind=kind)


def verify_coupling(state: DelayedState) -> None:
    """Full containment check: every deletion-graph edge present in the
    model graph.  O(edges); raises CouplingViolation on failure."""
    for a, b in state.deletion_graph.edges():
        if not state.ovm.graph.has_edge(a, b):
            raise CouplingViolation(
                "edge (%d, %d) in deletion graph only at step %d"
                % (a, b, state.m))


def default_step_budget(params: ModelParams) -> int:
    """50 * n**2 / (1-q) global steps; unbounded (None) for q = 1, where
    the formula diverges but absorption is almost sure anyway."""
    if params.q >= 1.0:
        return None
    return math.ceil(50.0 * params.n * params.n / (1.0 - params.q))


@dataclass(frozen=True)
class CouplingReport:
    """Per-run record of the coupled simulation.

    The local postcondition runs after every step; only the sampled pair
    can change membership in either graph, so together with the periodic
    and final full containment sweeps this covers the invariant at every
    step.  full_checks counts the O(edges) sweeps performed.
    """

    global_steps: int
    x_e_count: int
    x_op_count: int
    full_checks: int
    violations: int = 0
    first_violation_step: int = -1


def run_delayed(params: ModelParams, seed: int, step_budget: int = None,
                full_check_every: int = 64) -> tuple:
    """Run the coupled system to absorption of the embedded model.

    Returns (RunOutcome, CouplingReport).  The outcome's tau_abs counts
    jump steps (embedded-chain time), not global steps.  Raises
    BudgetExceeded if absorption is not reached within the budget
    (default_step_budget(params) when step_budget is None).
    """
    if step_budget is not None and step_budget <= 0:
        raise ValueError("step_budget must be positive")
    if step_budget is None:
        step_budget = default_step_budget(params)
    state = init_delayed(params)
    rng = Xoshiro256(seed)
    full_checks = 0
    while len(state.ovm.discordant) > 0:
        if step_budget is not None and state.m >= step_budget:
            raise BudgetExceeded(step_budget)
        delayed_step(state, rng)
        if state.m % full_check_every == 0:
            verify_coupling(state)
            full_checks += 1
    verify_coupling(state)
    full_checks += 1
    ovm = state.ovm
    sizes = ovm.graph.connected_components()
    outcome = _build_outcome(params, seed, ovm.s_op, ovm.s_del,
                             ovm.opinion_counts, sizes,
                             ovm.graph.edge_count, ovm.graph.min_degree())
    report = CouplingReport(global_steps=state.m, x_e_count=state.x_e_count,
                            x_op_count=state.x_op_count,
                            full_checks=full_checks)
    return outcome, report


@dataclass(frozen=True)
class EquivalenceReport:
    """Two-sample comparison of direct-model and delayed-model outcomes.

    Outcomes are compared on the joint key (class, final counts, edges
    remaining).  tv_distance is the total-variation distance between the
    empirical joint distributions; its expectation under equality in law
    grows with the support size (roughly sum_k sqrt(p_k/(pi*runs))), so
    tv_class_distance, the same statistic on the outcome-class marginal,
    is the stable headline number.  The chi-square statistic works on the
    joint, pooling cells until every expected count reaches 5.
    """

    runs_per_model: int
    support_size: int
    tv_distance: float
    tv_class_distance: float
    chi2_statistic: float
    chi2_dof: int
    chi2_p_value: float


def jump_chain_equivalence(n: int, q: float, runs: int,
                           seed: int) -> EquivalenceReport:
    """Empirical check that the delayed model's jump chain has the law of
    the direct model.  Intended for small n (exact agreement is the
    claim; the estimate needs manageable support)."""
    from collections import Counter

    from scipy import stats

    from .model import run_to_absorption

    params = ModelParams(n=n, q=q)
    direct = Counter()
    delayed = Counter()
    for i in range(runs):
        out = run_to_absorption(params, int(derive_stream(seed, 1, 0, i)))
        direct[(out.outcome_class.value, out.final_opinion_counts,
                out.edges_remaining)] += 1
    for i in range(runs):
        out, _ = run_delayed(params, int(derive_stream(seed, 2, 0, i)))
        delayed[(out.outcome_class.value, out.final_opinion_counts,
                 out.edges_remaining)] += 1
    support = sorted(set(direct) | set(delayed))
    tv = 0.5 * sum(abs(direct[k] - delayed[k]) for k in support) / runs
    classes = sorted({k[0] for k in support})
    tv_class = 0.5 * sum(
        abs(sum(c for k, c in direct.items() if k[0] == cls)
            - sum(c for k, c in delayed.items() if k[0] == cls))
        for cls in classes) / runs
    # chi-square homogeneity with small-cell pooling
    big = [k for k in support if direct[k] + delayed[k] >= 10]
    rest_d = sum(direct[k] for k in support) - sum(direct[k] for k in big)
    rest_e = sum(delayed[k] for k in support) - sum(delayed[k] for k in big)
    cells = [(direct[k], delayed[k]) for k in big]
    if rest_d + rest_e > 0:
        cells.append((rest_d, rest_e))
    stat = 0.0
    for o1, o2 in cells:
        expected = (o1 + o2) / 2.0
        stat += (o1 - expected) ** 2 / expected
        stat += (o2 - expected) ** 2 / expected
    dof = max(1, len(cells) - 1)
    p = float(stats.chi2.sf(stat, dof))
    return EquivalenceReport(runs_per_model=runs, support_size=len(support),
                             tv_distance=float(tv),
                             tv_class_distance=float(tv_class),
                             chi2_statistic=float(stat),
                             chi2_dof=dof, chi2_p_value=p)


@dataclass(frozen=True)
class ConnectivityThresholds:
    """Horizons below which the deletion graph stays connected (n1) and
    keeps min degree >= kappa*n (n2), with high probability."""

    n1: float
    n2: float
    kappa: float
    eps: float


def n1_threshold(n: int, eps: float, q: float) -> float:
    """C(n,2) * (log n - log((1+eps) log n)) / (2(1-q))."""
    if q >= 1.0:
        raise DivergentThreshold("no finite horizon at q = 1")
    if eps <= 0.0:
        raise BadParams("eps must be positive, got %r" % (eps,))
    if n < 3 or math.log(n) <= math.log((1.0 + eps) * math.log(n)):
        raise BadParams("n too small for the connectivity horizon")
    binom = n * (n - 1) / 2.0
    return binom * (math.log(n) - math.log((1.0 + eps) * math.log(n))) \
        / (2.0 * (1.0 - q))


def n2_threshold(n: int, kappa: float, eps: float, q: float) -> float:
    """C(n,2) * log(1/(kappa+eps)) / (2(1-q))."""
    if q >= 1.0:
        raise DivergentThreshold("no finite horizon at q = 1")
    if eps <= 0.0 or kappa <= 0.0:
        raise BadParams("kappa and eps must be positive")
    if kappa + eps >= 1.0:
        raise BadParams("need kappa + eps < 1, got %r" % (kappa + eps,))
    binom = n * (n - 1) / 2.0
    return binom * math.log(1.0 / (kappa + eps)) / (2.0 * (1.0 - q))


def connectivity_thresholds(n: int, kappa: float, eps: float,
                            q: float) -> ConnectivityThresholds:
    """Both horizons; for n >= 100 the degree horizon never exceeds the
    connectivity horizon (asserted)."""
    n1 = n1_threshold(n, eps, q)
    n2 = n2_threshold(n, kappa, eps, q)
    if n >= 100:
        assert n2 <= n1, "degree horizon %g above connectivity horizon %g" \
            % (n2, n1)
    return ConnectivityThresholds(n1=n1, n2=n2, kappa=kappa, eps=eps)


@dataclass(frozen=True)
class AuditRow:
    n: int
    q: float
    kappa: float
    eps: float
    n2: float
    passed: bool
    first_violation_step: int  # -1 when the run passed


@dataclass(frozen=True)
class AuditReport:
    """Outcome of deletion_graph_audit over all runs."""

    rows: tuple
    pass_rate: float
    n2: float

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n", "q", "kappa", "eps", "n2", "passed",
                        "first_violation_step"])
            for r in self.rows:
                w.writerow([r.n, "%.17g" % r.q, "%.17g" % r.kappa,
                            "%.17g" % r.eps, "%.17g" % r.n2,
                            int(r.passed), r.first_violation_step])


def deletion_graph_audit(params: ModelParams, kappa: float, eps: float,
                         runs: int, seed: int) -> AuditReport:
    """Check that the deletion graph stays connected with min degree >=
    kappa*n through the n2 horizon.

    Each run simulates the coupled system for global steps m = 1 ..
    min(floor(n2), absorption), checking after each step.  A window with
    floor(n2) < 1 is empty and passes vacuously.  Min degree is tracked
    incrementally (degrees only decrease, and only at the two endpoints
    of a removal); connectivity uses the pigeonhole shortcut that min
    degree >= n/2 forces a connected graph, with a BFS fallback below
    that.  Only complete initial graphs are audited: the horizon formula
    assumes the deletion graph starts from all pairs.
    """
    if params.init_graph != "complete":
        raise BadParams("audit requires the complete initial graph")
    if params.q >= 1.0:
        raise DivergentThreshold("no finite horizon at q = 1")
    n = params.n
    n2 = n2_threshold(n, kappa, eps, params.q)
    limit = math.floor(n2)
    degree_floor = kappa * n
    rows = []
    for i in range(runs):
        state = init_delayed(params)
        rng = Xoshiro256(int(derive_stream(seed, 4, 0, i)))
        min_deg = n - 1
        first_violation = -1
        while state.m < limit and len(state.ovm.discordant) > 0:
            event = delayed_step(state, rng)
            if not event.update_coin:
                a, b = event.pair
                da = state.deletion_graph.degree(a)
                db = state.deletion_graph.degree(b)
                if da < min_deg:
                    min_deg = da
                if db < min_deg:
                    min_deg = db
            ok = min_deg >= degree_floor
            if ok and min_deg < n / 2.0:
                sizes = state.deletion_graph.connected_components()
                ok = sizes[0] == n
            if not ok:
                first_violation = state.m
                break
        rows.append(AuditRow(n=n, q=params.q, kappa=kappa, eps=eps, n2=n2,
                             passed=first_violation < 0,
                             first_violation_step=first_violation))
    passed = sum(1 for r in rows if r.passed)
    return AuditReport(rows=tuple(rows), pass_rate=passed / runs, n2=n2)
