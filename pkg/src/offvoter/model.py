"""The offended voter model: parameters, state, single steps, full runs,
and absorbing-state classification.

Dynamics per step: sample a uniformly random discordant edge; with
probability q flip a fair coin and both endpoints adopt the higher or the
lower of their two opinion labels; with probability 1-q the edge is
deleted for good.  Absorption is the first step with no discordant edge.

Opinions are labelled 0..K-1.  For K=2 the update branches are exactly
"both adopt 1" / "both adopt 0"; for general K they are directed copies
(one endpoint's opinion copied onto the other, loser chosen by the value
coin), which agrees in law with choosing a random copy direction because
the sampled edge always has two distinct opinions.

Random draws per step come from one per-run stream in a fixed order:
edge index first, then the update/delete coin, then (only on updates) the
value coin.  The compiled engine in _kernel consumes draws in the same
order against structurally identical state, so a (params, seed) pair
produces one well-defined run regardless of engine.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .graph import DynamicGraph, IndexedEdgeSet, edge_key
from .rng import Xoshiro256


class BadCounts(ValueError):
    """Initial opinion counts malformed (length or sum)."""


class BadEdge(ValueError):
    """Explicit edge list references invalid vertices or has duplicates."""


class Absorbed(RuntimeError):
    """step() called on a state with no discordant edges."""


class NotAbsorbed(RuntimeError):
    """Classification requested before absorption."""


class Outcome(Enum):
    SEGREGATION = "segregation"
    DISCONNECTED_CONSENSUS = "disconnected_consensus"
    CONNECTED_CONSENSUS = "connected_consensus"


class StepKind(Enum):
    UPDATE_TO_HIGHER = "update_to_higher"
    UPDATE_TO_LOWER = "update_to_lower"
    DELETION = "deletion"


@dataclass(frozen=True)
class StepEvent:
    kind: StepKind
    edge: tuple


@dataclass(frozen=True)
class ModelParams:
    """Immutable description of one model instance.

    init_opinions is "balanced" or a length-k tuple of counts summing to
    n; init_graph is "complete" or an explicit tuple of edges.  Vertices
    are 1..n.  Initial opinions are assigned in lowest-index blocks
    (vertices 1..c0 get label 0, the next c1 get label 1, ...); on a
    complete graph the model is exchangeable so the rule only pins
    determinism.  Balanced means floor(n/k) per label with the remainder
    spread over the lowest labels, so for k=2 label 1 gets floor(n/2).
    """

    n: int
    q: float
    k: int = 2
    eps: float = 0.25
    init_opinions: object = "balanced"
    init_graph: object = "complete"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need n >= 1")
        if not 2 <= self.k <= 127:
            raise ValueError("k must be in 2..127, got %r" % (self.k,))
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("q must lie in [0, 1], got %r" % (self.q,))
        if not 0.0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2), got %r" % (self.eps,))
        if self.init_opinions != "balanced":
            counts = tuple(int(c) for c in self.init_opinions)
            if len(counts) != self.k:
                raise BadCounts("expected %d counts, got %d"
                                % (self.k, len(counts)))
            if any(c < 0 for c in counts):
                raise BadCounts("negative count in %r" % (counts,))
            if sum(counts) != self.n:
                raise BadCounts("counts %r sum to %d, not n=%d"
                                % (counts, sum(counts), self.n))
            object.__setattr__(self, "init_opinions", counts)
        if self.init_graph != "complete":
            seen = set()
            edges = []
            for e in self.init_graph:
                a, b = e
                if not (1 <= a <= self.n and 1 <= b <= self.n):
                    raise BadEdge("edge %r outside 1..%d" % (e, self.n))
                key = edge_key(a, b)
                if key in seen:
                    raise BadEdge("duplicate edge %r" % (key,))
                seen.add(key)
                edges.append(key)
            object.__setattr__(self, "init_graph", tuple(edges))

    def opinion_counts(self) -> tuple:
        """Initial per-label counts after resolving the balanced rule."""
        if self.init_opinions == "balanced":
            base, rem = divmod(self.n, self.k)
            return tuple(base + (1 if i < rem else 0) for i in range(self.k))
        return self.init_opinions

    def opinion_of(self) -> list:
        """Initial opinion per vertex, index 0 unused."""
        counts = self.opinion_counts()
        opinion = [-1] * (self.n + 1)
        v = 1
        for label, c in enumerate(counts):
            for _ in range(c):
                opinion[v] = label
                v += 1
        return opinion

    def edge_list(self) -> list:
        """Initial edges in canonical construction order."""
        if self.init_graph == "complete":
            return [(a, b) for a in range(1, self.n + 1)
                    for b in range(a + 1, self.n + 1)]
        return list(self.init_graph)

    def initial_edge_count(self) -> int:
        if self.init_graph == "complete":
            return self.n * (self.n - 1) // 2
        return len(self.init_graph)


@dataclass
class SimState:
    """Full mutable state of one run (python engine)."""

    params: ModelParams
    graph: DynamicGraph
    opinion: list
    discordant: IndexedEdgeSet
    opinion_counts: list
    step_count: int = 0
    s_op: int = 0
    s_del: int = 0


def init_state(params: ModelParams) -> SimState:
    """Build the initial state: graph, opinions, exact discordant set."""
    edges = params.edge_list()
    graph = DynamicGraph(params.n, edges)
    opinion = params.opinion_of()
    discordant = IndexedEdgeSet()
    for a, b in edges:
        if opinion[a] != opinion[b]:
            discordant.add((a, b))
    return SimState(params=params, graph=graph, opinion=opinion,
                    discordant=discordant,
                    opinion_counts=list(params.opinion_counts()))


def apply_update(state: SimState, edge: tuple, to_higher: bool) -> StepKind:
    """Both endpoints of a discordant edge adopt one endpoint's opinion.

    to_higher picks the larger of the two opinion labels as the winner.
    The loser's incident edges are retagged in adjacency order, which the
    compiled engine replays identically.
    """
    a, b = edge
    oa, ob = state.opinion[a], state.opinion[b]
    if to_higher:
        winner = oa if oa > ob else ob
    else:
        winner = oa if oa < ob else ob
    loser = a if oa != winner else b
    old = state.opinion[loser]
    state.opinion[loser] = winner
    state.opinion_counts[old] -= 1
    state.opinion_counts[winner] += 1
    opinion = state.opinion
    discordant = state.discordant
    for t in state.graph.neighbors(loser):
        ot = opinion[t]
        was = ot != old
        now = ot != winner
        if was and not now:
            discordant.remove(edge_key(loser, t))
        elif now and not was:
            discordant.add(edge_key(loser, t))
    state.s_op += 1
    state.step_count += 1
    return StepKind.UPDATE_TO_HIGHER if to_higher else StepKind.UPDATE_TO_LOWER


def apply_deletion(state: SimState, edge: tuple) -> StepKind:
    """Remove a discordant edge from the graph and the pool."""
    state.graph.remove_edge(*edge)
    state.discordant.remove(edge)
    state.s_del += 1
    state.step_count += 1
    return StepKind.DELETION


def step(state: SimState, rng: Xoshiro256) -> StepEvent:
    """One transition: sample a discordant edge, update or delete.

    Raises Absorbed when no discordant edge remains.  Event kind
    probabilities conditional on the state are (q/2, q/2, 1-q).
    """
    if len(state.discordant) == 0:
        raise Absorbed("no discordant edges remain")
    edge = state.discordant.item_at(rng.rand_below(len(state.discordant)))
    if rng.rand_unit() < state.params.q:
        kind = apply_update(state, edge, rng.rand_unit() < 0.5)
    else:
        kind = apply_deletion(state, edge)
    return StepEvent(kind=kind, edge=edge)


@dataclass(frozen=True)
class RunOutcome:
    """Absorbing-state record of one run.

    outcome_class: segregation iff the final graph is disconnected and at
    least two opinions survive; disconnected/connected consensus when one
    opinion remains.  eps_consensus: smallest count <= eps*n and largest
    component >= (1-eps)*n.  strong_segregation: all k opinions survive.
    """

    outcome_class: Outcome
    eps_consensus: bool
    strong_segregation: bool
    tau_abs: int
    final_opinion_counts: tuple
    z_min_final: int
    n_surviving: int
    component_sizes: tuple
    edges_remaining: int
    min_degree_final: int
    s_op_final: int
    s_del_final: int
    seed: int


def _classify(n: int, eps: float, counts, component_sizes) -> tuple:
    """Shared classification: (outcome, eps_consensus, strong, z_min,
    n_surviving).  counts/component_sizes describe an absorbed state."""
    n_surviving = sum(1 for c in counts if c > 0)
    z_min = min(counts)
    disconnected = len(component_sizes) > 1
    if n_surviving >= 2:
        if not disconnected:
            raise AssertionError(
                "connected absorbed state with %d surviving opinions"
                % n_surviving)
        outcome = Outcome.SEGREGATION
    elif disconnected:
        outcome = Outcome.DISCONNECTED_CONSENSUS
    else:
        outcome = Outcome.CONNECTED_CONSENSUS
    eps_consensus = (z_min <= eps * n
                     and component_sizes[0] >= (1.0 - eps) * n)
    strong = n_surviving == len(counts)
    return outcome, eps_consensus, strong, z_min, n_surviving


def classify_outcome(state: SimState, eps: float = None) -> tuple:
    """Classify an absorbed state; returns (outcome_class, eps_consensus).

    Raises NotAbsorbed if discordant edges remain.  Also hard-asserts that
    every present edge is concordant, which cross-checks the incremental
    discordant-set bookkeeping against the graph itself.
    """
    if len(state.discordant) > 0:
        raise NotAbsorbed("%d discordant edges remain"
                          % len(state.discordant))
    for a, b in state.graph.edges():
        if state.opinion[a] != state.opinion[b]:
            raise AssertionError(
                "edge (%d, %d) is discordant but absent from the pool"
                % (a, b))
    if eps is None:
        eps = state.params.eps
    sizes = state.graph.connected_components()
    outcome, eps_ok, _, _, _ = _classify(state.params.n, eps,
                                         state.opinion_counts, sizes)
    return outcome, eps_ok


def _build_outcome(params: ModelParams, seed: int, s_op: int, s_del: int,
                   counts, component_sizes, edges_remaining: int,
                   min_degree_final: int) -> RunOutcome:
    counts = tuple(int(c) for c in counts)
    component_sizes = tuple(int(s) for s in component_sizes)
    if sum(counts) != params.n:
        raise AssertionError("opinion counts sum to %d != n" % sum(counts))
    if sum(component_sizes) != params.n:
        raise AssertionError("component sizes sum to %d != n"
                             % sum(component_sizes))
    if edges_remaining != params.initial_edge_count() - s_del:
        raise AssertionError("edge bookkeeping off: %d remaining, %d deleted"
                             % (edges_remaining, s_del))
    outcome, eps_ok, strong, z_min, n_surv = _classify(
        params.n, params.eps, counts, component_sizes)
    return RunOutcome(
        outcome_class=outcome, eps_consensus=eps_ok,
        strong_segregation=strong, tau_abs=s_op + s_del,
        final_opinion_counts=counts, z_min_final=int(z_min),
        n_surviving=n_surv, component_sizes=component_sizes,
        edges_remaining=int(edges_remaining),
        min_degree_final=int(min_degree_final),
        s_op_final=int(s_op), s_del_final=int(s_del), seed=int(seed))


def _trace_line(state: SimState, event: StepEvent) -> str:
    return json.dumps({
        "n": state.step_count,
        "kind": event.kind.value,
        "edge": list(event.edge),
        "counts": list(state.opinion_counts),
        "discordant": len(state.discordant),
    }, separators=(",", ":"))


def run_to_absorption(params: ModelParams, seed: int, engine: str = "compiled",
                      trace=None) -> RunOutcome:
    """Run one instance to absorption; a pure function of (params, seed).

    engine "compiled" uses the numba kernel, "python" the structures in
    this module; both consume the identical random stream and produce
    byte-identical outcomes.  Tracing (a path or writable text file
    object, one JSON record per step) forces the python engine.
    """
    if engine not in ("compiled", "python"):
        raise ValueError("unknown engine %r" % (engine,))
    if engine == "compiled" and trace is None:
        from ._kernel import run_compiled
        return run_compiled(params, seed)
    state = init_state(params)
    rng = Xoshiro256(seed)
    own_fh = None
    fh = None
    if trace is not None:
        if hasattr(trace, "write"):
            fh = trace
        else:
            fh = own_fh = open(trace, "w", encoding="utf-8")
    try:
        while len(state.discordant) > 0:
            event = step(state, rng)
            if fh is not None:
                fh.write(_trace_line(state, event) + "\n")
    finally:
        if own_fh is not None:
            own_fh.close()
    sizes = state.graph.connected_components()
    return _build_outcome(params, seed, state.s_op, state.s_del,
                          state.opinion_counts, sizes,
                          state.graph.edge_count, state.graph.min_degree())


@dataclass(frozen=True)
class WalkCheckReport:
    """Evidence that the opinion-1 count behaves as a fair +-1 walk on
    update steps: pooled sign frequency within 4 sigma of 1/2, and a
    Wald-Wolfowitz runs test for sign independence at significance 0.001.
    Vacuously passing when there are too few updates to test."""

    n_updates: int
    n_up: int
    freq_tolerance: float
    freq_ok: bool
    runs_statistic: float
    runs_p_value: float
    runs_ok: bool
    passed: bool


def opinion_walk_check(params: ModelParams, runs: int,
                       rng: Xoshiro256) -> WalkCheckReport:
    """Pool update-step signs of the two-opinion count walk over runs."""
    if params.k != 2:
        raise ValueError("walk check is defined for k=2 only")
    from scipy import stats

    signs = []
    for _ in range(runs):
        state = init_state(params)
        while len(state.discordant) > 0:
            event = step(state, rng)
            if event.kind is StepKind.UPDATE_TO_HIGHER:
                signs.append(1)
            elif event.kind is StepKind.UPDATE_TO_LOWER:
                signs.append(0)
    m = len(signs)
    n_up = sum(signs)
    if m == 0:
        return WalkCheckReport(0, 0, 0.0, True, 0.0, 1.0, True, True)
    tol = 4.0 * math.sqrt(0.25 * m)
    freq_ok = abs(n_up - 0.5 * m) <= tol
    n1, n2 = n_up, m - n_up
    if n1 < 2 or n2 < 2:
        return WalkCheckReport(m, n_up, tol / m, freq_ok, 0.0, 1.0, True,
                               freq_ok)
    r = 1 + sum(1 for i in range(1, m) if signs[i] != signs[i - 1])
    mean_r = 2.0 * n1 * n2 / m + 1.0
    var_r = (2.0 * n1 * n2 * (2.0 * n1 * n2 - m)) / (m * m * (m - 1.0))
    z = (r - mean_r) / math.sqrt(var_r)
    p = 2.0 * stats.norm.sf(abs(z))
    runs_ok = p >= 0.001
    return WalkCheckReport(n_updates=m, n_up=n_up, freq_tolerance=tol / m,
                           freq_ok=freq_ok, runs_statistic=float(z),
                           runs_p_value=float(p), runs_ok=runs_ok,
                           passed=freq_ok and runs_ok)
