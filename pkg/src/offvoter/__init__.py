"""Simulator and numerical-verification toolkit for the offended voter
model: a coevolving voter dynamic where each step picks a uniformly
random discordant edge and either aligns its endpoints (probability q) or
deletes it for good (probability 1-q), until no discordant edge remains.

Subpackages by concern: graph (dynamic graph and the sampled edge pool),
model (dynamics, runs, outcome classification), _kernel (compiled engine),
delayed (delayed formulation, deletion-graph coupling, connectivity
horizons), asymptotics (survival series, exact walk oracle, closed-form
bounds), experiments (sweeps, CSV datasets, regime checks), cli.
"""

from .asymptotics import (BadParams, BadR, BadTolerance, BetaEval,
                          DeletionBoundParams, SurvivalCurve, beta,
                          deletion_bound_probability,
                          deletion_bound_probability_mc, offcenter_survival,
                          prop33_bound, srw_exit_survival, theorem31_bound)
from .delayed import (AuditReport, BudgetExceeded, ConnectivityThresholds,
                      CouplingViolation, DelayedState, DivergentThreshold,
                      EquivalenceReport, connectivity_thresholds,
                      deletion_graph_audit, delayed_step, init_delayed,
                      jump_chain_equivalence, n1_threshold, n2_threshold,
                      run_delayed)
from .experiments import (ConfigError, ExperimentConfig, SchemaMismatch,
                          derive_seed, figure_datasets, regime_checks,
                          run_sweep, wilson_interval)
from .graph import (DynamicGraph, EmptySet, IndexedEdgeSet, IndexedSet,
                    NoSuchEdge, edge_key, sample_uniform)
from .model import (Absorbed, BadCounts, BadEdge, ModelParams, NotAbsorbed,
                    Outcome, RunOutcome, SimState, StepEvent, StepKind,
                    classify_outcome, init_state, opinion_walk_check,
                    run_to_absorption, step)
from .rng import Xoshiro256

__version__ = "0.1.0"
