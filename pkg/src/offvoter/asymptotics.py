"""Survival asymptotics for the opinion-count random walk, plus the
closed-form bounds built on them.

The centerpiece is ``beta``, the diffusion limit of the probability that a
simple random walk on {0..N}, started near the middle, stays strictly
inside through horizon x*N**2.  It is an alternating series

    beta(x) = (4/pi) * sum_{j>=0} (-1)^j / (2j+1) * exp(-(pi^2/2)(2j+1)^2 x)

with squared odd integers (2j+1)^2 in the exponent.  One published form of
this series carries (j+1)^2 there instead; the two agree at j=0 only, and
the exact finite-N dynamic program ``srw_exit_survival`` matches the odd
form to ~1e-3 at N=200 while the other diverges from it, so the odd form
is what this module implements.  ``beta(0) == 1`` (the series becomes the
Leibniz series for pi/4).

``srw_exit_survival`` is the independent oracle: an exact vector dynamic
program over interior states, no asymptotics, no smoothing.  Tests pin the
series against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


class BadTolerance(ValueError):
    """Series tolerance must be a positive finite float."""


class BadParams(ValueError):
    """Arguments outside a bound's domain of validity."""


class BadR(ValueError):
    """Slack factor r must exceed 1."""


class DominationViolation(AssertionError):
    """Off-center survival exceeded centered survival beyond tolerance."""


@dataclass(frozen=True)
class BetaEval:
    """Value of the survival series together with how it was computed."""

    x: float
    tol: float
    value: float
    terms_used: int


def beta(x: float, tol: float = 1e-12) -> BetaEval:
    """Evaluate the survival series at x >= 0.

    Terms are added until the next term magnitude drops below tol; because
    the series alternates with decreasing magnitudes, the truncation error
    is below tol as well.
    """
    if not (isinstance(tol, float) and math.isfinite(tol) and tol > 0.0):
        raise BadTolerance("tol must be a positive finite float, got %r" % (tol,))
    if not (isinstance(x, (int, float)) and math.isfinite(x) and x >= 0.0):
        raise BadParams("x must be a finite float >= 0, got %r" % (x,))
    if x == 0.0:
        return BetaEval(x=0.0, tol=tol, value=1.0, terms_used=0)
    total = 0.0
    j = 0
    c = math.pi * math.pi / 2.0
    while True:
        odd = 2 * j + 1
        term = math.exp(-c * odd * odd * x) / odd
        if term < tol and j > 0:
            break
        total += term if j % 2 == 0 else -term
        j += 1
        if term < tol:
            break
    value = min(1.0, max(0.0, 4.0 / math.pi * total))
    return BetaEval(x=float(x), tol=tol, value=value, terms_used=j)


@dataclass(frozen=True)
class SurvivalCurve:
    """Exact interior-survival probabilities of a simple random walk.

    probabilities[m] = P(walk from start stays in 1..n-1 through step m).
    max_mass_error is the largest deviation of interior+absorbed mass from
    1 observed while iterating, a self-check on the dynamic program.
    """

    n: int
    start: int
    probabilities: np.ndarray
    max_mass_error: float


def srw_exit_survival(n: int, start: int, horizon: int) -> SurvivalCurve:
    """Dynamic program for the exit problem on {0..n}.

    The walk steps +-1 with probability 1/2 each and is absorbed at 0 and
    n.  Probability mass over interior states is propagated exactly with
    vector operations; no parity smoothing is applied, so the curve shows
    the natural even/odd alternation.
    """
    if n < 2:
        raise BadParams("need n >= 2")
    if not 0 <= start <= n:
        raise BadParams("start %d outside 0..%d" % (start, n))
    if horizon < 0:
        raise BadParams("horizon must be >= 0")
    probs = np.empty(horizon + 1, dtype=np.float64)
    interior = np.zeros(n + 1, dtype=np.float64)
    absorbed = 0.0
    if 0 < start < n:
        interior[start] = 1.0
    else:
        absorbed = 1.0
    probs[0] = interior.sum()
    max_err = abs(probs[0] + absorbed - 1.0)
    for m in range(1, horizon + 1):
        nxt = np.zeros(n + 1, dtype=np.float64)
        nxt[:-2] += 0.5 * interior[1:-1]
        nxt[2:] += 0.5 * interior[1:-1]
        absorbed += nxt[0] + nxt[n]
        nxt[0] = 0.0
        nxt[n] = 0.0
        interior = nxt
        probs[m] = interior.sum()
        err = abs(probs[m] + absorbed - 1.0)
        if err > max_err:
            max_err = err
    return SurvivalCurve(n=n, start=start, probabilities=probs,
                         max_mass_error=float(max_err))


@dataclass(frozen=True)
class OffcenterComparison:
    """Survival curves from an off-center and the centered start."""

    offcenter: SurvivalCurve
    centered: SurvivalCurve
    max_excess: float


def offcenter_survival(n: int, start: int, horizon: int) -> OffcenterComparison:
    """Survival from an arbitrary start, checked against the centered one.

    Starting closer to a boundary can only hurt survival, so the centered
    curve must dominate pointwise.  A violation beyond 1e-12 raises
    DominationViolation.
    """
    off = srw_exit_survival(n, start, horizon)
    cen = srw_exit_survival(n, n // 2, horizon)
    excess = float(np.max(off.probabilities - cen.probabilities))
    if excess > 1e-12:
        raise DominationViolation(
            "off-center survival exceeds centered by %.3e" % excess)
    return OffcenterComparison(offcenter=off, centered=cen, max_excess=excess)


def theorem31_bound(q: float, c: float, c_prime: float) -> float:
    """Lower bound on the segregation probability for the two-opinion
    model on the complete graph with near-balanced initial opinions.

    Requires 0 < q < 1 and 0 <= c_prime < c <= 1/2.  The bound is
    beta(q / (2(1-q)) * 1 / (4 (c - c_prime)^2)).
    """
    if not 0.0 < q < 1.0:
        raise BadParams("q must lie strictly between 0 and 1, got %r" % (q,))
    if not (0.0 <= c_prime < c <= 0.5):
        raise BadParams("need 0 <= c_prime < c <= 1/2, got c=%r c_prime=%r"
                        % (c, c_prime))
    x = q / (2.0 * (1.0 - q)) / (4.0 * (c - c_prime) ** 2)
    return beta(x).value


def prop33_bound(q: float, eps: float) -> float:
    """Lower bound on the probability of eps-consensus.

    Requires 0 < q < 1 and 0 < eps < 1/2.  The bound is
    1 - beta(q/(1-q) * eps * (1-eps)).
    """
    if not 0.0 < q < 1.0:
        raise BadParams("q must lie strictly between 0 and 1, got %r" % (q,))
    if not 0.0 < eps < 0.5:
        raise BadParams("eps must lie in (0, 1/2), got %r" % (eps,))
    x = q / (1.0 - q) * eps * (1.0 - eps)
    return 1.0 - beta(x).value


_EXACT_K_LIMIT = 1_000_000


@dataclass(frozen=True)
class DeletionBoundParams:
    """Parameters of the deletion-count bound.

    alpha = max(q, 1/n) and k = ceil(r * alpha / (1-q) * n**2 / 2) are
    derived on construction; k is the number of opinion updates after
    which the deletion count is examined.
    """

    n: int
    q: float
    r: float
    alpha: float = 0.0
    k: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise BadParams("need n >= 1")
        if not 0.0 < self.q < 1.0:
            raise BadParams("q must lie strictly between 0 and 1, got %r"
                            % (self.q,))
        if not self.r > 1.0:
            raise BadR("r must exceed 1, got %r" % (self.r,))
        alpha = max(self.q, 1.0 / self.n)
        k = math.ceil(self.r * alpha / (1.0 - self.q) * self.n * self.n / 2.0)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "k", k)

    @property
    def threshold(self) -> int:
        """Deletion count the tail probability refers to: ceil(n**2/2)."""
        return math.ceil(self.n * self.n / 2.0)


def deletion_bound_probability(p: DeletionBoundParams) -> float:
    """P(X >= n**2/2) where X counts deletions before the k-th update.

    X is negative binomial: failures (deletions, probability 1-q) before
    k successes (updates, probability q).  The tail is exact through the
    regularized incomplete beta form of the CDF while k <= 1e6, and
    switches to a normal approximation with continuity correction beyond.
    """
    k, m = p.k, p.threshold
    if k <= _EXACT_K_LIMIT:
        # failures >= m  <=>  1 - CDF(m - 1)
        return float(stats.nbinom.sf(m - 1, k, p.q))
    mu = k * (1.0 - p.q) / p.q
    sigma = math.sqrt(k * (1.0 - p.q)) / p.q
    z = (m - 0.5 - mu) / sigma
    return float(stats.norm.sf(z))


def deletion_bound_probability_mc(p: DeletionBoundParams, trials: int,
                                  seed: int) -> float:
    """Monte Carlo estimate of deletion_bound_probability by simulation.

    Each trial draws Bernoulli(q) update/deletion steps until k updates
    have occurred and checks whether the deletions seen meanwhile reached
    the threshold.  This route shares nothing with the closed form: no
    negative-binomial machinery, raw coin flips only.
    """
    if trials < 1:
        raise BadParams("need at least one trial")
    from .rng import seed_state
    from ._kernel import bernoulli_race_tail
    hits = bernoulli_race_tail(seed_state(np.uint64(seed)), p.k, p.threshold,
                               p.q, trials)
    return hits / trials
