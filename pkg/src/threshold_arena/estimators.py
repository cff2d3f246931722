"""Online estimation algorithms driven by one threshold query per round.

Every algorithm speaks the same protocol: next_query(rng) -> q in {1..n},
then observe(bit) with bit = 1(sample <= q), strictly alternating, and
snapshot() returns the current estimate at any point in between. All
randomness flows through injected numpy Generators; nothing global.

Contents: the uniform-query unbiased estimators (CdfEst, MeanEst), noisy
binary search over monotone coins plus its boosted-quantile and stitched-CDF
consumers, the feedback-rewriting quantile wrapper, the median-of-copies
confidence booster, and two deterministic baselines used by the breaker
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import CdfEstimate, ProtocolError, ValidationError

# Tunables, recorded here once. The search budget is a hard per-search cap of
# ceil(SEARCH_BUDGET_SCALE * log2(n + 2)) oracle calls; a boosted quantile
# spends at most BOOST_TRIALS times that. BOOST_COPIES_SCALE sets how many
# independent copies the confidence booster runs per log(1/delta).
SEARCH_WEIGHT_ETA = 0.25
SEARCH_BUDGET_SCALE = 200
BOOST_TRIALS = 5
BOOST_COPIES_SCALE = 18

CoinOracle = Callable[[int, Optional[np.random.Generator]], int]


class OnlineAlgorithm:
    """Base class enforcing the strict next_query / observe alternation.

    Subclasses implement _query(rng) and _ingest(query, feedback). The public
    ingest(query, feedback) is also usable directly to replay an offline
    (query, feedback) log without touching the rng.
    """

    kind = "median"

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError(f"n must be >= 1, got {n}")
        self.n = int(n)
        self.t = 0
        self._awaiting = False
        self._last_query: int | None = None

    def next_query(self, rng: np.random.Generator) -> int:
        if self._awaiting:
            raise ProtocolError("algorithm", self.t + 1, "next_query called again before observe")
        q = int(self._query(rng))
        self._last_query = q
        self._awaiting = True
        return q

    def observe(self, feedback: int) -> None:
        if not self._awaiting:
            raise ProtocolError("algorithm", self.t + 1, "observe called before next_query")
        self._awaiting = False
        self.ingest(self._last_query, int(feedback))

    def ingest(self, query: int, feedback: int) -> None:
        self._ingest(int(query), int(feedback))
        self.t += 1

    def _query(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def _ingest(self, query: int, feedback: int) -> None:
        raise NotImplementedError

    def snapshot(self):
        raise NotImplementedError


class CdfEst(OnlineAlgorithm):
    """Uniform-random querying CDF estimator.

    Queries i.i.d. uniform indices and tallies positive feedback per index.
    Rescaling the tally at index i by n/t makes the estimate an average of
    per-round unbiased estimates of the threshold function 1(x <= i), which
    is why the output is left unclamped.
    """

    kind = "cdf"

    def __init__(self, n: int):
        super().__init__(n)
        self._tally = np.zeros(n + 2, dtype=np.int64)

    def _query(self, rng: np.random.Generator) -> int:
        return int(rng.integers(1, self.n + 1))

    def _ingest(self, query: int, feedback: int) -> None:
        if feedback:
            self._tally[query] += 1

    def estimate(self) -> CdfEstimate:
        if self.t == 0:
            raise ValidationError("no observations yet")
        values = np.zeros(self.n + 2)
        values[1:-1] = self._tally[1:-1] * (self.n / self.t)
        values[-1] = 1.0
        return CdfEstimate._trusted(self.n, values)

    def snapshot(self) -> CdfEstimate:
        return self.estimate()


class MeanEst(OnlineAlgorithm):
    """Uniform-random querying mean estimator.

    Tracks how often the hidden sample exceeded the query; 1 + (n/t) * count
    averages the per-round unbiased estimates 1 + n * 1(x > q) of the sample.
    """

    kind = "mean"

    def __init__(self, n: int):
        super().__init__(n)
        self._above = 0

    def _query(self, rng: np.random.Generator) -> int:
        return int(rng.integers(1, self.n + 1))

    def _ingest(self, query: int, feedback: int) -> None:
        if not feedback:
            self._above += 1

    def estimate(self) -> float:
        if self.t == 0:
            raise ValidationError("no observations yet")
        return 1.0 + (self.n / self.t) * self._above

    def snapshot(self) -> float:
        return self.estimate()


def median_from_cdf(f_hat: CdfEstimate) -> int:
    """Smallest index whose estimated CDF value exceeds 1/2.

    Always exists because the value at n+1 is pinned to 1; non-monotone
    inputs are handled by the literal minimum rule.
    """
    return int(np.argmax(f_hat.values[1:] > 0.5)) + 1


# ---------------------------------------------------------------------------
# Noisy binary search over monotone coins.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search: the crossing lies in [p_index, p_index+1]."""

    index: int      # interval index m in {0..n}
    queries: int
    capped: bool    # budget ran out before the weights concentrated


@dataclass(frozen=True)
class QuantileEstimate:
    """Median-of-trials quantile anchor w in {1..n}."""

    index: int
    queries: int
    capped: bool              # every trial hit its cap
    trial_indices: tuple[int, ...]


def search_budget(n: int, scale: float = SEARCH_BUDGET_SCALE) -> int:
    """Hard per-search cap on oracle calls: ceil(scale * log2(n + 2))."""
    return int(math.ceil(scale * math.log2(n + 2)))


def _quantile_search(n: int, tau: float, budget: int):
    """Generator core of the search: yields coin indices, receives bits.

    Maintains one weight per candidate interval m in {0..n} (crossing between
    coin m and coin m+1, with virtual endpoint biases 0 and 1). Each step
    flips the coin at the weighted median boundary and multiplies the two
    sides by powers of (1 +- eta); the exponents 2*(1-tau) on feedback 1 and
    2*tau on feedback 0 put the zero-drift point of the weight ratio exactly
    at bias tau, and reduce to the plain 1 +- eta update at tau = 1/2. Halts
    once a single interval holds more than 3/4 of the weight, else at the
    budget. Updates are deterministic functions of the feedback, so a
    deterministic oracle makes the whole search path deterministic.

    Returns a SearchResult via StopIteration.value.
    """
    weights = np.full(n + 1, 1.0 / (n + 1))
    up = 1.0 + SEARCH_WEIGHT_ETA
    dn = 1.0 - SEARCH_WEIGHT_ETA
    exp_one = 2.0 * (1.0 - tau)
    exp_zero = 2.0 * tau
    factors = {
        1: (up ** exp_one, dn ** exp_one),     # (left, right) on feedback 1
        0: (dn ** exp_zero, up ** exp_zero),
    }
    noop = {1: exp_one == 0.0, 0: exp_zero == 0.0}
    queries = 0
    while True:
        csum = np.cumsum(weights)
        total = csum[-1]
        if np.max(weights) > 0.75 * total:
            return SearchResult(int(np.argmax(weights)), queries, False)
        if total > 1e250 or total < 1e-250:
            weights /= total
            continue
        # Candidate k holds the weighted median; flip the boundary coin on its
        # heavier side so both neighbor groups keep losing mass to it.
        k = int(np.searchsorted(csum, 0.5 * total))
        if k <= 0:
            coin = 1
        elif k >= n:
            coin = n
        else:
            coin = k if csum[k - 1] >= total - csum[k] else k + 1
        while True:
            if queries >= budget:
                return SearchResult(int(np.argmax(weights)), queries, True)
            bit = 1 if (yield coin) else 0
            queries += 1
            if not noop[bit]:
                break
            # Uninformative outcome for this tau: weights are unchanged, so
            # the query point cannot move either. Flip the same coin again.
        left, right = factors[bit]
        weights[:coin] *= left
        weights[coin:] *= right


def _drive(gen, oracle: CoinOracle, rng: Optional[np.random.Generator]):
    """Run a query/feedback generator against an oracle callable."""
    try:
        query = next(gen)
        while True:
            query = gen.send(oracle(query, rng))
    except StopIteration as stop:
        return stop.value


def noisy_binary_search(
    coin_oracle: CoinOracle,
    n: int,
    tau: float,
    budget: int | None = None,
    rng: np.random.Generator | None = None,
) -> SearchResult:
    """Locate the interval where monotone coin biases cross tau.

    coin_oracle(i, rng) must return one Bernoulli sample of coin i in {1..n},
    where the unknown biases p_1 <= ... <= p_n are flanked by virtual
    endpoints p_0 = 0 and p_{n+1} = 1. With the default budget the returned
    index m in {0..n} satisfies dist([p_m, p_{m+1}], tau) <= 1/8 with
    probability at least 3/4; when the budget runs out first, the current
    best guess is returned with capped=True.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"tau must lie in [0, 1], got {tau}")
    if budget is None:
        budget = search_budget(n)
    return _drive(_quantile_search(n, tau, budget), coin_oracle, rng)


def _boost_pipeline(n: int, tau: float, trials: int, budget: int):
    """Generator: runs `trials` searches back to back, votes by lower median.

    The good anchor set {w : dist([F(w-1), F(w)], tau) <= 1/8} is an interval
    of indices, so the median of trial outputs is good whenever a majority of
    trials are.
    """
    results = []
    for _ in range(trials):
        res = yield from _quantile_search(n, tau, budget)
        results.append(res)
    anchors = sorted(min(r.index + 1, n) for r in results)
    w = anchors[(len(anchors) - 1) // 2]
    return QuantileEstimate(
        index=w,
        queries=sum(r.queries for r in results),
        capped=all(r.capped for r in results),
        trial_indices=tuple(anchors),
    )


def boosted_quantile(
    comparison_oracle: CoinOracle,
    n: int,
    tau: float,
    rng: np.random.Generator | None = None,
    trials: int = BOOST_TRIALS,
    budget: int | None = None,
) -> QuantileEstimate:
    """Quantile anchor w in {1..n} from repeated budget-capped searches.

    comparison_oracle(q, rng) must answer 1(x <= q) for a fresh i.i.d. sample
    x from a fixed distribution on {1..n} with CDF F. The returned anchor
    satisfies dist([F(w-1), F(w)], tau) <= 1/8 with probability at least
    0.99; capped propagates only if every trial hit its budget.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"tau must lie in [0, 1], got {tau}")
    if trials < 1 or trials % 2 == 0:
        raise ValidationError(f"trials must be a positive odd count, got {trials}")
    if budget is None:
        budget = search_budget(n)
    return _drive(_boost_pipeline(n, tau, trials, budget), comparison_oracle, rng)


ANCHOR_TAUS = tuple((k + 1) / 8 for k in range(8))


def stitch_quantile_anchors(anchors: dict[float, int], n: int) -> CdfEstimate:
    """Assemble a CDF estimate from per-tau anchors.

    F(j) = max{tau : w_tau <= j}, with the max over an empty set taken as 0;
    the value at n+1 is pinned to 1.
    """
    values = np.zeros(n + 2)
    for tau, w in anchors.items():
        if not 1 <= w <= n:
            raise ValidationError(f"anchor {w} for tau={tau} outside 1..{n}")
        values[w : n + 1] = np.maximum(values[w : n + 1], tau)
    values[n + 1] = 1.0
    return CdfEstimate(n, values)


@dataclass(frozen=True)
class StochasticCdfResult:
    estimate: CdfEstimate
    anchors: dict[float, QuantileEstimate]
    queries: int
    capped: bool  # some anchor had every trial capped


def _anchor_pipeline(n: int, trials: int, budget: int, out: dict):
    """Generator: boosted anchor per tau in ANCHOR_TAUS, filling `out` as it goes."""
    for tau in ANCHOR_TAUS:
        out[tau] = yield from _boost_pipeline(n, tau, trials, budget)


def stochastic_cdf(
    comparison_oracle: CoinOracle,
    n: int,
    rng: np.random.Generator | None = None,
    trials: int = BOOST_TRIALS,
    budget: int | None = None,
) -> StochasticCdfResult:
    """Full-CDF estimate against an i.i.d. sample source on {1..n}.

    Computes a boosted anchor for each tau in {1/8, ..., 1} and stitches
    them. Against a fixed distribution with CDF F the result satisfies
    sup_i |F_hat(i) - F(i)| <= 1/4 with probability at least 3/4, using at
    most 8 * trials * budget oracle calls.
    """
    if budget is None:
        budget = search_budget(n)
    anchors: dict[float, QuantileEstimate] = {}
    _drive(_anchor_pipeline(n, trials, budget, anchors), comparison_oracle, rng)
    estimate = stitch_quantile_anchors({tau: qe.index for tau, qe in anchors.items()}, n)
    return StochasticCdfResult(
        estimate=estimate,
        anchors=anchors,
        queries=sum(qe.queries for qe in anchors.values()),
        capped=any(qe.capped for qe in anchors.values()),
    )


class StochasticCdf(OnlineAlgorithm):
    """Runs the quantile-anchor schedule inside the online protocol.

    Queries follow the internal searches; once every anchor is resolved the
    algorithm keeps querying uniformly at random and ignores the feedback.
    snapshot() stitches the anchors resolved so far.
    """

    kind = "cdf"

    def __init__(self, n: int, trials: int = BOOST_TRIALS, budget: int | None = None):
        super().__init__(n)
        if budget is None:
            budget = search_budget(n)
        self._anchors: dict[float, QuantileEstimate] = {}
        self._gen = _anchor_pipeline(n, trials, budget, self._anchors)
        self._done = False
        try:
            self._pending = next(self._gen)
        except StopIteration:
            self._done = True

    def _query(self, rng: np.random.Generator) -> int:
        if self._done:
            return int(rng.integers(1, self.n + 1))
        return self._pending

    def _ingest(self, query: int, feedback: int) -> None:
        if self._done:
            return
        try:
            self._pending = self._gen.send(feedback)
        except StopIteration:
            self._done = True

    @property
    def done(self) -> bool:
        return self._done

    def snapshot(self) -> CdfEstimate:
        return stitch_quantile_anchors(
            {tau: qe.index for tau, qe in self._anchors.items()}, self.n
        )


# ---------------------------------------------------------------------------
# Wrappers.
# ---------------------------------------------------------------------------

def _median_of(alg: OnlineAlgorithm) -> int:
    if alg.kind == "cdf":
        return median_from_cdf(alg.snapshot())
    return int(alg.snapshot())


class QuantileReduction(OnlineAlgorithm):
    """Feedback rewriting that turns a median estimator into a tau-quantile one.

    For tau > 1/2 each bit b becomes b * B with B ~ Bernoulli(1/(2 tau)); for
    tau < 1/2 it becomes b * B + (1 - B) with B ~ Bernoulli(1/(2 (1 - tau))).
    Either is the feedback the inner algorithm would see if a sample were
    occasionally swapped for n+1 (respectively 1), which shifts the inner
    median onto the tau-quantile. tau = 1/2 is the identity wrapper and draws
    nothing, so it is bit-identical to the bare inner algorithm.
    """

    kind = "quantile"

    def __init__(self, inner: OnlineAlgorithm, tau: float, rng: np.random.Generator | None):
        if not 0.0 < tau < 1.0:
            raise ValidationError(f"tau must lie strictly inside (0, 1), got {tau}")
        if inner.kind not in ("cdf", "median"):
            raise ValidationError(f"inner algorithm must estimate a median, got kind {inner.kind!r}")
        if tau != 0.5 and rng is None:
            raise ValidationError("tau != 1/2 needs a Generator for the rewrite coins")
        super().__init__(inner.n)
        self.inner = inner
        self.tau = float(tau)
        self._rng = rng
        self._p = 1.0 / (2.0 * tau) if tau > 0.5 else 1.0 / (2.0 * (1.0 - tau))

    def _query(self, rng: np.random.Generator) -> int:
        return self.inner.next_query(rng)

    def _ingest(self, query: int, feedback: int) -> None:
        if self.tau == 0.5:
            self.inner.observe(feedback)
            return
        b = 1 if self._rng.random() < self._p else 0
        if self.tau > 0.5:
            out = feedback & b
        else:
            out = feedback if b else 1
        self.inner.observe(out)

    def snapshot(self) -> int:
        return _median_of(self.inner)


def quantile_reduction(
    inner: OnlineAlgorithm, tau: float, rng: np.random.Generator | None = None
) -> QuantileReduction:
    return QuantileReduction(inner, tau, rng)


class ConfidenceBoost(OnlineAlgorithm):
    """Random-routing ensemble returning the median of its copies' estimates.

    Runs k = max(1, ceil(scale * ln(1/delta))) independent copies, routes each
    round to a uniformly random copy, and snapshots the median estimate:
    pointwise over CDF values for CDF-kind copies, the scalar median
    otherwise. Copies that have seen no rounds yet are skipped.
    """

    def __init__(
        self,
        factory: Callable[[], OnlineAlgorithm],
        delta: float,
        rng: np.random.Generator,
        copies: int | None = None,
        scale: float = BOOST_COPIES_SCALE,
    ):
        if not 0.0 < delta <= 0.25:
            raise ValidationError(f"delta must lie in (0, 1/4], got {delta}")
        if copies is None:
            copies = max(1, math.ceil(scale * math.log(1.0 / delta)))
        if copies < 1:
            raise ValidationError(f"copies must be >= 1, got {copies}")
        self.copies = [factory() for _ in range(copies)]
        kinds = {c.kind for c in self.copies}
        ns = {c.n for c in self.copies}
        if len(kinds) != 1 or len(ns) != 1:
            raise ValidationError("factory must produce copies of one kind and support size")
        super().__init__(ns.pop())
        self.kind = kinds.pop()
        self.delta = float(delta)
        self._rng = rng
        self._active: int | None = None

    @property
    def k(self) -> int:
        return len(self.copies)

    def _query(self, rng: np.random.Generator) -> int:
        self._active = int(self._rng.integers(len(self.copies)))
        return self.copies[self._active].next_query(rng)

    def _ingest(self, query: int, feedback: int) -> None:
        if self._active is None:
            raise ProtocolError("algorithm", self.t + 1, "confidence boost cannot ingest without a routed query")
        self.copies[self._active].observe(feedback)
        self._active = None

    def snapshot(self):
        live = [c for c in self.copies if c.t > 0]
        if not live:
            raise ValidationError("no observations yet")
        if self.kind == "cdf":
            stacked = np.stack([c.snapshot().values for c in live])
            return CdfEstimate._trusted(self.n, np.median(stacked, axis=0))
        if self.kind == "mean":
            return float(np.median([c.snapshot() for c in live]))
        estimates = sorted(int(c.snapshot()) for c in live)
        return estimates[(len(estimates) - 1) // 2]


def confidence_boost(
    factory: Callable[[], OnlineAlgorithm],
    delta: float,
    rng: np.random.Generator,
    copies: int | None = None,
    scale: float = BOOST_COPIES_SCALE,
) -> ConfidenceBoost:
    return ConfidenceBoost(factory, delta, rng, copies=copies, scale=scale)


# ---------------------------------------------------------------------------
# Deterministic baselines (exist to be broken).
# ---------------------------------------------------------------------------

class MidpointBaseline(OnlineAlgorithm):
    """Queries round-robin over {1..n} and always estimates n // 2."""

    kind = "median"

    def _query(self, rng: np.random.Generator) -> int:
        return (self.t % self.n) + 1

    def _ingest(self, query: int, feedback: int) -> None:
        pass

    def snapshot(self) -> int:
        return max(1, self.n // 2)


class HalvingBaseline(OnlineAlgorithm):
    """Deterministic halving tracker.

    Keeps a live interval [lo, hi], queries its midpoint, and moves the
    boundary after every single bit of feedback; when the interval collapses
    the estimate is updated and the search restarts from the full range.
    """

    kind = "median"

    def __init__(self, n: int):
        super().__init__(n)
        self._lo = 1
        self._hi = n
        self._estimate = max(1, n // 2)

    def _query(self, rng: np.random.Generator) -> int:
        return (self._lo + self._hi) // 2

    def _ingest(self, query: int, feedback: int) -> None:
        if feedback:
            self._hi = query
        else:
            self._lo = min(query + 1, self.n)
        if self._lo >= self._hi:
            self._estimate = self._lo
            self._lo, self._hi = 1, self.n

    def snapshot(self) -> int:
        return self._estimate
