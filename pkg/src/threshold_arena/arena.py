"""Round protocol, Monte Carlo aggregation, and query-complexity estimation.

A game couples one OnlineAlgorithm with one Adversary for a fixed horizon:
each round the algorithm commits a query and the adversary commits a sample,
neither seeing the other's current choice, then the feedback bit goes to the
algorithm and the query joins the adversary-visible history. Errors are
recorded every round against the exact running empirical CDF / mean.

Everything is reproducible: a master seed is split into independent
per-(run, role) lanes via numpy SeedSequence spawn keys, runs are aggregated
in a fixed chunk order regardless of worker count, and i.i.d. matchups hit a
vectorized fast path that consumes the very same random streams as the
general loop.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from .core import (
    ProtocolError,
    RoundRecord,
    Trajectory,
    ValidationError,
    _ks_floats,
    _quantile_error_floats,
    mean_error,
)
from . import adversaries as adv_mod
from . import estimators as est_mod
from .adversaries import Adversary
from .estimators import OnlineAlgorithm, median_from_cdf

ROLE_ALGORITHM = 1
ROLE_ADVERSARY = 2

# Runs are reduced in fixed chunks of this size; the reduction tree (and so
# every floating-point sum) is identical no matter how many workers run it.
CHUNK_RUNS = 32


def derive_rng(master_seed: int, run_id: int, role: int) -> np.random.Generator:
    """Independent, reproducible generator lane for (seed, run, role)."""
    if master_seed < 0:
        raise ValidationError(f"seed must be nonnegative, got {master_seed}")
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_id, role))
    return np.random.Generator(np.random.PCG64(ss))


# ---------------------------------------------------------------------------
# Named specs and registries (picklable, so Monte Carlo workers can rebuild).
# ---------------------------------------------------------------------------

@dataclass
class AlgorithmSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class AdversarySpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class _AlgorithmEntry:
    build: Callable[[dict, int, int, np.random.Generator], OnlineAlgorithm]
    kind: Any  # str, or callable(params) -> str for wrappers
    deterministic: bool = False


@dataclass(frozen=True)
class _AdversaryEntry:
    build: Callable[[dict, int, int, np.random.Generator], Adversary]
    # fast_samples(params, n, horizon, queries, rng) -> sample vector, valid
    # only against algorithms whose queries are feedback-independent; must
    # consume the rng exactly like round-by-round play does.
    fast_samples: Optional[Callable[[dict, int, int, np.ndarray, np.random.Generator], np.ndarray]] = None


_ALGORITHMS: dict[str, _AlgorithmEntry] = {}
_ADVERSARIES: dict[str, _AdversaryEntry] = {}


def register_algorithm(name, build, kind, deterministic=False) -> None:
    """Expose an algorithm builder to configs and the command line.

    build(params, n, horizon, rng) -> OnlineAlgorithm. kind is the estimate
    kind ("cdf" | "mean" | "median" | "quantile") or a callable of params for
    wrappers whose kind depends on what they wrap.
    """
    _ALGORITHMS[name] = _AlgorithmEntry(build=build, kind=kind, deterministic=deterministic)


def register_adversary(name, build, fast_samples=None) -> None:
    """Expose an adversary builder; fast_samples unlocks the vectorized path."""
    _ADVERSARIES[name] = _AdversaryEntry(build=build, fast_samples=fast_samples)


def _as_algorithm_spec(value) -> AlgorithmSpec:
    if isinstance(value, AlgorithmSpec):
        return value
    if isinstance(value, str):
        return AlgorithmSpec(value)
    if isinstance(value, dict):
        return AlgorithmSpec(value["name"], dict(value.get("params", {})))
    raise ValidationError(f"cannot interpret {value!r} as an algorithm spec")


def _as_adversary_spec(value) -> AdversarySpec:
    if isinstance(value, AdversarySpec):
        return value
    if isinstance(value, str):
        return AdversarySpec(value)
    if isinstance(value, dict):
        return AdversarySpec(value["name"], dict(value.get("params", {})))
    raise ValidationError(f"cannot interpret {value!r} as an adversary spec")


def _algorithm_entry(spec: AlgorithmSpec) -> _AlgorithmEntry:
    try:
        return _ALGORITHMS[spec.name]
    except KeyError:
        raise ValidationError(
            f"unknown algorithm {spec.name!r}; registered: {sorted(_ALGORITHMS)}"
        )


def _adversary_entry(spec: AdversarySpec) -> _AdversaryEntry:
    try:
        return _ADVERSARIES[spec.name]
    except KeyError:
        raise ValidationError(
            f"unknown adversary {spec.name!r}; registered: {sorted(_ADVERSARIES)}"
        )


def algorithm_kind(spec: AlgorithmSpec) -> str:
    entry = _algorithm_entry(spec)
    return entry.kind(spec.params) if callable(entry.kind) else entry.kind


def algorithm_is_deterministic(spec: AlgorithmSpec) -> bool:
    return _algorithm_entry(spec).deterministic


def build_algorithm(spec: AlgorithmSpec, n: int, horizon: int, rng) -> OnlineAlgorithm:
    return _algorithm_entry(spec).build(spec.params, n, horizon, rng)


def build_adversary(spec: AdversarySpec, n: int, horizon: int, rng) -> Adversary:
    return _adversary_entry(spec).build(spec.params, n, horizon, rng)


# Built-in algorithms.

def _build_cdfest(params, n, horizon, rng):
    return est_mod.CdfEst(n)


def _build_meanest(params, n, horizon, rng):
    return est_mod.MeanEst(n)


def _build_stochastic_cdf(params, n, horizon, rng):
    return est_mod.StochasticCdf(
        n, trials=params.get("trials", est_mod.BOOST_TRIALS), budget=params.get("budget")
    )


def _build_quantile(params, n, horizon, rng):
    if "tau" not in params:
        raise ValidationError("quantile wrapper needs a tau parameter")
    inner = _as_algorithm_spec(params.get("inner", "cdfest"))
    return est_mod.QuantileReduction(build_algorithm(inner, n, horizon, rng), params["tau"], rng)


def _build_boosted(params, n, horizon, rng):
    if "delta" not in params:
        raise ValidationError("boosted wrapper needs a delta parameter")
    inner = _as_algorithm_spec(params.get("inner", "meanest"))
    return est_mod.ConfidenceBoost(
        lambda: build_algorithm(inner, n, horizon, rng),
        params["delta"],
        rng,
        copies=params.get("copies"),
    )


def _boosted_kind(params) -> str:
    return algorithm_kind(_as_algorithm_spec(params.get("inner", "meanest")))


register_algorithm("cdfest", _build_cdfest, "cdf")
register_algorithm("meanest", _build_meanest, "mean")
register_algorithm("stochastic-cdf", _build_stochastic_cdf, "cdf")
register_algorithm("quantile", _build_quantile, "quantile")
register_algorithm("boosted", _build_boosted, _boosted_kind)
register_algorithm(
    "midpoint", lambda p, n, horizon, rng: est_mod.MidpointBaseline(n), "median", deterministic=True
)
register_algorithm(
    "halving", lambda p, n, horizon, rng: est_mod.HalvingBaseline(n), "median", deterministic=True
)


# Built-in adversaries.

def _uniform_pmf(params, n):
    return adv_mod.uniform_pmf(n)


def _point_mass_pmf(params, n):
    if "j" not in params:
        raise ValidationError("point-mass adversary needs a location parameter j")
    return adv_mod.point_mass_pmf(int(params["j"]), n)


def _stochastic_pmf(params, n):
    if "pmf" not in params:
        raise ValidationError("stochastic adversary needs an explicit pmf")
    pmf = np.asarray([float(p) for p in params["pmf"]], dtype=np.float64)
    if pmf.size != n + 1:
        raise ValidationError(f"pmf must have n+1 = {n + 1} entries, got {pmf.size}")
    return pmf


def _cdf_lb_pmf(params, n):
    if "epsilon" not in params:
        raise ValidationError("cdf-lb adversary needs an epsilon parameter")
    fracs = adv_mod.cdf_lb_family(n, params["epsilon"], params.get("sigma", "+"))
    return np.asarray([float(p) for p in fracs], dtype=np.float64)


def _build_iid(pmf_fn):
    def build(params, n, horizon, rng):
        return adv_mod.StochasticAdversary(pmf_fn(params, n), rng)

    return build


def _iid_fast(pmf_fn):
    def fast(params, n, horizon, queries, rng):
        cum = np.cumsum(pmf_fn(params, n))
        cum[-1] = 1.0
        return np.searchsorted(cum, rng.random(horizon), side="right") + 1

    return fast


def _mirror_fast(params, n, horizon, queries, rng):
    samples = np.empty(horizon, dtype=np.int64)
    samples[0] = n // 2
    samples[1:] = np.minimum(queries[:-1] + 1, n + 1)
    return samples


def _coin_fast(params, n, horizon, queries, rng):
    value = 1 if rng.random() < 0.5 else 2
    return np.full(horizon, value, dtype=np.int64)


def _sequence_fast(params, n, horizon, queries, rng):
    adversary = _build_sequence(params, n, horizon, rng)
    if len(adversary.samples) < horizon:
        raise ValidationError(
            f"sample sequence exhausted after {len(adversary.samples)} rounds"
        )
    return np.asarray(adversary.samples[:horizon], dtype=np.int64)


def _median_lb_fast(params, n, horizon, queries, rng):
    adversary = _build_median_lb(params, n, horizon, rng)  # draws j like live play
    config = adversary.config
    half = config.horizon // 2
    samples = np.empty(horizon, dtype=np.int64)
    phase1 = min(horizon, half)
    if phase1:
        samples[:phase1] = (
            np.searchsorted(adversary._cum, rng.random(phase1), side="right") + 1
        )
    block_end = min(horizon, half + adversary.j * config.m)
    samples[phase1:block_end] = n
    samples[block_end:] = 1
    return samples


def _build_median_lb(params, n, horizon, rng):
    for key in ("k", "m", "epsilon"):
        if key not in params:
            raise ValidationError(f"median-lb adversary needs a {key} parameter")
    config = adv_mod.MedianLbConfig(
        int(params["k"]), int(params["m"]), params["epsilon"], params.get("sigma", "+")
    )
    if config.n != n:
        raise ValidationError(f"median-lb config has n = 4k = {config.n}, game has n = {n}")
    return adv_mod.MedianLbAdversary(config, rng)


def _build_sequence(params, n, horizon, rng):
    if "samples" in params:
        samples = params["samples"]
    elif "path" in params:
        samples = adv_mod.load_sample_sequence(params["path"])
    else:
        raise ValidationError("sequence adversary needs samples or a path parameter")
    return adv_mod.SequenceAdversary(samples, n)


def _build_amplified(params, n, horizon, rng):
    if "inner" not in params:
        raise ValidationError("amplified adversary needs an inner adversary spec")
    inner = _as_adversary_spec(params["inner"])
    factory = lambda segment: build_adversary(inner, n, segment, rng)
    return adv_mod.AnytimeAdversary(factory, t0=int(params.get("t0", 1)))


register_adversary("uniform", _build_iid(_uniform_pmf), fast_samples=_iid_fast(_uniform_pmf))
register_adversary("point-mass", _build_iid(_point_mass_pmf), fast_samples=_iid_fast(_point_mass_pmf))
register_adversary("stochastic", _build_iid(_stochastic_pmf), fast_samples=_iid_fast(_stochastic_pmf))
register_adversary("cdf-lb", _build_iid(_cdf_lb_pmf), fast_samples=_iid_fast(_cdf_lb_pmf))
register_adversary("median-lb", _build_median_lb, fast_samples=_median_lb_fast)
register_adversary(
    "coin",
    lambda p, n, horizon, rng: adv_mod.ConstantCoinAdversary(n, rng),
    fast_samples=_coin_fast,
)
register_adversary(
    "mirror",
    lambda p, n, horizon, rng: adv_mod.AdaptiveMirrorAdversary(n),
    fast_samples=_mirror_fast,
)
register_adversary("sequence", _build_sequence, fast_samples=_sequence_fast)
register_adversary("amplified", _build_amplified)


# ---------------------------------------------------------------------------
# Game configuration.
# ---------------------------------------------------------------------------

_COMPATIBLE_METRICS = {
    "cdf": ("cdf", "median"),
    "median": ("median",),
    "mean": ("mean",),
    "quantile": ("quantile",),
}
_DEFAULT_METRIC = {"cdf": "cdf", "median": "median", "mean": "mean", "quantile": "quantile"}


@dataclass
class GameConfig:
    """One matchup: algorithm vs adversary at a fixed horizon and master seed.

    metric defaults to the algorithm kind's natural metric; a CDF-kind
    algorithm may instead be scored on the median it implies. anytime=True
    makes Monte Carlo success mean "error <= epsilon at every round past
    burn_in" instead of only at the horizon.
    """

    n: int
    horizon: int
    algorithm: AlgorithmSpec | str
    adversary: AdversarySpec | str
    metric: str | None = None
    tau: float | None = None
    seed: int = 0
    anytime: bool = False
    burn_in: int = 0

    def __post_init__(self) -> None:
        self.algorithm = _as_algorithm_spec(self.algorithm)
        self.adversary = _as_adversary_spec(self.adversary)


def resolve_metric(config: GameConfig) -> tuple[str, float]:
    """Validate the config shape and return (metric, tau) for scoring."""
    if config.n < 2:
        raise ValidationError(f"n must be >= 2, got {config.n}")
    if config.horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {config.horizon}")
    if not 0 <= config.burn_in < config.horizon:
        raise ValidationError(f"burn_in must lie in [0, horizon), got {config.burn_in}")
    if config.seed < 0:
        raise ValidationError(f"seed must be nonnegative, got {config.seed}")
    kind = algorithm_kind(config.algorithm)
    metric = config.metric or _DEFAULT_METRIC[kind]
    if metric not in _COMPATIBLE_METRICS[kind]:
        raise ValidationError(
            f"metric {metric!r} is incompatible with a {kind!r}-kind algorithm"
        )
    if metric == "quantile":
        tau = config.tau
        if tau is None:
            tau = config.algorithm.params.get("tau")
        if tau is None:
            raise ValidationError("quantile metric needs tau")
        tau = float(tau)
        if not 0.0 <= tau <= 1.0:
            raise ValidationError(f"tau must lie in [0, 1], got {tau}")
    else:
        tau = 0.5
    return metric, tau


def validate_config(config: GameConfig) -> None:
    """Exhaustive pre-run validation, including a dry build of both sides."""
    resolve_metric(config)
    build_algorithm(config.algorithm, config.n, config.horizon, derive_rng(config.seed, 0, ROLE_ALGORITHM))
    build_adversary(config.adversary, config.n, config.horizon, derive_rng(config.seed, 0, ROLE_ADVERSARY))


# ---------------------------------------------------------------------------
# Single game.
# ---------------------------------------------------------------------------

def _measurer(metric: str, tau: float, kind: str, n: int):
    """Per-round (error, scalar estimate) from the live snapshot and counts."""
    def checked(m: int) -> int:
        if not 1 <= m <= n + 1:
            raise ValidationError(f"index estimate {m} outside 1..{n + 1}")
        return m

    if metric == "cdf":
        def measure(alg, cum, t, total):
            snap = alg.snapshot()
            f = cum / t
            return _ks_floats(snap.values, f), median_from_cdf(snap)
    elif metric == "median":
        if kind == "cdf":
            def measure(alg, cum, t, total):
                m = median_from_cdf(alg.snapshot())
                return _quantile_error_floats(cum / t, m, 0.5), m
        else:
            def measure(alg, cum, t, total):
                m = checked(int(alg.snapshot()))
                return _quantile_error_floats(cum / t, m, 0.5), m
    elif metric == "quantile":
        def measure(alg, cum, t, total):
            w = checked(int(alg.snapshot()))
            return _quantile_error_floats(cum / t, w, tau), w
    elif metric == "mean":
        def measure(alg, cum, t, total):
            v = float(alg.snapshot())
            return mean_error(v, total / t, n), v
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    return measure


def run_game(config: GameConfig, run_id: int = 0) -> Trajectory:
    """Play one seeded game and record the full trajectory.

    The adversary's sample at round t is requested with history through round
    t-1 only; determinism is total given (seed, run_id). Contract violations
    raise ProtocolError naming the offender and the round.
    """
    metric, tau = resolve_metric(config)
    n, horizon = config.n, config.horizon
    kind = algorithm_kind(config.algorithm)
    alg_rng = derive_rng(config.seed, run_id, ROLE_ALGORITHM)
    adv_rng = derive_rng(config.seed, run_id, ROLE_ADVERSARY)
    alg = build_algorithm(config.algorithm, n, horizon, alg_rng)
    adversary = build_adversary(config.adversary, n, horizon, adv_rng)
    measure = _measurer(metric, tau, kind, n)

    records: list[RoundRecord] = []
    errors = np.empty(horizon)
    estimates: list = []
    cum = np.zeros(n + 2, dtype=np.int64)
    total = 0
    for t in range(1, horizon + 1):
        q = alg.next_query(alg_rng)
        if not 1 <= q <= n:
            raise ProtocolError("algorithm", t, f"query {q} outside 1..{n}")
        x = adversary.next_sample(records)
        if not 1 <= x <= n + 1:
            raise ProtocolError("adversary", t, f"sample {x} outside 1..{n + 1}")
        b = 1 if x <= q else 0
        alg.observe(b)
        records.append(RoundRecord(t, q, x, b))
        cum[x:] += 1
        total += x
        try:
            err, est = measure(alg, cum, t, total)
        except ValidationError as exc:
            raise ProtocolError("algorithm", t, str(exc))
        errors[t - 1] = err
        estimates.append(est)
    return Trajectory(
        n=n,
        metric=metric,
        tau=tau,
        records=records,
        errors=errors,
        estimates=estimates,
        final_snapshot=alg.snapshot(),
    )


def recompute_errors(trajectory: Trajectory) -> np.ndarray:
    """Rebuild the error series from the raw (sample, estimate) log.

    Supported for scalar-estimate metrics (median, quantile, mean); the
    result matches the recorded series bit for bit because the same float
    kernels run on the same values.
    """
    if trajectory.metric == "cdf":
        raise ValidationError("cdf error series requires replaying the algorithm, not the log")
    n = trajectory.n
    cum = np.zeros(n + 2, dtype=np.int64)
    total = 0
    out = np.empty(trajectory.horizon)
    for idx, record in enumerate(trajectory.records):
        cum[record.sample :] += 1
        total += record.sample
        t = idx + 1
        est = trajectory.estimates[idx]
        if trajectory.metric == "mean":
            out[idx] = mean_error(float(est), total / t, n)
        else:
            out[idx] = _quantile_error_floats(cum / t, int(est), trajectory.tau)
    return out


# ---------------------------------------------------------------------------
# Monte Carlo.
# ---------------------------------------------------------------------------

@dataclass
class MonteCarloSummary:
    """Cross-run aggregates; arrays are per round (length = horizon).

    success arrays appear only when an epsilon was supplied. index_mse /
    index_mse_stderr hold the per-index squared error of the final CDF
    estimate for CDF-kind algorithms, else None.
    """

    config: GameConfig
    runs: int
    metric: str
    tau: float
    epsilon: float | None
    mean_error: np.ndarray
    mse: np.ndarray
    success_rate: np.ndarray | None
    final_errors: np.ndarray
    success_at_horizon: float | None
    success_anytime: float | None
    index_mse: np.ndarray | None
    index_mse_stderr: np.ndarray | None


def _new_partial(horizon: int, n: int, epsilon, index_stats: bool) -> dict:
    return {
        "sum_err": np.zeros(horizon),
        "sum_sq": np.zeros(horizon),
        "succ": np.zeros(horizon, dtype=np.int64) if epsilon is not None else None,
        "finals": [],
        "final_succ": 0,
        "anytime_succ": 0,
        "idx_sum": np.zeros(n + 2) if index_stats else None,
        "idx_sumsq": np.zeros(n + 2) if index_stats else None,
    }


def _absorb_run(partial: dict, errs: np.ndarray, epsilon, burn_in: int, idx_sq=None) -> None:
    partial["sum_err"] += errs
    partial["sum_sq"] += errs * errs
    if epsilon is not None:
        ok = errs <= epsilon
        partial["succ"] += ok
        partial["final_succ"] += bool(ok[-1])
        partial["anytime_succ"] += bool(ok[burn_in:].all())
    partial["finals"].append(errs[-1])
    if idx_sq is not None:
        partial["idx_sum"] += idx_sq
        partial["idx_sumsq"] += idx_sq * idx_sq


def _fast_sampler(config: GameConfig):
    """The adversary's vector sampler when this matchup is vectorizable.

    Requires an algorithm whose queries never depend on feedback (the two
    uniform-query estimators) and an adversary that can produce its whole
    sample vector from the query vector alone.
    """
    if config.algorithm.name not in ("cdfest", "meanest"):
        return None
    return _adversary_entry(config.adversary).fast_samples


def _fast_chunk(config, metric, tau, lo, hi, epsilon, sampler, index_stats) -> dict:
    """Vectorized replay of runs [lo, hi): same streams, same float ops."""
    n, horizon, seed = config.n, config.horizon, config.seed
    params = config.adversary.params
    tt = np.arange(1, horizon + 1, dtype=np.float64)
    rows = np.arange(horizon)
    partial = _new_partial(horizon, n, epsilon, index_stats)
    for run in range(lo, hi):
        alg_rng = derive_rng(seed, run, ROLE_ALGORITHM)
        adv_rng = derive_rng(seed, run, ROLE_ADVERSARY)
        queries = alg_rng.integers(1, n + 1, size=horizon)
        samples = sampler(params, n, horizon, queries, adv_rng)
        bits = samples <= queries
        idx_sq = None
        if config.algorithm.name == "meanest":
            above = np.cumsum(~bits)
            est = 1.0 + (n / tt) * above
            mu = np.cumsum(samples) / tt
            errs = np.abs(est - mu) / n
        else:
            hits = np.zeros((horizon, n + 2), dtype=np.int64)
            hits[rows[bits], queries[bits]] = 1
            tally = np.cumsum(hits, axis=0)
            fhat = tally * (n / tt)[:, None]
            fhat[:, 0] = 0.0
            fhat[:, -1] = 1.0
            occur = np.zeros((horizon, n + 2), dtype=np.int64)
            occur[rows, samples] = 1
            counts = np.cumsum(np.cumsum(occur, axis=0), axis=1)
            f = counts / tt[:, None]
            if metric == "cdf":
                errs = np.max(np.abs(fhat[:, 1:] - f[:, 1:]), axis=1)
            else:
                med = np.argmax(fhat[:, 1:] > 0.5, axis=1) + 1
                lo_vals = np.take_along_axis(f, (med - 1)[:, None], axis=1)[:, 0]
                hi_vals = np.take_along_axis(f, med[:, None], axis=1)[:, 0]
                errs = np.maximum(0.0, np.maximum(lo_vals - tau, tau - hi_vals))
            if index_stats:
                diff = fhat[-1] - f[-1]
                idx_sq = diff * diff
        _absorb_run(partial, errs, epsilon, config.burn_in, idx_sq)
    return partial


def _general_chunk(
    config, metric, tau, lo, hi, epsilon, index_stats, sink=None, keep_trajectories=False
) -> dict:
    partial = _new_partial(config.horizon, config.n, epsilon, index_stats)
    if keep_trajectories:
        partial["trajectories"] = []
    for run in range(lo, hi):
        trajectory = run_game(config, run_id=run)
        idx_sq = None
        if index_stats:
            diff = trajectory.final_snapshot.values - trajectory.empirical().floats()
            idx_sq = diff * diff
        _absorb_run(partial, trajectory.errors, epsilon, config.burn_in, idx_sq)
        if sink is not None:
            sink(run, trajectory)
        if keep_trajectories:
            partial["trajectories"].append((run, trajectory))
    return partial


def _chunk_worker(args) -> dict:
    config, lo, hi, epsilon, keep_trajectories = args
    metric, tau = resolve_metric(config)
    index_stats = algorithm_kind(config.algorithm) == "cdf"
    if keep_trajectories:
        return _general_chunk(
            config, metric, tau, lo, hi, epsilon, index_stats, keep_trajectories=True
        )
    sampler = _fast_sampler(config)
    if sampler is not None:
        return _fast_chunk(config, metric, tau, lo, hi, epsilon, sampler, index_stats)
    return _general_chunk(config, metric, tau, lo, hi, epsilon, index_stats)


def monte_carlo(
    config: GameConfig,
    runs: int,
    epsilon: float | None = None,
    workers: int = 1,
    sink: Callable[[int, Trajectory], None] | None = None,
) -> MonteCarloSummary:
    """Aggregate `runs` independent seeded games of one config.

    Run r uses the rng lanes derived from (config.seed, r), so the summary
    equals what r separate run_game(config, run_id=r) calls would produce.
    With workers > 1 the fixed-size chunks are farmed to a process pool;
    results are bit-identical to the serial path. A sink receives every
    (run_id, Trajectory) in run order; trajectories are only produced by the
    scalar game loop, so a sink disables the vectorized shortcut.
    """
    if runs < 1:
        raise ValidationError(f"runs must be >= 1, got {runs}")
    metric, tau = resolve_metric(config)
    index_stats = algorithm_kind(config.algorithm) == "cdf"
    bounds = [(lo, min(lo + CHUNK_RUNS, runs)) for lo in range(0, runs, CHUNK_RUNS)]

    if workers > 1 and len(bounds) > 1:
        jobs = [(config, lo, hi, epsilon, sink is not None) for lo, hi in bounds]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = []
            for part in pool.map(_chunk_worker, jobs):
                for run_id, trajectory in part.pop("trajectories", ()):
                    sink(run_id, trajectory)
                partials.append(part)
    elif sink is not None:
        partials = [
            _general_chunk(config, metric, tau, lo, hi, epsilon, index_stats, sink=sink)
            for lo, hi in bounds
        ]
    else:
        partials = [_chunk_worker((config, lo, hi, epsilon, False)) for lo, hi in bounds]

    horizon, n = config.horizon, config.n
    combined = _new_partial(horizon, n, epsilon, index_stats)
    finals: list[float] = []
    for part in partials:  # fixed chunk order keeps float sums reproducible
        combined["sum_err"] += part["sum_err"]
        combined["sum_sq"] += part["sum_sq"]
        if epsilon is not None:
            combined["succ"] += part["succ"]
            combined["final_succ"] += part["final_succ"]
            combined["anytime_succ"] += part["anytime_succ"]
        if index_stats:
            combined["idx_sum"] += part["idx_sum"]
            combined["idx_sumsq"] += part["idx_sumsq"]
        finals.extend(part["finals"])

    index_mse = index_stderr = None
    if index_stats:
        index_mse = combined["idx_sum"] / runs
        var = combined["idx_sumsq"] / runs - index_mse**2
        index_stderr = np.sqrt(np.maximum(var, 0.0) / runs)
    return MonteCarloSummary(
        config=config,
        runs=runs,
        metric=metric,
        tau=tau,
        epsilon=epsilon,
        mean_error=combined["sum_err"] / runs,
        mse=combined["sum_sq"] / runs,
        success_rate=(combined["succ"] / runs) if epsilon is not None else None,
        final_errors=np.asarray(finals),
        success_at_horizon=(combined["final_succ"] / runs) if epsilon is not None else None,
        success_anytime=(combined["anytime_succ"] / runs) if epsilon is not None else None,
        index_mse=index_mse,
        index_mse_stderr=index_stderr,
    )


# ---------------------------------------------------------------------------
# Empirical query complexity.
# ---------------------------------------------------------------------------

@dataclass
class ComplexityEstimate:
    t_hat: int
    resolved: bool
    epsilon: float
    target: float
    runs: int
    curve: list[tuple[int, float]]  # probed (horizon, success rate), sorted


def estimate_query_complexity(
    config: GameConfig,
    epsilon: float,
    target: float = 0.75,
    runs: int = 400,
    t_cap: int = 1 << 20,
    workers: int = 1,
) -> ComplexityEstimate:
    """Smallest horizon at which the config wins with the target probability.

    Doubles the horizon until the success rate clears the target at both T
    and 2T, then bisects down to +-10%. Success means final error <= epsilon
    (or error <= epsilon at every round past burn_in when config.anytime).
    Hitting t_cap returns the cap with resolved=False.
    """
    if not 0.0 < epsilon <= 0.5:
        raise ValidationError(f"epsilon must lie in (0, 1/2], got {epsilon}")
    if runs < 200:
        raise ValidationError(f"need >= 200 runs to resolve a {target} success rate, got {runs}")
    rates: dict[int, float] = {}

    def rate(horizon: int) -> float:
        if horizon not in rates:
            probe = dataclasses.replace(config, horizon=horizon)
            summary = monte_carlo(probe, runs, epsilon=epsilon, workers=workers)
            rates[horizon] = (
                summary.success_anytime if config.anytime else summary.success_at_horizon
            )
        return rates[horizon]

    horizon = 1
    while horizon <= t_cap:
        if rate(horizon) >= target and rate(2 * horizon) >= target:
            break
        horizon *= 2
    else:
        return ComplexityEstimate(t_cap, False, epsilon, target, runs, sorted(rates.items()))

    lo, hi = horizon // 2, horizon
    while hi - lo > max(1, hi // 10):
        mid = (lo + hi) // 2
        if rate(mid) >= target:
            hi = mid
        else:
            lo = mid
    return ComplexityEstimate(hi, True, epsilon, target, runs, sorted(rates.items()))


# ---------------------------------------------------------------------------
# Export.
# ---------------------------------------------------------------------------

TRAJECTORY_CSV_HEADER = "run_id,t,query,feedback,error"


def trajectory_csv_header(reveal_samples: bool = False) -> str:
    return TRAJECTORY_CSV_HEADER + (",sample" if reveal_samples else "")


def trajectory_csv_rows(run_id, trajectory: Trajectory, reveal_samples: bool = False):
    """Yield one CSV line per round; hidden samples only on request."""
    for record, err in zip(trajectory.records, trajectory.errors):
        row = f"{run_id},{record.t},{record.query},{record.feedback},{float(err)!r}"
        if reveal_samples:
            row += f",{record.sample}"
        yield row


def write_trajectory_csv(path, trajectories, reveal_samples: bool = False) -> None:
    """CSV export: run_id,t,query,feedback,error (+sample with reveal_samples).

    trajectories is an iterable of (run_id, Trajectory).
    """
    with open(path, "w") as fh:
        fh.write(trajectory_csv_header(reveal_samples) + "\n")
        for run_id, trajectory in trajectories:
            for row in trajectory_csv_rows(run_id, trajectory, reveal_samples):
                fh.write(row + "\n")


def config_to_dict(config: GameConfig) -> dict:
    out = dataclasses.asdict(config)
    out["algorithm"] = {"name": config.algorithm.name, "params": _jsonable(config.algorithm.params)}
    out["adversary"] = {"name": config.adversary.name, "params": _jsonable(config.adversary.params)}
    return out


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (AlgorithmSpec, AdversarySpec)):
        return {"name": value.name, "params": _jsonable(value.params)}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


def summary_to_dict(summary: MonteCarloSummary, t_hat: int | None = None) -> dict:
    out = {
        "config": config_to_dict(summary.config),
        "runs": summary.runs,
        "metric": summary.metric,
        "tau": summary.tau,
        "epsilon": summary.epsilon,
        "mean_error": summary.mean_error.tolist(),
        "mse": summary.mse.tolist(),
        "success_rate": None if summary.success_rate is None else summary.success_rate.tolist(),
        "success_at_horizon": summary.success_at_horizon,
        "success_anytime": summary.success_anytime,
        "final_errors": summary.final_errors.tolist(),
        "index_mse": None if summary.index_mse is None else summary.index_mse.tolist(),
    }
    if t_hat is not None:
        out["t_hat"] = t_hat
    return out


def write_summary_json(path, summary: MonteCarloSummary, t_hat: int | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(summary_to_dict(summary, t_hat=t_hat), fh, indent=2)
        fh.write("\n")


def default_workers() -> int:
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Breaker harness: defeat a deterministic baseline and document it.
# ---------------------------------------------------------------------------

@dataclass
class BreakerReport:
    """Outcome of running one deterministic baseline against its breaker pair."""

    algorithm: str
    n: int
    horizon: int
    p: Fraction
    feedback_identical: bool
    estimate: int
    error_left: Fraction
    error_right: Fraction
    threshold: Fraction

    @property
    def max_error(self):
        return max(self.error_left, self.error_right)

    @property
    def broken(self) -> bool:
        return self.feedback_identical and self.max_error >= self.threshold

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "n": self.n,
            "horizon": self.horizon,
            "p": str(self.p),
            "feedback_identical": self.feedback_identical,
            "estimate": self.estimate,
            "error_left": float(self.error_left),
            "error_right": float(self.error_right),
            "error_left_exact": str(self.error_left),
            "error_right_exact": str(self.error_right),
            "max_error": float(self.max_error),
            "threshold": float(self.threshold),
            "broken": self.broken,
        }


def breaker_report(algorithm, n: int, horizon: int, seed: int = 0) -> BreakerReport:
    """Build the breaker pair for a deterministic baseline and replay both sides.

    Replays the baseline against the left and right sequences, checks that the
    two feedback streams are bitwise identical, and scores the shared final
    median estimate exactly against both empirical CDFs. The construction
    guarantees the larger error is at least 1/16.
    """
    from .core import empirical_cdf, quantile_error

    spec = _as_algorithm_spec(algorithm)
    if not algorithm_is_deterministic(spec):
        raise ValidationError(f"algorithm {spec.name!r} is not registered as deterministic")
    if algorithm_kind(spec) != "median":
        raise ValidationError(f"breaker needs a median-kind baseline, got {algorithm_kind(spec)!r}")

    factory = lambda: build_algorithm(spec, n, horizon, derive_rng(seed, 0, ROLE_ALGORITHM))
    pair = adv_mod.build_breaker_pair(factory, n, horizon)

    def replay(samples):
        config = GameConfig(
            n=n,
            horizon=horizon,
            algorithm=spec,
            adversary=AdversarySpec("sequence", {"samples": list(samples)}),
            metric="median",
            seed=seed,
        )
        return run_game(config)

    left_run = replay(pair.left)
    right_run = replay(pair.right)
    feedback_identical = (
        [r.feedback for r in left_run.records] == [r.feedback for r in right_run.records]
    )
    estimate = int(left_run.estimates[-1])
    error_left = quantile_error(empirical_cdf(pair.left, n), estimate, Fraction(1, 2))
    error_right = quantile_error(empirical_cdf(pair.right, n), int(right_run.estimates[-1]), Fraction(1, 2))
    return BreakerReport(
        algorithm=spec.name,
        n=n,
        horizon=horizon,
        p=pair.p,
        feedback_identical=feedback_identical,
        estimate=estimate,
        error_left=error_left,
        error_right=error_right,
        threshold=Fraction(1, 16),
    )
