"""Online estimation of medians, quantiles, CDFs, and means from threshold queries.

Each hidden sample x_t in {1..n+1} is observable only through one bit
1(x_t <= q_t) for a query q_t the algorithm picks. The package provides the
estimation algorithms, every adversary construction used to establish their
limits, and a reproducible Monte Carlo arena that measures both.
"""

from .core import (
    ArenaError,
    CdfEstimate,
    EmpiricalCdf,
    NondeterminismError,
    ProblemInstance,
    ProtocolError,
    RoundRecord,
    Trajectory,
    ValidationError,
    as_fraction,
    empirical_cdf,
    ks_distance,
    mean_error,
    quantile_error,
)
from .estimators import (
    ANCHOR_TAUS,
    BOOST_COPIES_SCALE,
    BOOST_TRIALS,
    SEARCH_BUDGET_SCALE,
    SEARCH_WEIGHT_ETA,
    CdfEst,
    ConfidenceBoost,
    HalvingBaseline,
    MeanEst,
    MidpointBaseline,
    OnlineAlgorithm,
    QuantileEstimate,
    QuantileReduction,
    SearchResult,
    StochasticCdf,
    StochasticCdfResult,
    boosted_quantile,
    confidence_boost,
    median_from_cdf,
    noisy_binary_search,
    quantile_reduction,
    search_budget,
    stitch_quantile_anchors,
    stochastic_cdf,
)
from .adversaries import (
    AdaptiveMirrorAdversary,
    Adversary,
    AnytimeAdversary,
    BreakerPair,
    ConstantCoinAdversary,
    MedianLbAdversary,
    MedianLbConfig,
    SequenceAdversary,
    StochasticAdversary,
    adaptive_mirror_adversary,
    amplifier_checkpoints,
    anytime_amplifier,
    breaker_round_choice,
    build_breaker_pair,
    cdf_lb_family,
    constant_coin_adversary,
    load_sample_sequence,
    median_lb_adversary,
    median_lb_cdf,
    median_lb_pmf,
    point_mass_pmf,
    save_sample_sequence,
    stochastic_adversary,
    uniform_adversary,
    uniform_pmf,
)
from .arena import (
    AdversarySpec,
    AlgorithmSpec,
    BreakerReport,
    ComplexityEstimate,
    GameConfig,
    MonteCarloSummary,
    algorithm_kind,
    breaker_report,
    build_adversary,
    build_algorithm,
    derive_rng,
    estimate_query_complexity,
    monte_carlo,
    recompute_errors,
    register_adversary,
    register_algorithm,
    resolve_metric,
    run_game,
    summary_to_dict,
    validate_config,
    write_summary_json,
    write_trajectory_csv,
)

__version__ = "0.1.0"
