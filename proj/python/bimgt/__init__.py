"""Budgeted influence maximization with Shapley-value seed selection."""

from ._bimgt import (
    CSV_HEADER,
    DEFAULT_THETA,
    DomainError,
    ExperimentError,
    Graph,
    MiiaCache,
    ParseError,
    StaleCacheError,
    ValidationError,
    aggregate_range,
    assign_costs,
    build_miia_cache,
    clustering_coefficient,
    detect_communities,
    estimate_shapley,
    exact_shapley,
    marginal_gain_range,
    max_influence_path,
    modularity,
    run_experiment,
    sample_bound,
    select,
    sigma,
)

__all__ = [name for name in dir() if not name.startswith("_")]
