"""Bernstein-bounded estimates of classification bias between two groups."""

__version__ = "0.1.0"

from .bounds import (
    BiasClaim,
    BoundFamily,
    BoundParams,
    ConfidenceInterval,
    bernstein_tail_bound,
    bias_claim,
    confidence_interval,
    hoeffding_half_width,
    interval_half_width,
    raw_bernstein_tail_bound,
    required_sample_size,
)
from .data import (
    MNLI_GENRE_COSTS,
    SyntheticPopulation,
    SyntheticPopulationConfig,
    cost_table,
    generate_population,
    load_examples,
    load_population,
    mnli_analog_config,
    true_disparity,
    write_examples,
    write_population,
)
from .disparity import (
    AnnotatedExample,
    DisparityEstimate,
    GroupTag,
    amortized_disparity,
    empirical_variance_of_amortized,
    estimate_groupwise_disparity,
)
from .estimator import BernsteinBoundedUnfairness
from .measures import Direction, MeasureKind, MeasureSpec, resolve_cost, resolve_group
from .simulation import (
    CoverageCell,
    CoverageReport,
    emit_plot_data,
    run_coverage_experiment,
    run_coverage_grid,
    sweep_sample_size,
)
