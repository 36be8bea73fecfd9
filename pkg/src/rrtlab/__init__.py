"""Degree statistics of uniform random recursive trees, twice over: direct
uniform-attachment growth and a discrete merging chain whose final tree has
the same degree law.  Exact small-n oracles back the Monte Carlo engine."""

from .errors import (
    ConfigurationError,
    InvalidStructureError,
    ResourceGuardError,
    RrtlabError,
)
from .exact import (
    alternating_bounds,
    decoupling_check,
    enumerate_events,
    enumerate_increasing_trees,
    exact_factorial_moments,
    exact_profile_law,
    orthant_check,
    phi_fiber_census,
)
from .kingman import (
    CoalescentEvents,
    LabelledOutcome,
    SelectionRecord,
    fast_degree_sample,
    replay,
    replay_degrees,
    sample_events,
    sample_tau,
    selection_records,
    selection_stats_sample,
    tau_k,
)
from .montecarlo import ExperimentConfig, SummaryReport, replicate_rng, run, substream_seed
from .rrt import degree_sample, grow_rrt
from .stats import (
    DegreeProfile,
    LimitLaw,
    MomentSpec,
    clt_zscore,
    epsilon,
    factorial_moment_estimate,
    floor_log2,
    gof,
    limit_mean,
    moment_prediction,
    profile,
    tail_reference,
)
from .trees import DegreeVector, RootedTree, child_counts, degree_multiset, is_increasing

__version__ = "0.1.0"
