"""Local optima network analysis for configurable software systems."""

__version__ = "0.1.0"

from .embedding import EmbeddingConfig, bucket_out_degree, embed, similarity_matrix
from .evaluators import EvaluationCache, ExternalCommandEvaluator, NKLandscape, NKLandscapeSpec, TableEvaluator
from .lon import (
    LocalOptimaNetwork,
    build_run_lon,
    funnels,
    global_optimum,
    improving_subgraph,
    prune,
    prune_with_report,
    synthesize,
)
from .metrics import (
    assortativity,
    average_clustering,
    metric_report,
    network_density,
    pcc,
    rich_club_curve,
    shortest_path_length,
    wilcoxon_rank_sum,
)
from .sampler import RunTrace, SamplerParams, iterative_first_improvement, sample_repeats, sample_run
from .space import ConfigurationSpace, OptionSpec, canonical_key, neighborhood, random_sample
from .stability import StabilityConfig, detect_stable

__all__ = [
    "ConfigurationSpace",
    "EmbeddingConfig",
    "EvaluationCache",
    "ExternalCommandEvaluator",
    "LocalOptimaNetwork",
    "NKLandscape",
    "NKLandscapeSpec",
    "OptionSpec",
    "RunTrace",
    "SamplerParams",
    "StabilityConfig",
    "TableEvaluator",
    "assortativity",
    "average_clustering",
    "bucket_out_degree",
    "build_run_lon",
    "canonical_key",
    "detect_stable",
    "embed",
    "funnels",
    "global_optimum",
    "improving_subgraph",
    "iterative_first_improvement",
    "metric_report",
    "neighborhood",
    "network_density",
    "pcc",
    "prune",
    "prune_with_report",
    "random_sample",
    "rich_club_curve",
    "sample_repeats",
    "sample_run",
    "shortest_path_length",
    "similarity_matrix",
    "synthesize",
    "wilcoxon_rank_sum",
]
