"""Lead-lag detection in multivariate time series by subsequence clustering."""

from ._core import (
    LeadLagError,
    adjusted_rand_index,
    ccf_lead_lag_matrix,
    detect,
    ewma,
    generate_panel,
    ground_truth,
    kmeans_pp,
    performance_report,
    rescale_pnl,
    rowsum_rank,
    run_strategy,
    sharpe_significance,
)

__all__ = [
    "LeadLagError",
    "adjusted_rand_index",
    "ccf_lead_lag_matrix",
    "detect",
    "ewma",
    "generate_panel",
    "ground_truth",
    "kmeans_pp",
    "performance_report",
    "rescale_pnl",
    "rowsum_rank",
    "run_strategy",
    "sharpe_significance",
]
