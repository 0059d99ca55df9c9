"""DROP sparse Gaussian graphical model estimation."""

from ._core import (
    DropError,
    edge_metrics,
    fit_drop,
    generate_graph,
    kendall_skeptic,
    louvain,
    modularity,
    normal_quantile,
    npn_transform,
    run_baseline,
    run_benchmark,
    sample,
    select_lambda,
    spearman_skeptic,
)

__all__ = [
    "DropError",
    "edge_metrics",
    "fit_drop",
    "generate_graph",
    "kendall_skeptic",
    "louvain",
    "modularity",
    "normal_quantile",
    "npn_transform",
    "run_baseline",
    "run_benchmark",
    "sample",
    "select_lambda",
    "spearman_skeptic",
]
