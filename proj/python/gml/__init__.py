"""Ground metric learning for earth mover's distances."""

from ._core import (
    emd,
    eval_ck,
    independence_table,
    initial_point,
    is_metric,
    knn_curves,
    project_feasible,
    solve_transport,
    synth,
    train,
    triangle_fix,
    typical_table,
    uniform_metric,
)

__all__ = [
    "emd",
    "eval_ck",
    "independence_table",
    "initial_point",
    "is_metric",
    "knn_curves",
    "project_feasible",
    "solve_transport",
    "synth",
    "train",
    "triangle_fix",
    "typical_table",
    "uniform_metric",
]
