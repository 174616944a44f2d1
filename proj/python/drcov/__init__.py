"""Drug repurposing on a drug/disease/gene/anatomy graph."""

from ._core import (
    DrcovError,
    Graph,
    NumericError,
    ParseError,
    ShapeError,
    ValidationError,
    __version__,
    auroc,
    baseline,
    config_defaults,
    evaluate,
    ingest,
    predict,
    proximity,
    train,
    weighted_bce,
    z_score,
)

__all__ = [
    "DrcovError",
    "Graph",
    "NumericError",
    "ParseError",
    "ShapeError",
    "ValidationError",
    "__version__",
    "auroc",
    "baseline",
    "config_defaults",
    "evaluate",
    "ingest",
    "predict",
    "proximity",
    "train",
    "weighted_bce",
    "z_score",
]
