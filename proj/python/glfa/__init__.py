"""Graph-incorporated latent factor analysis for high-dimensional sparse matrices."""

from ._glfa import (
    Confidence,
    DivergenceError,
    Entry,
    EntryKind,
    FactorModel,
    GlfaParseError,
    HoiRecord,
    HoiStats,
    IdMap,
    InteractionGraph,
    PseudoEntry,
    RoundReport,
    Scorecard,
    SgdHyper,
    SparseMatrix,
    Tail,
    TrainConfig,
    TrainReport,
    ValueRange,
    WilcoxonResult,
    build_graph,
    clamp_activation,
    classify_confidence,
    high_confidence_set,
    hoi_order,
    init_model,
    load_matrix,
    load_model,
    load_ratings,
    objective,
    save_matrix,
    save_model,
    score,
    sgd_step,
    split,
    train_blf,
    train_glfa,
    value_range,
    wilcoxon_signed_rank,
)

__all__ = [
    "Confidence",
    "DivergenceError",
    "Entry",
    "EntryKind",
    "FactorModel",
    "GlfaParseError",
    "HoiRecord",
    "HoiStats",
    "IdMap",
    "InteractionGraph",
    "PseudoEntry",
    "RoundReport",
    "Scorecard",
    "SgdHyper",
    "SparseMatrix",
    "Tail",
    "TrainConfig",
    "TrainReport",
    "ValueRange",
    "WilcoxonResult",
    "build_graph",
    "clamp_activation",
    "classify_confidence",
    "high_confidence_set",
    "hoi_order",
    "init_model",
    "load_matrix",
    "load_model",
    "load_ratings",
    "objective",
    "save_matrix",
    "save_model",
    "score",
    "sgd_step",
    "split",
    "train_blf",
    "train_glfa",
    "value_range",
    "wilcoxon_signed_rank",
]
