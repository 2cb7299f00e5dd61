"""Streaming anomaly detection with LSH isolation forests.

An ensemble of tries built by recursive p-stable hashing scores each
arriving multidimensional point; a fixed-size window of the latest points
rebuilds the model whenever it fills, tracking concept drift.
"""

from .backend import available_backends, default_backend
from .data import (
    CsvParseError,
    Dataset,
    ScalerParams,
    SynthSpec,
    apply_scaler,
    load_csv,
    robust_scale,
    select_subset,
    synth_stream,
    write_csv,
)
from .engine import (
    EngineConfig,
    InsufficientDataError,
    PointRejectedError,
    StreamEngine,
    bootstrap,
    run_stream,
)
from .experiment import ExperimentSpec, run_experiment, write_scores_csv
from .forest import (
    Forest,
    LSHiTree,
    TreeNode,
    build_forest,
    build_tree,
    height_limit,
    sample_window,
)
from .lsh import HashFamily, L2HashFunction, hash_point, lsh_split, make_family
from .metrics import (
    F1Result,
    LabeledScore,
    MetricsReport,
    RunAggregate,
    UndefinedMetricError,
    aggregate_runs,
    auc,
    build_report,
    f1,
)
from .scoring import (
    EULER_GAMMA,
    DegenerateForestError,
    ScoreParams,
    ScoreRecord,
    anomaly_score,
    classify,
    mu,
    path_length,
)

__version__ = "0.1.0"

__all__ = [
    "available_backends",
    "default_backend",
    "CsvParseError",
    "Dataset",
    "ScalerParams",
    "SynthSpec",
    "apply_scaler",
    "load_csv",
    "robust_scale",
    "select_subset",
    "synth_stream",
    "write_csv",
    "EngineConfig",
    "InsufficientDataError",
    "PointRejectedError",
    "StreamEngine",
    "bootstrap",
    "run_stream",
    "ExperimentSpec",
    "run_experiment",
    "write_scores_csv",
    "Forest",
    "LSHiTree",
    "TreeNode",
    "build_forest",
    "build_tree",
    "height_limit",
    "sample_window",
    "HashFamily",
    "L2HashFunction",
    "hash_point",
    "lsh_split",
    "make_family",
    "F1Result",
    "LabeledScore",
    "MetricsReport",
    "RunAggregate",
    "UndefinedMetricError",
    "aggregate_runs",
    "auc",
    "build_report",
    "f1",
    "EULER_GAMMA",
    "DegenerateForestError",
    "ScoreParams",
    "ScoreRecord",
    "anomaly_score",
    "classify",
    "mu",
    "path_length",
]
