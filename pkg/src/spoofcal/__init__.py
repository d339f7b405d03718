"""Calibrated spoof/bonafide classification on utterance-level embeddings."""

from .classifier import (
    LinearModel,
    MlpModel,
    ModelMeta,
    Standardizer,
    TrainConfig,
    ensemble_predict,
    load_model,
    predict_proba,
    save_model,
    train_logistic,
    train_mlp,
)
from .errors import DataError, FormatError, NumericError
from .metrics import (
    BinStat,
    MetricsReport,
    ScoredSet,
    accuracy,
    compute_report,
    ece,
    eer,
)
from .selective import (
    CurvePoint,
    Prediction,
    RejectionCurve,
    evaluate_all,
    make_predictions,
    rejection_curve,
    unit_entropy,
    unit_entropy_array,
)
from .store import (
    DatasetManifest,
    EmbeddingDataset,
    ManifestEntry,
    load_dataset,
    load_manifest,
    merge,
    read_embeddings,
    read_matrix,
    subsample,
    write_embeddings,
    write_manifest,
    write_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "BinStat",
    "CurvePoint",
    "DataError",
    "DatasetManifest",
    "EmbeddingDataset",
    "FormatError",
    "LinearModel",
    "ManifestEntry",
    "MetricsReport",
    "MlpModel",
    "ModelMeta",
    "NumericError",
    "Prediction",
    "RejectionCurve",
    "ScoredSet",
    "Standardizer",
    "TrainConfig",
    "accuracy",
    "compute_report",
    "ece",
    "eer",
    "ensemble_predict",
    "evaluate_all",
    "load_dataset",
    "load_manifest",
    "load_model",
    "make_predictions",
    "merge",
    "predict_proba",
    "read_embeddings",
    "read_matrix",
    "rejection_curve",
    "save_model",
    "subsample",
    "train_logistic",
    "train_mlp",
    "unit_entropy",
    "unit_entropy_array",
    "write_embeddings",
    "write_manifest",
    "write_matrix",
]
