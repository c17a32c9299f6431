"""Feature-class bot scoring in the style of public bot-detection services."""

from .features import (
    CLASSES,
    AccountHistory,
    EmptyHistory,
    EmptyInput,
    HistoryBuilder,
    circadian_entropy,
    raw_feature_matrix,
    raw_features,
)
from .scoring import (
    BadWeights,
    BotScoreClassifier,
    Calibration,
    ClassScoreTransformer,
    DegenerateCalibrationWarning,
    DetectionScore,
    FeatureVector,
    SingleClassInput,
    aggregate_score,
    calibrate,
    class_scores,
    default_transformer,
    simplex_grid,
)

__all__ = [
    "CLASSES",
    "AccountHistory",
    "BadWeights",
    "BotScoreClassifier",
    "Calibration",
    "ClassScoreTransformer",
    "DegenerateCalibrationWarning",
    "DetectionScore",
    "EmptyHistory",
    "EmptyInput",
    "FeatureVector",
    "HistoryBuilder",
    "SingleClassInput",
    "aggregate_score",
    "calibrate",
    "circadian_entropy",
    "class_scores",
    "default_transformer",
    "raw_feature_matrix",
    "raw_features",
    "simplex_grid",
]
