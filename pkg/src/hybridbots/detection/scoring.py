"""Class scores, linear aggregation and calibration.

Each raw sub-feature is compared with a human reference population through a
robust z-score (median and scaled MAD) and squashed to [0, 1] with
``tanh(z / squash)``. A class score is the mean of its defined sub-scores.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import combinations
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .features import (
    CLASSES,
    SUBFEATURE_NAMES,
    SUBFEATURES,
    AccountHistory,
    raw_feature_matrix,
)

WEIGHTS_SCHEMA = "hybridbots-weights"
WEIGHTS_VERSION = 1

# Lower bounds for the robust scale, so a population with zero spread in a
# feature does not turn tiny differences into huge deviations.
MIN_SCALE = {
    "polarity_variance": 0.005,
    "emoticon_rate": 0.05,
    "mean_length": 5.0,
    "mean_token_entropy": 0.1,
    "slang_fraction": 0.01,
    "friend_ratio_dispersion": 0.1,
    "friend_ratio_mean": 0.1,
    "degree_ratio": 0.1,
    "retweet_concentration": 0.02,
    "circadian_entropy": 0.1,
    "interval_cv": 0.1,
    "night_fraction": 0.02,
    "youth": 1.0,
    "incompleteness": 1.0,
    "activity_trend": 0.05,
}
MAD_TO_SD = 1.4826

_CLASS_INDEX = np.array([CLASSES.index(cls) for _, cls, _ in SUBFEATURES])
_DIRECTION = [d for _, _, d in SUBFEATURES]


class BadWeights(ValueError):
    pass


class SingleClassInput(ValueError):
    pass


class DegenerateCalibrationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class FeatureVector:
    sentiment: float
    content: float
    language: float
    friendship: float
    network: float
    temporal: float
    user: float

    def __post_init__(self):
        for name in CLASSES:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"class score {name}={v} outside [0, 1]")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in CLASSES])

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "FeatureVector":
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class DetectionScore:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"score {self.value} outside [0, 1]")


def _as_raw(X) -> np.ndarray:
    if len(X) and isinstance(X[0], AccountHistory):
        return raw_feature_matrix(X)
    return check_array(X, ensure_all_finite="allow-nan", ensure_min_samples=0)


class ClassScoreTransformer(TransformerMixin, BaseEstimator):
    """Raw sub-features (or histories) to the seven class scores.

    ``fit`` learns the human reference: per-feature median and scaled MAD.
    """

    def __init__(self, squash: float = 2.0):
        self.squash = squash

    def fit(self, X, y=None):
        raw = _as_raw(X)
        if raw.shape[0] == 0:
            raise ValueError("cannot fit a reference on zero accounts")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            center = np.nanmedian(raw, axis=0)
            mad = np.nanmedian(np.abs(raw - center), axis=0)
        floors = np.array([MIN_SCALE[n] for n in SUBFEATURE_NAMES])
        # features no reference account defines fall back to a neutral reference
        center = np.where(np.isnan(center), 0.0, center)
        mad = np.where(np.isnan(mad), 0.0, mad)
        self.center_ = center
        self.scale_ = np.maximum(MAD_TO_SD * mad, floors)
        self.n_features_in_ = raw.shape[1]
        return self

    def subscores(self, X) -> np.ndarray:
        check_is_fitted(self, ("center_", "scale_"))
        raw = _as_raw(X)
        z = (raw - self.center_) / self.scale_
        out = np.empty_like(raw)
        for j, direction in enumerate(_DIRECTION):
            if direction is None:
                out[:, j] = np.clip(raw[:, j], 0.0, 1.0)
                continue
            if direction > 0:
                dev = np.maximum(z[:, j], 0.0)
            elif direction < 0:
                dev = np.maximum(-z[:, j], 0.0)
            else:
                dev = np.abs(z[:, j])
            out[:, j] = np.tanh(dev / self.squash)
        out[np.isnan(raw)] = np.nan
        return out

    def transform(self, X) -> np.ndarray:
        sub = self.subscores(X)
        scores = np.full((sub.shape[0], len(CLASSES)), 0.5)
        for c in range(len(CLASSES)):
            block = sub[:, _CLASS_INDEX == c]
            defined = ~np.isnan(block)
            n = defined.sum(axis=1)
            total = np.where(defined, block, 0.0).sum(axis=1)
            scores[:, c] = np.where(n > 0, total / np.maximum(n, 1), 0.5)
        return np.clip(scores, 0.0, 1.0)

    # -- persistence ---------------------------------------------------------

    def reference_dict(self) -> dict:
        check_is_fitted(self, ("center_", "scale_"))
        return {
            "squash": self.squash,
            "center": {n: float(v) for n, v in zip(SUBFEATURE_NAMES, self.center_)},
            "scale": {n: float(v) for n, v in zip(SUBFEATURE_NAMES, self.scale_)},
        }

    @classmethod
    def from_reference(cls, ref: dict) -> "ClassScoreTransformer":
        est = cls(squash=float(ref.get("squash", 2.0)))
        try:
            est.center_ = np.array([float(ref["center"][n]) for n in SUBFEATURE_NAMES])
            est.scale_ = np.array([float(ref["scale"][n]) for n in SUBFEATURE_NAMES])
        except (KeyError, TypeError) as err:
            raise ValueError(f"reference lacks sub-feature {err}") from None
        est.n_features_in_ = len(SUBFEATURE_NAMES)
        return est


@lru_cache(maxsize=1)
def _packaged_reference() -> dict:
    text = resources.files("hybridbots.data").joinpath("reference.json").read_text(encoding="utf-8")
    return json.loads(text)


def default_transformer() -> ClassScoreTransformer:
    """Transformer fitted on the packaged human-only reference run."""
    return ClassScoreTransformer.from_reference(_packaged_reference())


def class_scores(history: AccountHistory, transformer: ClassScoreTransformer | None = None) -> FeatureVector:
    est = transformer if transformer is not None else default_transformer()
    return FeatureVector.from_array(est.transform([history])[0])


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(CLASSES),):
        raise BadWeights(f"expected {len(CLASSES)} weights, got shape {w.shape}")
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise BadWeights("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise BadWeights(f"weights must sum to 1, got {w.sum()}")
    return w


def aggregate_score(vector: FeatureVector | Sequence[float], weights: Sequence[float]) -> DetectionScore:
    w = _check_weights(weights)
    v = vector.as_array() if isinstance(vector, FeatureVector) else np.asarray(vector, dtype=float)
    return DetectionScore(float(np.clip(v @ w, 0.0, 1.0)))


@lru_cache(maxsize=4)
def simplex_grid(dim: int = len(CLASSES), step: float = 0.05) -> np.ndarray:
    """All weight vectors on the simplex whose entries are multiples of ``step``."""
    units = round(1.0 / step)
    if abs(units * step - 1.0) > 1e-9:
        raise ValueError("step must divide 1")
    # stars and bars: choose dim-1 bar positions among units+dim-1 slots
    bars = np.array(list(combinations(range(units + dim - 1), dim - 1)), dtype=np.int64)
    edges = np.hstack([np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), units + dim - 1)])
    counts = np.diff(edges, axis=1) - 1
    return counts / units


class BotScoreClassifier(ClassifierMixin, BaseEstimator):
    """Linear score over class scores with a midpoint threshold.

    ``fit`` searches the weight simplex for the best balanced accuracy; ties
    go to the larger Fisher separation, then to the earlier grid point.
    """

    def __init__(self, step: float = 0.05, min_balanced_accuracy: float = 0.6, chunk: int = 16384):
        self.step = step
        self.min_balanced_accuracy = min_balanced_accuracy
        self.chunk = chunk

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        y = np.asarray(y).astype(int)
        self.classes_ = np.array([0, 1])
        if set(np.unique(y)) != {0, 1}:
            raise SingleClassInput("calibration needs both bot (1) and human (0) examples")
        bots, humans = X[y == 1], X[y == 0]
        grid = simplex_grid(X.shape[1], self.step)
        best = (-1.0, -np.inf, -1)
        for lo in range(0, len(grid), self.chunk):
            W = grid[lo : lo + self.chunk]
            sb, sh = bots @ W.T, humans @ W.T
            tau = (np.median(sb, axis=0) + np.median(sh, axis=0)) / 2
            tpr = (sb > tau).mean(axis=0)
            tnr = (sh <= tau).mean(axis=0)
            bal = (tpr + tnr) / 2
            spread = np.sqrt(sb.var(axis=0) + sh.var(axis=0))
            fisher = (sb.mean(axis=0) - sh.mean(axis=0)) / np.maximum(spread, 1e-12)
            order = np.lexsort((np.arange(len(W)), -fisher, -bal))
            k = int(order[0])
            cand = (float(bal[k]), float(fisher[k]), lo + k)
            if cand[0] > best[0] or (cand[0] == best[0] and cand[1] > best[1]):
                best = cand
        self.balanced_accuracy_, self.fisher_, idx = best
        self.weights_ = grid[idx].copy()
        sb, sh = bots @ self.weights_, humans @ self.weights_
        self.threshold_ = float((np.median(sb) + np.median(sh)) / 2)
        self.n_features_in_ = X.shape[1]
        if self.balanced_accuracy_ < self.min_balanced_accuracy:
            warnings.warn(
                f"best balanced accuracy {self.balanced_accuracy_:.3f} is below "
                f"{self.min_balanced_accuracy}; classes are hardly separable",
                DegenerateCalibrationWarning,
                stacklevel=2,
            )
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, ("weights_", "threshold_"))
        X = check_array(X)
        return np.clip(X @ self.weights_, 0.0, 1.0)

    def predict_proba(self, X) -> np.ndarray:
        s = self.decision_function(X)
        return np.column_stack([1.0 - s, s])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > self.threshold_).astype(int)


@dataclass
class Calibration:
    transformer: ClassScoreTransformer
    classifier: BotScoreClassifier

    @property
    def weights(self) -> np.ndarray:
        return self.classifier.weights_

    @property
    def threshold(self) -> float:
        return self.classifier.threshold_

    @property
    def balanced_accuracy(self) -> float:
        return self.classifier.balanced_accuracy_

    def class_scores(self, histories: Sequence[AccountHistory]) -> np.ndarray:
        return self.transformer.transform(histories)

    def score(self, histories: Sequence[AccountHistory]) -> np.ndarray:
        return self.classifier.decision_function(self.class_scores(histories))

    def to_dict(self) -> dict:
        return {
            "schema": WEIGHTS_SCHEMA,
            "version": WEIGHTS_VERSION,
            "weights": {c: float(w) for c, w in zip(CLASSES, self.weights)},
            "threshold": self.threshold,
            "balanced_accuracy": self.balanced_accuracy,
            "reference": self.transformer.reference_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        if d.get("schema") != WEIGHTS_SCHEMA or d.get("version") != WEIGHTS_VERSION:
            raise ValueError(f"not a {WEIGHTS_SCHEMA} v{WEIGHTS_VERSION} document")
        try:
            weights = _check_weights([d["weights"][c] for c in CLASSES])
            threshold = float(d["threshold"])
        except KeyError as err:
            raise ValueError(f"weights document lacks {err}") from None
        clf = BotScoreClassifier()
        clf.classes_ = np.array([0, 1])
        clf.weights_ = weights
        clf.threshold_ = threshold
        clf.balanced_accuracy_ = float(d.get("balanced_accuracy", float("nan")))
        clf.n_features_in_ = len(CLASSES)
        return cls(ClassScoreTransformer.from_reference(d["reference"]), clf)


def _is_bot(label) -> int:
    if isinstance(label, str):
        if label == "naive_bot":
            return 1
        if label == "human":
            return 0
        raise ValueError(f"calibration labels are 'naive_bot' or 'human', got {label!r}")
    return int(bool(label))


def calibrate(
    labeled_histories: Sequence[tuple[AccountHistory, object]],
    transformer: ClassScoreTransformer | None = None,
    step: float = 0.05,
) -> Calibration:
    """Fit weights and threshold separating naive bots from humans.

    Without a ``transformer`` the human reference is fitted on the human
    examples of the labeled set.
    """
    histories = [h for h, _ in labeled_histories]
    y = np.array([_is_bot(label) for _, label in labeled_histories], dtype=int)
    if len(set(y.tolist())) < 2:
        raise SingleClassInput("calibration needs both naive_bot and human examples")
    raw = raw_feature_matrix(histories)
    if transformer is None:
        transformer = ClassScoreTransformer().fit(raw[y == 0])
    scores = transformer.transform(raw)
    clf = BotScoreClassifier(step=step).fit(scores, y)
    return Calibration(transformer, clf)
