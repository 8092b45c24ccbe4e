"""Scikit-learn style estimators wrapping the CNN engine.

PatchCnnClassifier learns quality classes from k*k*k luminance cubes;
SequenceFeatureClassifier learns them from flat coefficient-trajectory
feature vectors via the 1D network.  Both follow the usual conventions:
constructor arguments are stored verbatim, fitted state lives in
trailing-underscore attributes, fit returns self.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .aggregate import DEFAULT_FEATURE_CAP, pool_feature_vector
from .errors import ConfigError, LabelError
from .network import ModelConfig, build_aggregator, build_model
from .optim import ADAGRAD_EPSILON, OptimizerConfig
from .seeding import KEY_SPLIT, generator
from .training import (
    DEFAULT_BATCH_SIZE,
    predict_probabilities,
    train_network,
)
from .validation import check_cube_array, check_feature_matrix, check_labels


class _CnnClassifierBase(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses prepare inputs and build nets."""

    def _optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            kind=self.optimizer,
            learning_rate=self.learning_rate,
            epsilon=self.adagrad_epsilon,
        )

    def _model_config(self, n_classes: int) -> ModelConfig:
        return ModelConfig(
            num_conv_layers=self.num_conv_layers,
            first_layer_filters=self.first_layer_filters,
            fc_sizes=tuple(self.fc_sizes),
            num_classes=n_classes,
        )

    def _encode_labels(self, y):
        y = check_labels(y, len(y))
        if self.n_classes is not None:
            if int(self.n_classes) < 2:
                raise ConfigError(f"n_classes must be >= 2, got {self.n_classes}")
            n = int(self.n_classes)
            if y.max() >= n:
                raise LabelError(f"label {y.max()} outside the declared {n} classes")
            self.classes_ = np.arange(n, dtype=np.int64)
            return y
        self.classes_ = np.unique(y)
        if self.classes_.shape[0] < 2:
            raise LabelError("need at least two distinct classes to fit")
        lookup = {int(c): i for i, c in enumerate(self.classes_)}
        return np.array([lookup[int(v)] for v in y], dtype=np.int64)

    def _split_validation(self, X, y, validation_data):
        if validation_data is not None:
            Xv, yv = validation_data
            Xv = self._prepare(Xv, fitted=True)
            yv = check_labels(yv, len(yv))
            if self.n_classes is None:
                lookup = {int(c): i for i, c in enumerate(self.classes_)}
                missing = sorted({int(v) for v in yv} - set(lookup))
                if missing:
                    raise LabelError(f"validation labels {missing} unseen in training")
                yv = np.array([lookup[int(v)] for v in yv], dtype=np.int64)
            elif yv.max() >= len(self.classes_):
                raise LabelError(
                    f"validation label {yv.max()} outside the declared "
                    f"{len(self.classes_)} classes"
                )
            return X, y, Xv, yv
        frac = float(self.validation_fraction)
        if not (0 < frac < 1):
            raise ConfigError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        n = X.shape[0]
        n_val = max(1, int(round(n * frac)))
        if n_val >= n:
            raise ConfigError(
                f"validation_fraction {frac} leaves no training data for {n} samples"
            )
        order = generator(self.seed, KEY_SPLIT).permutation(n)
        val_idx = np.sort(order[:n_val])
        train_idx = np.sort(order[n_val:])
        return X[train_idx], y[train_idx], X[val_idx], y[val_idx]

    def fit(self, X, y, validation_data=None):
        """Train on (X, y); optionally validate on explicit held-out data.

        Without ``validation_data`` a random ``validation_fraction`` of the
        samples is held out (seeded, reproducible).
        """
        X = self._prepare(X, fitted=False)
        y = self._encode_labels(y)
        if y.shape[0] != X.shape[0]:
            raise LabelError(f"{X.shape[0]} samples but {y.shape[0]} labels")
        Xt, yt, Xv, yv = self._split_validation(X, y, validation_data)
        self.network_ = self._build_network(len(self.classes_))
        self.n_params_ = self.network_.num_params
        self.history_ = train_network(
            self.network_,
            self._lift(Xt),
            yt,
            self._lift(Xv),
            yv,
            optimizer=self._optimizer_config(),
            epochs=int(self.epochs),
            batch_size=int(self.batch_size),
            seed=int(self.seed),
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFittedError(
                f"this {type(self).__name__} instance is not fitted yet; call fit first"
            )

    def predict_proba(self, X):
        """Class probabilities, columns aligned with ``classes_``."""
        self._check_fitted()
        X = self._prepare(X, fitted=True)
        return predict_probabilities(self.network_, self._lift(X))

    def predict(self, X):
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)]


class PatchCnnClassifier(_CnnClassifierBase):
    """Quality-class classifier over k*k*k luminance patch cubes.

    Parameters mirror the training setup: architecture (conv stacks with
    doubling filter counts, two hidden dense layers), optimizer (sgd or
    adagrad), epochs, batch size, and the seed controlling initialization,
    shuffling and the fallback validation split.  ``input_scale`` maps
    8-bit luminance onto a range the initialization expects.
    """

    def __init__(
        self,
        num_conv_layers=2,
        first_layer_filters=16,
        fc_sizes=(1024, 512),
        n_classes=None,
        optimizer="adagrad",
        learning_rate=1e-2,
        adagrad_epsilon=ADAGRAD_EPSILON,
        epochs=50,
        batch_size=DEFAULT_BATCH_SIZE,
        validation_fraction=0.2,
        input_scale=1.0 / 255.0,
        seed=0,
    ):
        self.num_conv_layers = num_conv_layers
        self.first_layer_filters = first_layer_filters
        self.fc_sizes = fc_sizes
        self.n_classes = n_classes
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.adagrad_epsilon = adagrad_epsilon
        self.epochs = epochs
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.input_scale = input_scale
        self.seed = seed

    def _prepare(self, X, fitted: bool):
        k = self.patch_k_ if fitted and hasattr(self, "patch_k_") else None
        X = check_cube_array(X, k=k)
        if not fitted:
            self.patch_k_ = X.shape[1]
        return X * float(self.input_scale)

    def _lift(self, X):
        return X[:, None]

    def _build_network(self, n_classes: int):
        return build_model(self._model_config(n_classes), self.patch_k_, seed=int(self.seed))


class SequenceFeatureClassifier(_CnnClassifierBase):
    """Sequence-level classifier over coefficient-trajectory feature vectors.

    Long vectors are average-pooled to ``feature_cap`` values before the
    1D network sees them; all fitted and predicted vectors must share one
    raw length.
    """

    def __init__(
        self,
        num_conv_layers=3,
        first_layer_filters=64,
        fc_sizes=(1024, 512),
        n_classes=None,
        optimizer="sgd",
        learning_rate=1e-2,
        adagrad_epsilon=ADAGRAD_EPSILON,
        epochs=50,
        batch_size=4,
        validation_fraction=0.25,
        feature_cap=DEFAULT_FEATURE_CAP,
        seed=0,
    ):
        self.num_conv_layers = num_conv_layers
        self.first_layer_filters = first_layer_filters
        self.fc_sizes = fc_sizes
        self.n_classes = n_classes
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.adagrad_epsilon = adagrad_epsilon
        self.epochs = epochs
        self.batch_size = batch_size
        self.validation_fraction = validation_fraction
        self.feature_cap = feature_cap
        self.seed = seed

    def _prepare(self, X, fitted: bool):
        length = self.raw_length_ if fitted and hasattr(self, "raw_length_") else None
        X = check_feature_matrix(X, length=length)
        if not fitted:
            self.raw_length_ = X.shape[1]
        pooled = [pool_feature_vector(row, cap=int(self.feature_cap)) for row in X]
        X = np.stack(pooled)
        if not fitted:
            self.input_length_ = X.shape[1]
        return X

    def _lift(self, X):
        return X[:, None, :, None, None]

    def _build_network(self, n_classes: int):
        return build_aggregator(
            self._model_config(n_classes), self.input_length_, seed=int(self.seed)
        )
