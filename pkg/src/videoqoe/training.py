"""Minibatch training loop with per-epoch accuracy and loss curves.

The loop is deliberately plain: seeded shuffle each epoch, gradients
averaged over the minibatch, one optimizer step per batch, curves computed
on the full training and validation splits after every epoch.  All
randomness comes from (seed, epoch), so two runs with identical inputs and
seed produce identical weights and curves.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DivergenceError, LabelError, NumericError
from .layers import cross_entropy
from .network import Network
from .optim import Optimizer, OptimizerConfig
from .seeding import KEY_SHUFFLE, generator

DEFAULT_BATCH_SIZE = 32

CURVE_COLUMNS = ("epoch", "train_acc", "val_acc", "train_loss", "val_loss")


@dataclass
class EpochCurves:
    """Per-epoch mean cross-entropy and accuracy on both splits."""

    train_acc: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)

    def rows(self):
        for i in range(len(self.train_acc)):
            yield (
                i + 1,
                self.train_acc[i],
                self.val_acc[i],
                self.train_loss[i],
                self.val_loss[i],
            )

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="ascii", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CURVE_COLUMNS)
            for row in self.rows():
                writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])


def read_curves_csv(path) -> EpochCurves:
    curves = EpochCurves()
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CURVE_COLUMNS:
            raise ConfigError(f"{path}: unexpected curve columns {header}")
        for row in reader:
            curves.train_acc.append(float(row[1]))
            curves.val_acc.append(float(row[2]))
            curves.train_loss.append(float(row[3]))
            curves.val_loss.append(float(row[4]))
    return curves


def _check_split(X: np.ndarray, y: np.ndarray, what: str, input_shape) -> None:
    if X.ndim != 5 or X.shape[1:] != input_shape:
        raise ConfigError(
            f"{what} inputs must be [n, {', '.join(map(str, input_shape))}], got {X.shape}"
        )
    if y.shape != (X.shape[0],):
        raise ConfigError(f"{what} labels shape {y.shape} does not match {X.shape[0]} inputs")
    if X.shape[0] < 1:
        raise ConfigError(f"{what} split must hold at least one sample")


def predict_probabilities(net: Network, X: np.ndarray) -> np.ndarray:
    """Softmax outputs for a stack of inputs, [n, num_classes]."""
    out = np.zeros((X.shape[0], net.num_classes))
    for i in range(X.shape[0]):
        probs, _ = net.forward(X[i])
        out[i] = probs
    return out


def split_metrics(net: Network, X: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """(mean cross-entropy, accuracy) of the network on one split."""
    total_loss = 0.0
    correct = 0
    for i in range(X.shape[0]):
        probs, _ = net.forward(X[i])
        loss, _ = cross_entropy(probs, int(y[i]))
        total_loss += loss
        if int(np.argmax(probs)) == int(y[i]):
            correct += 1
    n = X.shape[0]
    return total_loss / n, correct / n


def train_network(
    net: Network,
    X: np.ndarray,
    y: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    optimizer: OptimizerConfig,
    epochs: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    seed: int = 0,
) -> EpochCurves:
    """Train in place and return the epoch curves.

    Raises DivergenceError naming the epoch if any loss turns non-finite.
    """
    if epochs < 1:
        raise ConfigError(f"epochs must be >= 1, got {epochs}")
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    _check_split(X, y, "training", net.input_shape)
    _check_split(X_val, y_val, "validation", net.input_shape)
    n_classes = net.num_classes
    for what, labels in (("training", y), ("validation", y_val)):
        bad = [int(v) for v in labels if not 0 <= int(v) < n_classes]
        if bad:
            raise LabelError(f"{what} labels {sorted(set(bad))} outside [0, {n_classes})")

    opt = Optimizer(optimizer)
    curves = EpochCurves()
    n = X.shape[0]
    params = net.parameters()
    for epoch in range(1, epochs + 1):
        order = generator(seed, KEY_SHUFFLE, epoch).permutation(n)
        # overflow is detected via the finiteness checks below, not warnings
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for start in range(0, n, batch_size):
                    batch = order[start : start + batch_size]
                    grad_sum: list[np.ndarray] | None = None
                    for idx in batch:
                        probs, tape = net.forward(X[idx])
                        loss, grad_logits = cross_entropy(probs, int(y[idx]))
                        if not math.isfinite(loss):
                            raise DivergenceError(f"non-finite loss in epoch {epoch}")
                        grads = net.backward(tape, grad_logits)
                        if grad_sum is None:
                            grad_sum = grads
                        else:
                            for acc, g in zip(grad_sum, grads):
                                acc += g
                    scale = 1.0 / len(batch)
                    opt.step(params, [g * scale for g in grad_sum])
                train_loss, train_acc = split_metrics(net, X, y)
                val_loss, val_acc = split_metrics(net, X_val, y_val)
        except DivergenceError:
            raise
        except NumericError as exc:
            # overflow inside forward/backward, not just in the loss value
            raise DivergenceError(f"non-finite values in epoch {epoch}: {exc}") from exc
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise DivergenceError(f"non-finite loss in epoch {epoch}")
        curves.train_loss.append(train_loss)
        curves.train_acc.append(train_acc)
        curves.val_loss.append(val_loss)
        curves.val_acc.append(val_acc)
    return curves
