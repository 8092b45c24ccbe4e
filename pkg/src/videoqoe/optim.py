"""First-order optimizers: plain SGD and Adagrad.

Both update rules are pure functions over (parameters, gradients, state);
the Optimizer wrapper holds state and applies updates to a parameter list
in place, in a fixed order.  A learning rate of exactly 0 is allowed and
freezes the parameters; it is used to snapshot untrained coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError

ADAGRAD_EPSILON = 1e-8

_KINDS = ("sgd", "adagrad")


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = "sgd"
    learning_rate: float = 1e-2
    epsilon: float = ADAGRAD_EPSILON

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown optimizer kind {self.kind!r}; expected one of {_KINDS}")
        if not (self.learning_rate >= 0.0):
            raise ConfigError(f"learning rate must be >= 0, got {self.learning_rate}")
        if not (self.epsilon > 0.0):
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")


def sgd_step(params: np.ndarray, grads: np.ndarray, learning_rate: float) -> np.ndarray:
    """theta' = theta - lr * g."""
    params = np.asarray(params)
    grads = np.asarray(grads)
    if params.shape != grads.shape:
        raise DimensionError(
            f"gradient shape {grads.shape} does not match parameter shape {params.shape}"
        )
    return params - learning_rate * grads


def adagrad_step(
    params: np.ndarray,
    grads: np.ndarray,
    accumulator: np.ndarray,
    learning_rate: float,
    epsilon: float = ADAGRAD_EPSILON,
) -> tuple[np.ndarray, np.ndarray]:
    """Accumulate squared gradients, then scale the step per coordinate.

    G' = G + g*g;  theta' = theta - lr * g / (sqrt(G') + eps).
    Returns (new_params, new_accumulator).
    """
    params = np.asarray(params)
    grads = np.asarray(grads)
    accumulator = np.asarray(accumulator)
    if params.shape != grads.shape or params.shape != accumulator.shape:
        raise DimensionError(
            f"parameter {params.shape}, gradient {grads.shape} and accumulator "
            f"{accumulator.shape} shapes must all match"
        )
    new_acc = accumulator + grads * grads
    new_params = params - learning_rate * grads / (np.sqrt(new_acc) + epsilon)
    return new_params, new_acc


@dataclass
class Optimizer:
    """Stateful wrapper applying one of the update rules to a parameter list."""

    config: OptimizerConfig
    _accumulators: list[np.ndarray] | None = field(default=None, repr=False)

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        """Update every parameter array in place, in list order."""
        if len(params) != len(grads):
            raise DimensionError(
                f"{len(params)} parameter arrays but {len(grads)} gradient arrays"
            )
        if self.config.kind == "adagrad":
            if self._accumulators is None:
                self._accumulators = [np.zeros_like(p) for p in params]
            if len(self._accumulators) != len(params):
                raise DimensionError("optimizer state does not match the parameter list")
            for i, (p, g) in enumerate(zip(params, grads)):
                new_p, new_acc = adagrad_step(
                    p, g, self._accumulators[i], self.config.learning_rate, self.config.epsilon
                )
                p[...] = new_p
                self._accumulators[i] = new_acc
        else:
            for p, g in zip(params, grads):
                p[...] = sgd_step(p, g, self.config.learning_rate)
