"""CNN assembly: configuration, initialization, forward and backward passes.

The architecture is a fixed family: ``num_conv_layers`` convolution stacks
(3x3x3 kernels, same padding, filter count doubling per layer), each
followed by ReLU and non-overlapping max pooling, then two hidden fully
connected layers, a linear class head, and softmax.  Pooling halves the
spatial axes after every stack but leaves the temporal axis alone after
the first, matching the 16 -> 8 -> 4 spatial and 16 -> 16 -> 8 temporal
reduction of a 16-cube input under two stacks.

The same machinery drives the 1D aggregation network: kernels degenerate
to [f, c, 3, 1, 1] and pooling to (2, 1, 1), so a flat feature vector is
just a [1, L, 1, 1] volume.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .layers import (
    ConvLayer,
    DenseLayer,
    PoolSpec,
    conv3d_backward,
    conv3d_forward,
    dense_backward,
    dense_forward,
    maxpool3d_backward,
    maxpool3d_forward,
    relu_backward,
    relu_forward,
    softmax,
)
from .seeding import KEY_INIT, generator

KERNEL_EDGE = 3


@dataclass(frozen=True)
class ModelConfig:
    """Architecture knobs shared by the 3D patch model and the 1D aggregator."""

    num_conv_layers: int = 2
    first_layer_filters: int = 16
    fc_sizes: tuple[int, int] = (1024, 512)
    num_classes: int = 3

    def __post_init__(self):
        if self.num_conv_layers not in (2, 3):
            raise ConfigError(
                f"num_conv_layers must be 2 or 3, got {self.num_conv_layers}"
            )
        if self.first_layer_filters < 1:
            raise ConfigError(
                f"first_layer_filters must be >= 1, got {self.first_layer_filters}"
            )
        if len(self.fc_sizes) != 2 or any(int(s) < 1 for s in self.fc_sizes):
            raise ConfigError(
                f"fc_sizes must be two positive integers, got {self.fc_sizes}"
            )
        if self.num_classes < 2:
            raise ConfigError(f"num_classes must be >= 2, got {self.num_classes}")

    @property
    def filter_counts(self) -> tuple[int, ...]:
        return tuple(self.first_layer_filters * (2**i) for i in range(self.num_conv_layers))


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


@dataclass(eq=False)
class Network:
    """A concrete layer stack with exact backpropagation."""

    conv_layers: list[ConvLayer]
    pool_specs: list[PoolSpec]
    dense_layers: list[DenseLayer]
    input_shape: tuple[int, int, int, int]

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in fixed order: conv kernels/biases, then dense."""
        out: list[np.ndarray] = []
        for layer in self.conv_layers:
            out.append(layer.kernels)
            out.append(layer.biases)
        for layer in self.dense_layers:
            out.append(layer.weights)
            out.append(layer.biases)
        return out

    def parameter_names(self) -> list[str]:
        names: list[str] = []
        for i in range(len(self.conv_layers)):
            names.append(f"conv{i + 1}.kernels")
            names.append(f"conv{i + 1}.biases")
        for i in range(len(self.dense_layers)):
            names.append(f"dense{i + 1}.weights")
            names.append(f"dense{i + 1}.biases")
        return names

    @property
    def num_params(self) -> int:
        return sum(p.size for p in self.parameters())

    @property
    def num_classes(self) -> int:
        return self.dense_layers[-1].weights.shape[0]

    def coefficients(self) -> np.ndarray:
        """All trainable values flattened row-major in parameter order."""
        return np.concatenate([p.reshape(-1) for p in self.parameters()])

    def set_coefficients(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat)
        if flat.shape != (self.num_params,):
            raise DimensionError(
                f"coefficient vector has {flat.size} values, network needs {self.num_params}"
            )
        offset = 0
        for p in self.parameters():
            p[...] = flat[offset : offset + p.size].reshape(p.shape)
            offset += p.size

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        """Class probabilities for one input volume, plus the backward tape."""
        if x.shape != self.input_shape:
            raise DimensionError(
                f"input shape {x.shape} does not match network input {self.input_shape}"
            )
        tape: list = []
        h = x
        for conv, pool in zip(self.conv_layers, self.pool_specs):
            z = conv3d_forward(h, conv)
            a = relu_forward(z)
            p, argmax = maxpool3d_forward(a, pool)
            tape.append(("stack", h, z, a.shape, argmax))
            h = p
        flat = h.reshape(-1)
        tape.append(("flatten", h.shape))
        n_dense = len(self.dense_layers)
        v = flat
        for i, layer in enumerate(self.dense_layers):
            z = dense_forward(v, layer)
            if i < n_dense - 1:
                tape.append(("dense_relu", v, z))
                v = relu_forward(z)
            else:
                tape.append(("dense", v))
                v = z
        return softmax(v), tape

    def backward(self, tape: list, grad_logits: np.ndarray) -> list[np.ndarray]:
        """Parameter gradients (aligned with parameters()) from a logit gradient."""
        conv_grads: list[tuple[np.ndarray, np.ndarray]] = []
        dense_grads: list[tuple[np.ndarray, np.ndarray]] = []
        g = grad_logits
        dense_idx = len(self.dense_layers) - 1
        for entry in reversed(tape):
            kind = entry[0]
            if kind == "dense":
                _, v = entry
                g, gw, gb = dense_backward(v, self.dense_layers[dense_idx], g)
                dense_grads.append((gw, gb))
                dense_idx -= 1
            elif kind == "dense_relu":
                _, v, z = entry
                g = relu_backward(z, g)
                g, gw, gb = dense_backward(v, self.dense_layers[dense_idx], g)
                dense_grads.append((gw, gb))
                dense_idx -= 1
            elif kind == "flatten":
                _, shape = entry
                g = g.reshape(shape)
            else:
                _, h, z, a_shape, argmax = entry
                conv_idx = len(conv_grads)
                layer_pos = len(self.conv_layers) - 1 - conv_idx
                g = maxpool3d_backward(g, argmax, a_shape)
                g = relu_backward(z, g)
                gx, gk, gb = conv3d_backward(
                    h, self.conv_layers[layer_pos], g, need_grad_input=layer_pos > 0
                )
                conv_grads.append((gk, gb))
                g = gx
        grads: list[np.ndarray] = []
        for gk, gb in reversed(conv_grads):
            grads.append(gk)
            grads.append(gb)
        for gw, gb in reversed(dense_grads):
            grads.append(gw)
            grads.append(gb)
        return grads


def _pooled(extent: int, window: int, axis: str, layer: int) -> int:
    out = extent // window
    if out < 1:
        raise ConfigError(
            f"pool window {window} after conv layer {layer} leaves no output on {axis} "
            f"(extent {extent})"
        )
    return out


def _build(
    config: ModelConfig,
    input_shape: tuple[int, int, int, int],
    pool_windows: list[tuple[int, int, int]],
    kernel_shape: tuple[int, int, int],
    padding: tuple[int, int, int],
    seed: int,
) -> Network:
    rng = generator(seed, KEY_INIT)
    kh, kw, kt = kernel_shape
    conv_layers = []
    pool_specs = []
    c, h, w, f = input_shape
    for i, filters in enumerate(config.filter_counts):
        fan_in = c * kh * kw * kt
        fan_out = filters * kh * kw * kt
        kernels = _glorot(rng, (filters, c, kh, kw, kt), fan_in, fan_out)
        conv_layers.append(
            ConvLayer(kernels=kernels, biases=np.zeros(filters), padding=padding)
        )
        window = pool_windows[i]
        pool_specs.append(PoolSpec(window=window))
        # Same padding keeps extents through the convolution; pooling floors.
        h = _pooled(h, window[0], "height", i + 1)
        w = _pooled(w, window[1], "width", i + 1)
        f = _pooled(f, window[2], "frames", i + 1)
        c = filters
    dense_layers = []
    units = c * h * w * f
    for size in (*config.fc_sizes, config.num_classes):
        size = int(size)
        weights = _glorot(rng, (size, units), units, size)
        dense_layers.append(DenseLayer(weights=weights, biases=np.zeros(size)))
        units = size
    return Network(
        conv_layers=conv_layers,
        pool_specs=pool_specs,
        dense_layers=dense_layers,
        input_shape=input_shape,
    )


def build_model(config: ModelConfig, patch_k: int, seed: int = 0) -> Network:
    """3D patch classifier for k*k*k single-channel cubes.

    Pooling is (2, 2, 1) after the first stack and (2, 2, 2) after each
    deeper one.  Initialization is uniform within +-sqrt(6/(fan_in+fan_out))
    per layer, biases zero, fully determined by ``seed``.
    """
    if patch_k < 1:
        raise ConfigError(f"patch edge must be >= 1, got {patch_k}")
    windows = [(2, 2, 1)] + [(2, 2, 2)] * (config.num_conv_layers - 1)
    return _build(
        config,
        input_shape=(1, patch_k, patch_k, patch_k),
        pool_windows=windows,
        kernel_shape=(KERNEL_EDGE, KERNEL_EDGE, KERNEL_EDGE),
        padding=(1, 1, 1),
        seed=seed,
    )


def build_aggregator(config: ModelConfig, input_len: int, seed: int = 0) -> Network:
    """1D counterpart operating on a flat feature vector of ``input_len``.

    Kernels are [f, c, 3, 1, 1] with same padding along the length; every
    stack halves the length by (2, 1, 1) pooling.
    """
    if input_len < 1:
        raise ConfigError(f"input length must be >= 1, got {input_len}")
    windows = [(2, 1, 1)] * config.num_conv_layers
    return _build(
        config,
        input_shape=(1, input_len, 1, 1),
        pool_windows=windows,
        kernel_shape=(KERNEL_EDGE, 1, 1),
        padding=(1, 0, 0),
        seed=seed,
    )
