"""Neural network layer primitives with exact forward and backward passes.

Conventions, fixed across the package:

* conv3d input is ``[channels, height, width, frames]``; kernels are
  ``[num_filters, in_channels, kH, kW, kT]``.  Degenerate trailing kernel
  extents (kW = kT = 1) give the 1D specialization used on flat feature
  vectors, so one state type covers both.
* Convolution output extent per axis is ``(n + 2*pad - k) // stride + 1``
  and the division must be exact.
* Max pooling is non-overlapping: stride equals the window, trailing
  samples that do not fill a window are dropped, and ties resolve to the
  first maximum in row-major scan order.
* Gradients are exact derivatives of the forward computation; no
  approximations, so finite differences agree to first order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ConfigError, LabelError
from .tensor import tensor, require_finite

# Probability floor applied before the cross-entropy log.
CROSS_ENTROPY_CLIP = 1e-12


def _triple(name: str, value, minimum: int) -> tuple[int, int, int]:
    vals = tuple(int(v) for v in value)
    if len(vals) != 3:
        raise DimensionError(f"{name} must have 3 entries, got {len(vals)}")
    if any(v < minimum for v in vals):
        raise ConfigError(f"{name} entries must be >= {minimum}, got {vals}")
    return vals


@dataclass(eq=False)
class ConvLayer:
    """Convolution coefficients plus padding and stride.

    ``kernels`` has shape [num_filters, in_channels, kH, kW, kT]; the 1D
    case uses kW = kT = 1.
    """

    kernels: np.ndarray
    biases: np.ndarray
    padding: tuple[int, int, int] = (0, 0, 0)
    stride: tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        self.kernels = tensor(self.kernels)
        self.biases = tensor(self.biases)
        if self.kernels.ndim != 5:
            raise DimensionError(
                f"kernels must be 5-dimensional, got shape {self.kernels.shape}"
            )
        if any(e < 1 for e in self.kernels.shape[2:]):
            raise DimensionError(f"kernel extents must be >= 1, got {self.kernels.shape[2:]}")
        if self.biases.shape != (self.kernels.shape[0],):
            raise DimensionError(
                f"biases shape {self.biases.shape} does not match "
                f"{self.kernels.shape[0]} filters"
            )
        self.padding = _triple("padding", self.padding, 0)
        self.stride = _triple("stride", self.stride, 1)

    @property
    def num_filters(self) -> int:
        return self.kernels.shape[0]

    @property
    def in_channels(self) -> int:
        return self.kernels.shape[1]

    @property
    def num_params(self) -> int:
        return self.kernels.size + self.biases.size


def conv1d_layer(kernels, biases, padding: int = 0, stride: int = 1) -> ConvLayer:
    """Build a ConvLayer from 1D kernels of shape [num_filters, in_channels, k]."""
    k = tensor(kernels)
    if k.ndim != 3:
        raise DimensionError(f"1D kernels must be 3-dimensional, got shape {k.shape}")
    return ConvLayer(
        kernels=k[:, :, :, None, None],
        biases=biases,
        padding=(int(padding), 0, 0),
        stride=(int(stride), 1, 1),
    )


@dataclass(eq=False)
class DenseLayer:
    """Fully connected layer: y = weights @ x + biases."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = tensor(self.weights)
        self.biases = tensor(self.biases)
        if self.weights.ndim != 2:
            raise DimensionError(f"weights must be 2-dimensional, got shape {self.weights.shape}")
        if self.biases.shape != (self.weights.shape[0],):
            raise DimensionError(
                f"biases shape {self.biases.shape} does not match "
                f"{self.weights.shape[0]} output units"
            )

    @property
    def num_params(self) -> int:
        return self.weights.size + self.biases.size


@dataclass(frozen=True)
class PoolSpec:
    """Non-overlapping max-pooling window; stride always equals the window."""

    window: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "window", _triple("pool window", self.window, 1))


def _conv_out_extent(n: int, pad: int, k: int, stride: int, axis: str) -> int:
    span = n + 2 * pad - k
    if span < 0:
        raise DimensionError(
            f"kernel extent {k} exceeds padded input extent {n + 2 * pad} on axis {axis}"
        )
    if span % stride != 0:
        raise ConfigError(
            f"axis {axis}: extent {n} with padding {pad}, kernel {k}, stride {stride} "
            f"gives a non-integer output extent"
        )
    return span // stride + 1


def _check_conv_input(x: np.ndarray, layer: ConvLayer) -> tuple[int, int, int]:
    if x.ndim != 4:
        raise DimensionError(f"conv3d input must be [C, H, W, F], got shape {x.shape}")
    if x.shape[0] != layer.in_channels:
        raise DimensionError(
            f"input has {x.shape[0]} channels, kernels expect {layer.in_channels}"
        )
    kh, kw, kt = layer.kernels.shape[2:]
    ph, pw, pt = layer.padding
    sh, sw, st = layer.stride
    oh = _conv_out_extent(x.shape[1], ph, kh, sh, "height")
    ow = _conv_out_extent(x.shape[2], pw, kw, sw, "width")
    ot = _conv_out_extent(x.shape[3], pt, kt, st, "frames")
    return oh, ow, ot


def _pad_input(x: np.ndarray, padding: tuple[int, int, int]) -> np.ndarray:
    ph, pw, pt = padding
    if ph == pw == pt == 0:
        return x
    return np.pad(x, ((0, 0), (ph, ph), (pw, pw), (pt, pt)))


def _windows(padded: np.ndarray, kshape, stride) -> np.ndarray:
    # View of all kernel-sized windows: [C, oh, ow, ot, kH, kW, kT].
    win = np.lib.stride_tricks.sliding_window_view(padded, kshape, axis=(1, 2, 3))
    sh, sw, st = stride
    return win[:, ::sh, ::sw, ::st]


def conv3d_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Cross-correlate x [C, H, W, F] with the layer kernels.

    Returns [num_filters, H', W', F'] where each output extent is
    (n + 2*pad - k) // stride + 1.
    """
    _check_conv_input(x, layer)
    padded = _pad_input(x, layer.padding)
    win = _windows(padded, layer.kernels.shape[2:], layer.stride)
    out = np.tensordot(layer.kernels, win, axes=([1, 2, 3, 4], [0, 4, 5, 6]))
    out += layer.biases[:, None, None, None]
    return out


def conv3d_backward(
    x: np.ndarray,
    layer: ConvLayer,
    grad_out: np.ndarray,
    need_grad_input: bool = True,
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Gradients of a scalar loss through conv3d_forward.

    Returns (grad_input, grad_kernels, grad_biases); grad_input is None
    when not requested (first layer of a network).
    """
    oh, ow, ot = _check_conv_input(x, layer)
    if grad_out.shape != (layer.num_filters, oh, ow, ot):
        raise DimensionError(
            f"grad_out shape {grad_out.shape} does not match forward output "
            f"{(layer.num_filters, oh, ow, ot)}"
        )
    padded = _pad_input(x, layer.padding)
    win = _windows(padded, layer.kernels.shape[2:], layer.stride)

    grad_biases = grad_out.sum(axis=(1, 2, 3))
    grad_kernels = np.tensordot(grad_out, win, axes=([1, 2, 3], [1, 2, 3]))

    grad_input = None
    if need_grad_input:
        kh, kw, kt = layer.kernels.shape[2:]
        sh, sw, st = layer.stride
        gpad = np.zeros_like(padded)
        # Scatter each kernel offset's contribution; fixed loop order keeps
        # the accumulation deterministic.
        for i in range(kh):
            for j in range(kw):
                for p in range(kt):
                    w = layer.kernels[:, :, i, j, p]
                    contrib = np.tensordot(w, grad_out, axes=([0], [0]))
                    gpad[
                        :,
                        i : i + sh * oh : sh,
                        j : j + sw * ow : sw,
                        p : p + st * ot : st,
                    ] += contrib
        ph, pw, pt = layer.padding
        grad_input = gpad[
            :,
            ph : ph + x.shape[1],
            pw : pw + x.shape[2],
            pt : pt + x.shape[3],
        ]
        # Slicing a freshly built array; copy so callers own the memory.
        grad_input = np.ascontiguousarray(grad_input)
    return grad_input, grad_kernels, grad_biases


def _check_conv1d_layer(layer: ConvLayer) -> None:
    if layer.kernels.shape[3:] != (1, 1):
        raise DimensionError(
            f"conv1d needs degenerate trailing kernel extents, got {layer.kernels.shape[2:]}"
        )


def conv1d_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Cross-correlate x [C, L] with 1D kernels; returns [num_filters, L']."""
    if x.ndim != 2:
        raise DimensionError(f"conv1d input must be [C, L], got shape {x.shape}")
    _check_conv1d_layer(layer)
    y = conv3d_forward(x[:, :, None, None], layer)
    return y[:, :, 0, 0]


def conv1d_backward(
    x: np.ndarray,
    layer: ConvLayer,
    grad_out: np.ndarray,
    need_grad_input: bool = True,
) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    if x.ndim != 2:
        raise DimensionError(f"conv1d input must be [C, L], got shape {x.shape}")
    _check_conv1d_layer(layer)
    if grad_out.ndim != 2:
        raise DimensionError(f"conv1d grad_out must be [F, L'], got shape {grad_out.shape}")
    gx, gk, gb = conv3d_backward(
        x[:, :, None, None], layer, grad_out[:, :, None, None], need_grad_input
    )
    if gx is not None:
        gx = gx[:, :, 0, 0]
    return gx, gk, gb


def maxpool3d_forward(x: np.ndarray, spec: PoolSpec) -> tuple[np.ndarray, np.ndarray]:
    """Max over disjoint windows.

    Returns (output, argmax) where argmax holds, per output cell, the flat
    row-major index into ``x`` of the first maximum in scan order.
    """
    if x.ndim != 4:
        raise DimensionError(f"maxpool3d input must be [C, A, B, D], got shape {x.shape}")
    wa, wb, wd = spec.window
    c, a, b, d = x.shape
    for extent, w, axis in ((a, wa, "height"), (b, wb, "width"), (d, wd, "frames")):
        if w > extent:
            raise DimensionError(f"pool window {w} exceeds input extent {extent} on axis {axis}")
    na, nb, nd = a // wa, b // wb, d // wd
    core = x[:, : na * wa, : nb * wb, : nd * wd]
    blocks = core.reshape(c, na, wa, nb, wb, nd, wd).transpose(0, 1, 3, 5, 2, 4, 6)
    flat_win = np.ascontiguousarray(blocks).reshape(c, na, nb, nd, wa * wb * wd)
    k = flat_win.argmax(axis=-1)
    out = np.take_along_axis(flat_win, k[..., None], axis=-1)[..., 0]
    oi, oj, op = np.unravel_index(k, (wa, wb, wd))
    cc, ia, ib, idd = np.indices((c, na, nb, nd), sparse=True)
    argmax = np.ravel_multi_index(
        (cc, ia * wa + oi, ib * wb + oj, idd * wd + op), x.shape
    )
    return out, argmax


def maxpool3d_backward(
    grad_out: np.ndarray, argmax: np.ndarray, input_shape: tuple[int, ...]
) -> np.ndarray:
    """Route each output gradient to its argmax source position."""
    if grad_out.shape != argmax.shape:
        raise DimensionError(
            f"grad_out shape {grad_out.shape} does not match argmax shape {argmax.shape}"
        )
    total = math.prod(input_shape)
    idx = argmax.reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= total):
        from .errors import InternalError

        raise InternalError("pooling argmax index out of bounds for the input shape")
    grad = np.zeros(total, dtype=grad_out.dtype)
    np.add.at(grad, idx, grad_out.reshape(-1))
    return grad.reshape(input_shape)


def dense_forward(x: np.ndarray, layer: DenseLayer) -> np.ndarray:
    if x.ndim != 1:
        raise DimensionError(f"dense input must be a vector, got shape {x.shape}")
    if x.shape[0] != layer.weights.shape[1]:
        raise DimensionError(
            f"dense input length {x.shape[0]} does not match weights "
            f"[{layer.weights.shape[0]}, {layer.weights.shape[1]}]"
        )
    return layer.weights @ x + layer.biases


def dense_backward(
    x: np.ndarray, layer: DenseLayer, grad_out: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if grad_out.shape != (layer.weights.shape[0],):
        raise DimensionError(
            f"grad_out shape {grad_out.shape} does not match {layer.weights.shape[0]} outputs"
        )
    grad_input = layer.weights.T @ grad_out
    grad_weights = np.outer(grad_out, x)
    grad_biases = grad_out.copy()
    return grad_input, grad_weights, grad_biases


def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(x: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Subgradient with derivative 0 at exactly 0."""
    if x.shape != grad_out.shape:
        raise DimensionError(
            f"grad_out shape {grad_out.shape} does not match input shape {x.shape}"
        )
    return grad_out * (x > 0)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over a logit vector."""
    if logits.ndim != 1 or logits.size == 0:
        raise DimensionError(f"softmax needs a non-empty vector, got shape {logits.shape}")
    require_finite(logits, "softmax logits")
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def cross_entropy(probabilities: np.ndarray, true_class: int) -> tuple[float, np.ndarray]:
    """Cross-entropy of softmax probabilities against an integer class.

    Returns (loss, grad_logits) where grad_logits is the gradient with
    respect to the logits that produced ``probabilities`` via softmax.
    """
    if probabilities.ndim != 1 or probabilities.size == 0:
        raise DimensionError(
            f"cross_entropy needs a non-empty probability vector, got shape {probabilities.shape}"
        )
    t = int(true_class)
    if t < 0 or t >= probabilities.shape[0]:
        raise LabelError(
            f"class {t} outside the {probabilities.shape[0]} classes of the probability vector"
        )
    loss = -math.log(max(float(probabilities[t]), CROSS_ENTROPY_CLIP))
    grad_logits = probabilities.copy()
    grad_logits[t] -= 1.0
    return loss, grad_logits
