"""Sequence-level aggregation of patch predictions.

Two strategies:

* majority_vote: the sequence label is the most frequent patch label;
  ties resolve to the smallest class index.
* extract_feature_vector: a freshly initialized patch model is trained
  one random patch at a time and the full coefficient vector is
  snapshotted after every step.  The concatenation of the P snapshots
  (length P * num_params) is a trajectory signature of the video that a
  1D model can classify.  The per-patch step needs a target class even
  for unlabeled videos, so it uses the model's own current prediction;
  with a zero learning rate the snapshots degenerate to P copies of the
  initial coefficients.
"""
from __future__ import annotations

import numpy as np

from .errors import AggregationError, ConfigError, DimensionError
from .layers import cross_entropy
from .network import ModelConfig, build_model
from .optim import Optimizer, OptimizerConfig
from .seeding import KEY_SAMPLE, generator
from .video import PatchSpec, VideoVolume

DEFAULT_PATCHES_PER_VIDEO = 1000
DEFAULT_FEATURE_CAP = 65536
DEFAULT_SNAPSHOT_OPTIMIZER = OptimizerConfig(kind="sgd", learning_rate=1e-2)


def majority_vote(labels) -> int:
    """Most frequent label; ties go to the smallest class index."""
    arr = np.asarray(list(labels), dtype=np.int64)
    if arr.size == 0:
        raise AggregationError("majority vote over an empty label collection")
    if arr.min() < 0:
        raise AggregationError(f"negative label {arr.min()} in majority vote")
    counts = np.bincount(arr)
    return int(np.argmax(counts))


def extract_feature_vector(
    volume: VideoVolume,
    config: ModelConfig,
    patch_k: int,
    patches_per_video: int = DEFAULT_PATCHES_PER_VIDEO,
    seed: int = 0,
    optimizer: OptimizerConfig = DEFAULT_SNAPSHOT_OPTIMIZER,
    input_scale: float = 1.0 / 255.0,
) -> np.ndarray:
    """Coefficient-trajectory feature vector of length P * num_params.

    The model is re-initialized from ``seed`` for every call, so feature
    vectors of different videos are comparable.  Patches are sampled from
    the rigid extraction grid: without replacement while distinct cells
    remain, with replacement when P exceeds the grid.
    """
    if patches_per_video < 1:
        raise ConfigError(f"patches_per_video must be >= 1, got {patches_per_video}")
    spec = PatchSpec(k=patch_k)
    gy, gx, gt = spec.grid_shape(volume)
    cells = gy * gx * gt
    if cells == 0:
        raise DimensionError(
            f"volume {volume.height}x{volume.width}x{volume.frames} holds no "
            f"complete {patch_k}^3 patch"
        )
    net = build_model(config, patch_k, seed=seed)
    opt = Optimizer(optimizer)
    params = net.parameters()
    rng = generator(seed, KEY_SAMPLE)
    if patches_per_video <= cells:
        chosen = rng.choice(cells, size=patches_per_video, replace=False)
    else:
        chosen = rng.choice(cells, size=patches_per_video, replace=True)
    k = patch_k
    snapshots = np.zeros((patches_per_video, net.num_params))
    for step, cell in enumerate(chosen):
        iy, rem = divmod(int(cell), gx * gt)
        ix, it = divmod(rem, gt)
        cube = volume.luma[iy * k : (iy + 1) * k, ix * k : (ix + 1) * k, it * k : (it + 1) * k]
        x = np.ascontiguousarray(cube, dtype=np.float64)[None] * input_scale
        probs, tape = net.forward(x)
        target = int(np.argmax(probs))
        _, grad_logits = cross_entropy(probs, target)
        grads = net.backward(tape, grad_logits)
        opt.step(params, grads)
        snapshots[step] = net.coefficients()
    return snapshots.reshape(-1)


def pool_feature_vector(vec: np.ndarray, cap: int = DEFAULT_FEATURE_CAP) -> np.ndarray:
    """Average-pool a feature vector down to at most ``cap`` values.

    The pool window is ceil(len / cap); a short trailing window averages
    only the values it holds.  Vectors already within the cap pass through
    untouched.
    """
    if cap < 1:
        raise ConfigError(f"feature cap must be >= 1, got {cap}")
    vec = np.asarray(vec)
    if vec.ndim != 1 or vec.size == 0:
        raise DimensionError(f"feature vector must be a non-empty 1D array, got {vec.shape}")
    n = vec.size
    if n <= cap:
        return vec.copy()
    window = -(-n // cap)
    full = n // window
    pooled = vec[: full * window].reshape(full, window).mean(axis=1)
    if full * window < n:
        tail = vec[full * window :].mean()
        pooled = np.concatenate([pooled, [tail]])
    return pooled
