"""Synthetic dataset generation for tests and desk-scale experiments.

Each item is a translating sinusoidal gradient, rounded to 8-bit integers,
then degraded by uniform luminance quantization with a class-dependent
step.  Small steps leave the smooth pattern intact (high quality); large
steps produce visible banding (low quality).  Generation is fully
deterministic in the seed: the same config always writes byte-identical
files and manifests.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .manifest import DEFAULT_QP_SET, DatasetItem, write_manifest
from .seeding import KEY_SYNTH, generator
from .video import VideoVolume, write_y_only

# Quantization step per class, worst quality first.
DEFAULT_CLASS_STEPS = (64, 16, 1)

_PRESET_CYCLE = ("cond1", "cond2", "cond3", "cond4")


@dataclass(frozen=True)
class SynthConfig:
    items_per_class: int = 3
    width: int = 64
    height: int = 64
    frames: int = 32
    frame_rate: float = 25.0
    num_classes: int = 3
    class_steps: tuple[int, ...] = DEFAULT_CLASS_STEPS
    seed: int = 0

    def __post_init__(self):
        if self.items_per_class < 1:
            raise ConfigError(f"items_per_class must be >= 1, got {self.items_per_class}")
        if min(self.width, self.height, self.frames) < 1:
            raise ConfigError("width, height and frames must all be positive")
        if not (self.frame_rate > 0):
            raise ConfigError(f"frame rate must be positive, got {self.frame_rate}")
        if self.num_classes < 1:
            raise ConfigError(f"num_classes must be >= 1, got {self.num_classes}")
        if self.num_classes > len(self.class_steps):
            raise ConfigError(
                f"{self.num_classes} classes but only {len(self.class_steps)} "
                f"quantization steps configured"
            )
        if any(int(s) < 1 for s in self.class_steps):
            raise ConfigError(f"quantization steps must be >= 1, got {self.class_steps}")


def base_pattern(config: SynthConfig, rng: np.random.Generator) -> np.ndarray:
    """Integer-valued translating sinusoidal gradient, [height, width, frames]."""
    theta = rng.uniform(0.0, 2.0 * np.pi)
    wavelength = rng.uniform(24.0, 48.0)
    omega = rng.uniform(0.15, 0.45)  # phase advance per frame
    phi = rng.uniform(0.0, 2.0 * np.pi)
    y = np.arange(config.height, dtype=np.float64)[:, None, None]
    x = np.arange(config.width, dtype=np.float64)[None, :, None]
    t = np.arange(config.frames, dtype=np.float64)[None, None, :]
    phase = 2.0 * np.pi * (x * np.cos(theta) + y * np.sin(theta)) / wavelength + omega * t + phi
    values = 127.5 + 110.0 * np.sin(phase)
    return np.floor(values + 0.5)


def quantize_luma(values: np.ndarray, step: int) -> np.ndarray:
    """Uniform quantization to multiples of ``step``, clipped to 8-bit range."""
    if step < 1:
        raise ConfigError(f"quantization step must be >= 1, got {step}")
    if step == 1:
        return np.clip(values, 0, 255)
    return np.clip(np.floor(values / step + 0.5) * step, 0, 255)


def mos_for_class(label: int, num_classes: int) -> float:
    """Center of an even split of [1, 5] into num_classes quality levels."""
    return 1.0 + (label + 0.5) * 4.0 / num_classes


def _qp_for_class(label: int, num_classes: int) -> int:
    qps = sorted(DEFAULT_QP_SET)
    if num_classes == 1:
        return qps[len(qps) // 2]
    pos = round((1.0 - label / (num_classes - 1)) * (len(qps) - 1))
    return qps[pos]


def _bitrate_for_class(label: int, num_classes: int) -> float:
    if num_classes == 1:
        return 3.0e6
    return 8.0e5 * 10.0 ** (label / (num_classes - 1))


def synthesize_item(config: SynthConfig, label: int, ordinal: int) -> VideoVolume:
    """One synthetic volume; deterministic in (seed, ordinal)."""
    rng = generator(config.seed, KEY_SYNTH, ordinal)
    base = base_pattern(config, rng)
    luma = quantize_luma(base, int(config.class_steps[label]))
    return VideoVolume(luma=luma, frame_rate=config.frame_rate)


def synthesize_dataset(config: SynthConfig, out_dir) -> list[DatasetItem]:
    """Write all items plus manifest.json into ``out_dir``; returns the items."""
    os.makedirs(out_dir, exist_ok=True)
    items = []
    ordinal = 0
    for label in range(config.num_classes):
        for i in range(config.items_per_class):
            volume = synthesize_item(config, label, ordinal)
            item_id = f"synth-c{label}-{i:02d}"
            path = f"{item_id}.yraw"
            write_y_only(os.path.join(out_dir, path), volume)
            items.append(
                DatasetItem(
                    id=item_id,
                    path=path,
                    width=config.width,
                    height=config.height,
                    frames=config.frames,
                    fps=config.frame_rate,
                    qp=_qp_for_class(label, config.num_classes),
                    preset=_PRESET_CYCLE[ordinal % len(_PRESET_CYCLE)],
                    bitrate_bps=_bitrate_for_class(label, config.num_classes),
                    mos=mos_for_class(label, config.num_classes),
                )
            )
            ordinal += 1
    write_manifest(os.path.join(out_dir, "manifest.json"), items)
    return items
