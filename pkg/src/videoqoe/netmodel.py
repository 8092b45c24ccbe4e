"""TCP throughput model, transmission delay, and delay embedding.

Steady-state TCP throughput follows the classic inverse square-root law

    R = 1.22 * M / (T * sqrt(L))

with the segment size M in bits, round-trip time T in seconds and packet
loss rate L as a fraction.  The transmission delay of a clip is

    delay = (bitrate / R) * duration

and is embedded into a video volume as stall frames prepended to the
signal, so the network condition becomes visible to a purely pixel-based
model.

A small table of named network conditions ships with the package.  Two of
the nominal rates in that table disagree with the formula applied to their
own RTT/loss entries (each matches the other's loss value instead); the
table keeps the nominal values and ``preset_rate_mismatch`` exposes the
disagreement instead of hiding it.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources as importlib_resources

import numpy as np

from .errors import ConfigError, DomainError, FormatError
from . import video as _video

THROUGHPUT_CONSTANT = 1.22
DEFAULT_MSS_BYTES = 1500

# Relative disagreement above which a preset's nominal rate is flagged.
MISMATCH_TOLERANCE = 0.02


@dataclass(frozen=True)
class NetworkCondition:
    """TCP path parameters: segment size, round-trip time, loss rate."""

    mss_bytes: int = DEFAULT_MSS_BYTES
    rtt_s: float = 0.05
    loss_rate: float = 0.03

    def __post_init__(self):
        if self.mss_bytes <= 0:
            raise DomainError(f"segment size must be positive, got {self.mss_bytes}")
        if not (self.rtt_s > 0):
            raise DomainError(f"round-trip time must be positive, got {self.rtt_s}")
        if not (0 < self.loss_rate <= 1):
            raise DomainError(f"loss rate must be in (0, 1], got {self.loss_rate}")


@dataclass(frozen=True)
class ClipTransmission:
    """Stream properties of one clip: average bitrate and duration."""

    bitrate_bps: float
    duration_s: float

    def __post_init__(self):
        if not (self.bitrate_bps > 0):
            raise DomainError(f"bitrate must be positive, got {self.bitrate_bps}")
        if not (self.duration_s > 0):
            raise DomainError(f"duration must be positive, got {self.duration_s}")


@dataclass(frozen=True)
class ConditionPreset:
    """Named network condition with the nominal throughput quoted for it."""

    name: str
    condition: NetworkCondition
    nominal_rate_bps: float


def throughput(condition: NetworkCondition) -> float:
    """Steady-state TCP throughput in bits per second."""
    mss_bits = condition.mss_bytes * 8
    return THROUGHPUT_CONSTANT * mss_bits / (condition.rtt_s * math.sqrt(condition.loss_rate))


def transmission_delay(clip: ClipTransmission, rate_bps: float) -> float:
    """Seconds needed to deliver the clip at ``rate_bps``."""
    if not (rate_bps > 0):
        raise DomainError(f"throughput must be positive, got {rate_bps}")
    return (clip.bitrate_bps / rate_bps) * clip.duration_s


def stall_frame_count(delay_s: float, frame_rate: float) -> int:
    """Delay expressed in whole frames, rounding half up."""
    if delay_s < 0:
        raise DomainError(f"delay must be non-negative, got {delay_s}")
    if not (frame_rate > 0):
        raise DomainError(f"frame rate must be positive, got {frame_rate}")
    return int(math.floor(delay_s * frame_rate + 0.5))


def embed_delay(volume, delay_s: float, fill: str = "freeze"):
    """Prepend stall frames representing a startup delay.

    ``fill`` selects the stall content: "freeze" repeats the first frame,
    "black" inserts zero frames.  The original signal is preserved
    bit-exactly after the stall block.
    """
    if fill not in ("freeze", "black"):
        raise ConfigError(f"stall fill must be 'freeze' or 'black', got {fill!r}")
    n = stall_frame_count(delay_s, volume.frame_rate)
    if n == 0:
        stall_shape = volume.luma[:, :, :0]
        stall = stall_shape
    elif fill == "freeze":
        stall = np.repeat(volume.luma[:, :, :1], n, axis=2)
    else:
        stall = np.zeros(volume.luma.shape[:2] + (n,), dtype=volume.luma.dtype)
    luma = np.concatenate([stall, volume.luma], axis=2)
    return _video.VideoVolume(luma=luma, frame_rate=volume.frame_rate)


def load_presets() -> dict[str, ConditionPreset]:
    """Read the packaged network condition table, keyed by preset name."""
    text = (
        importlib_resources.files("videoqoe")
        .joinpath("resources/presets.csv")
        .read_text(encoding="ascii")
    )
    presets: dict[str, ConditionPreset] = {}
    rows = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    for row in csv.reader(rows):
        if len(row) != 5:
            raise FormatError(f"preset table row has {len(row)} fields, expected 5: {row!r}")
        name, mss, rtt, loss, nominal = (field.strip() for field in row)
        presets[name] = ConditionPreset(
            name=name,
            condition=NetworkCondition(
                mss_bytes=int(mss), rtt_s=float(rtt), loss_rate=float(loss)
            ),
            nominal_rate_bps=float(nominal),
        )
    return presets


def get_preset(name: str) -> ConditionPreset:
    presets = load_presets()
    if name not in presets:
        raise ConfigError(f"unknown network preset {name!r}; known: {sorted(presets)}")
    return presets[name]


def preset_rate_mismatch(preset: ConditionPreset) -> bool:
    """True when the formula disagrees with the quoted nominal rate."""
    computed = throughput(preset.condition)
    return abs(computed - preset.nominal_rate_bps) / preset.nominal_rate_bps > MISMATCH_TOLERANCE
