"""Discretization of mean opinion scores into class labels.

MOS values live on [1, 5].  A DiscretizationSpec cuts that range into
bins of a fixed width; the label is the bin index counted from 1.0:

    label = min(floor((mos - 1) / width), num_bins - 1)

so the final bin is closed on the right and absorbs any remainder when
the width does not divide the range evenly.

The quoted width 1.33 is treated as the exact third of the range: three
equal bins of width 4/3.  Taken literally, 1.33 would leave a sliver
fourth bin covering only [4.99, 5], which no plausible score set ever
occupies; the interval boundaries below make the intent explicit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError

MOS_MIN = 1.0
MOS_MAX = 5.0
_RANGE = MOS_MAX - MOS_MIN

# Widths within this distance of 1.33 (or exactly 4/3) use the three-bin split.
_THIRD_TOLERANCE = 0.01


def _is_third(width: float) -> bool:
    return abs(width - 1.33) <= _THIRD_TOLERANCE or math.isclose(width, _RANGE / 3)


@dataclass(frozen=True)
class DiscretizationSpec:
    """Fixed-width binning of the MOS range [1, 5]."""

    interval_size: float = 1.33

    def __post_init__(self):
        if not (0 < self.interval_size <= _RANGE):
            raise ConfigError(
                f"interval size must be in (0, {_RANGE}], got {self.interval_size}"
            )

    @property
    def effective_width(self) -> float:
        return _RANGE / 3 if _is_third(self.interval_size) else self.interval_size

    @property
    def num_bins(self) -> int:
        if _is_third(self.interval_size):
            return 3
        return math.ceil(_RANGE / self.interval_size)

    def boundaries(self) -> list[float]:
        """Bin edges from 1.0 to 5.0, num_bins + 1 values."""
        width = self.effective_width
        edges = [MOS_MIN + i * width for i in range(self.num_bins)]
        edges.append(MOS_MAX)
        return edges


def discretize_mos(mos: float, spec: DiscretizationSpec) -> int:
    """Class index of a MOS value under the given binning."""
    if not (MOS_MIN <= mos <= MOS_MAX):
        raise DomainError(f"MOS must be in [{MOS_MIN}, {MOS_MAX}], got {mos}")
    raw = math.floor((mos - MOS_MIN) / spec.effective_width)
    return min(raw, spec.num_bins - 1)


def occupied_bins(scores, spec: DiscretizationSpec) -> int:
    """Number of distinct labels a score collection actually uses."""
    return len({discretize_mos(s, spec) for s in scores})
