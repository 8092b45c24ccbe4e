"""Raw video volumes, luminance ingestion, and patch extraction.

A video is kept as its luminance plane only, shaped [height, width,
frames].  Supported on-disk layouts:

* ``planar420``: frame-interleaved planar YUV 4:2:0, 8 bits per sample.
  Each frame stores width*height luma bytes followed by two quarter-size
  chroma planes; the chroma is skipped on read.
* ``y_only``: bare luma frames, width*height bytes each.

Patches are non-overlapping k*k*k cubes taken on a rigid grid anchored at
the origin; trailing samples that do not fill a cube are ignored.  Each
patch carries its source item and grid position so downstream code can
order, trace, and reassemble them.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, FormatError, LabelError
from .tensor import resolve_dtype

FORMATS = ("planar420", "y_only")


@dataclass(eq=False)
class VideoVolume:
    """Luminance volume [height, width, frames] plus its frame rate."""

    luma: np.ndarray
    frame_rate: float

    def __post_init__(self):
        self.luma = np.ascontiguousarray(self.luma)
        if self.luma.ndim != 3:
            raise DimensionError(
                f"luma must be [height, width, frames], got shape {self.luma.shape}"
            )
        if not (self.frame_rate > 0):
            raise ConfigError(f"frame rate must be positive, got {self.frame_rate}")

    @property
    def height(self) -> int:
        return self.luma.shape[0]

    @property
    def width(self) -> int:
        return self.luma.shape[1]

    @property
    def frames(self) -> int:
        return self.luma.shape[2]

    @property
    def duration_s(self) -> float:
        return self.frames / self.frame_rate


def frame_stride_bytes(width: int, height: int, fmt: str) -> int:
    """On-disk bytes per frame for a given sample layout."""
    if fmt not in FORMATS:
        raise ConfigError(f"unknown video format {fmt!r}; expected one of {FORMATS}")
    if width <= 0 or height <= 0:
        raise DimensionError(f"frame dimensions must be positive, got {width}x{height}")
    if fmt == "planar420":
        if width % 2 or height % 2:
            raise DimensionError(
                f"planar420 needs even dimensions, got {width}x{height}"
            )
        return width * height * 3 // 2
    return width * height


def read_yuv_luma(
    path,
    width: int,
    height: int,
    frames: int,
    fmt: str = "planar420",
    frame_rate: float = 25.0,
    dtype="float64",
) -> VideoVolume:
    """Load the luminance plane of a raw 8-bit video file.

    The file size must equal frames * stride exactly; anything else raises
    FormatError with the byte counts.
    """
    if frames <= 0:
        raise DimensionError(f"frame count must be positive, got {frames}")
    stride = frame_stride_bytes(width, height, fmt)
    expected = stride * frames
    actual = os.path.getsize(path)
    if actual != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes "
            f"({frames} frames of {stride}), found {actual}"
        )
    raw = np.fromfile(path, dtype=np.uint8)
    per_frame = raw.reshape(frames, stride)[:, : width * height]
    luma = per_frame.reshape(frames, height, width).transpose(1, 2, 0)
    return VideoVolume(
        luma=luma.astype(resolve_dtype(dtype)),
        frame_rate=float(frame_rate),
    )


def write_y_only(path, volume: VideoVolume) -> None:
    """Store a volume as bare 8-bit luma frames (inverse of y_only reading)."""
    luma = volume.luma
    if np.any(luma < 0) or np.any(luma > 255):
        raise FormatError("luma values outside [0, 255] cannot be stored as 8-bit samples")
    as_bytes = np.ascontiguousarray(luma.transpose(2, 0, 1)).astype(np.uint8)
    if not np.array_equal(as_bytes.transpose(1, 2, 0), luma):
        raise FormatError("luma values are not integral; refusing a lossy 8-bit write")
    as_bytes.tofile(path)


@dataclass(frozen=True)
class PatchSpec:
    """Cube edge length for grid patch extraction."""

    k: int = 16

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"patch edge must be >= 1, got {self.k}")

    def grid_shape(self, volume: VideoVolume) -> tuple[int, int, int]:
        return (
            volume.height // self.k,
            volume.width // self.k,
            volume.frames // self.k,
        )

    def count(self, volume: VideoVolume) -> int:
        gy, gx, gt = self.grid_shape(volume)
        return gy * gx * gt


@dataclass(eq=False)
class Patch:
    """One k*k*k luminance cube with its label and provenance."""

    cube: np.ndarray
    label: int
    source_item: str
    grid_position: tuple[int, int, int]

    def __post_init__(self):
        if self.cube.ndim != 3:
            raise DimensionError(f"patch cube must be 3-dimensional, got shape {self.cube.shape}")
        if self.label < 0:
            raise LabelError(f"patch label must be non-negative, got {self.label}")

    @property
    def sort_key(self):
        return (self.source_item, self.grid_position)


def extract_patches(
    volume: VideoVolume, spec: PatchSpec, label: int, source_item: str = ""
) -> list[Patch]:
    """Cut the volume into non-overlapping cubes in grid scan order.

    The grid position (gy, gx, gt) enumerates cubes row-major: gy slowest,
    gt fastest.  Every patch of one volume shares the volume's label.
    """
    k = spec.k
    gy, gx, gt = spec.grid_shape(volume)
    if gy == 0 or gx == 0 or gt == 0:
        raise DimensionError(
            f"volume {volume.height}x{volume.width}x{volume.frames} holds no "
            f"complete {k}^3 patch"
        )
    if label < 0:
        raise LabelError(f"label must be non-negative, got {label}")
    patches = []
    for iy in range(gy):
        for ix in range(gx):
            for it in range(gt):
                cube = volume.luma[
                    iy * k : (iy + 1) * k,
                    ix * k : (ix + 1) * k,
                    it * k : (it + 1) * k,
                ]
                patches.append(
                    Patch(
                        cube=np.ascontiguousarray(cube),
                        label=int(label),
                        source_item=source_item,
                        grid_position=(iy, ix, it),
                    )
                )
    return patches


def assemble_patches(patches: list[Patch], k: int) -> np.ndarray:
    """Rebuild the grid-covered region of a volume from its patches.

    Inverse of extract_patches over the covered region; used to confirm
    extraction is lossless.
    """
    if not patches:
        raise DimensionError("cannot assemble an empty patch list")
    gy = 1 + max(p.grid_position[0] for p in patches)
    gx = 1 + max(p.grid_position[1] for p in patches)
    gt = 1 + max(p.grid_position[2] for p in patches)
    out = np.zeros((gy * k, gx * k, gt * k), dtype=patches[0].cube.dtype)
    seen = set()
    for p in patches:
        if p.cube.shape != (k, k, k):
            raise DimensionError(f"patch cube shape {p.cube.shape} is not ({k}, {k}, {k})")
        if p.grid_position in seen:
            raise DimensionError(f"duplicate grid position {p.grid_position}")
        seen.add(p.grid_position)
        iy, ix, it = p.grid_position
        out[iy * k : (iy + 1) * k, ix * k : (ix + 1) * k, it * k : (it + 1) * k] = p.cube
    if len(seen) != gy * gx * gt:
        raise DimensionError("patch list does not cover the full grid")
    return out


def sort_patches(patches: list[Patch]) -> list[Patch]:
    """Canonical patch order: by source item, then grid position."""
    return sorted(patches, key=lambda p: p.sort_key)
