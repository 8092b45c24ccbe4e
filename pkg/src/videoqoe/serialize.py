"""Binary weight files.

Layout (all integers little-endian unsigned 32-bit, all floats
little-endian IEEE 754 binary64, no alignment padding):

    bytes 0..7   magic b"VQOEWT01"
    uint32       A, number of arrays
    repeated A times:
        uint32   ndim
        uint32 * ndim   extents, row-major order
    float64 * N  payload: each array's values flattened row-major,
                 arrays concatenated in header order

A human-readable sidecar at ``<path>.layers.txt`` lists the array order
(name, shape, value count) so a weight file can be inspected without this
package.  Weights are always stored as float64 regardless of the compute
dtype.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionError, FormatError
from .network import Network

MAGIC = b"VQOEWT01"


def save_arrays(path, arrays, names) -> None:
    """Write named float arrays in the container format plus the sidecar."""
    arrays = [np.asarray(a) for a in arrays]
    if len(arrays) != len(names):
        raise DimensionError(f"{len(arrays)} arrays but {len(names)} names")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(arrays)))
        for p in arrays:
            fh.write(struct.pack("<I", p.ndim))
            fh.write(struct.pack(f"<{p.ndim}I", *p.shape))
        for p in arrays:
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())
    with open(str(path) + ".layers.txt", "w", encoding="ascii") as fh:
        fh.write("array order of the adjacent weight file\n")
        for i, (name, p) in enumerate(zip(names, arrays)):
            shape = "x".join(str(s) for s in p.shape)
            fh.write(f"{i}: {name} shape {shape} ({p.size} values)\n")


def save_weights(path, net: Network) -> None:
    """Write the network's parameter arrays plus the sidecar."""
    save_arrays(path, net.parameters(), net.parameter_names())


def load_weights(path) -> list[np.ndarray]:
    """Read a weight file back into float64 arrays."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:8]!r}, expected {MAGIC!r}")
    offset = 8
    try:
        (count,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        shapes = []
        for _ in range(count):
            (ndim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}I", blob, offset)
            offset += 4 * ndim
            shapes.append(shape)
    except struct.error as exc:
        raise FormatError(f"{path}: truncated header: {exc}") from exc
    arrays = []
    for shape in shapes:
        n = int(np.prod(shape)) if shape else 1
        end = offset + 8 * n
        if end > len(blob):
            raise FormatError(
                f"{path}: payload truncated, need {end} bytes, file has {len(blob)}"
            )
        arrays.append(np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape).copy())
        offset = end
    if offset != len(blob):
        raise FormatError(
            f"{path}: {len(blob) - offset} trailing bytes after the declared payload"
        )
    return arrays


def load_weights_into(path, net: Network) -> None:
    """Load a weight file into an already built network, checking shapes."""
    arrays = load_weights(path)
    params = net.parameters()
    if len(arrays) != len(params):
        raise DimensionError(
            f"{path}: holds {len(arrays)} arrays, network has {len(params)}"
        )
    for i, (src, dst) in enumerate(zip(arrays, params)):
        if src.shape != dst.shape:
            raise DimensionError(
                f"{path}: array {i} has shape {src.shape}, network expects {dst.shape}"
            )
    for src, dst in zip(arrays, params):
        dst[...] = src
