"""Dataset manifests: a JSON array describing every video item.

Each record carries exactly the keys below; unknown keys are rejected in
strict mode so typos cannot silently drop configuration.  Class labels are
not stored, they derive from the MOS via a DiscretizationSpec.  Item paths
are kept verbatim (usually relative to the manifest location) so a
load/write round trip is lossless.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, asdict

from .errors import SchemaError
from .mos import MOS_MAX, MOS_MIN

DEFAULT_QP_SET = (18, 24, 28, 32, 40)

_FIELDS = (
    "id",
    "path",
    "width",
    "height",
    "frames",
    "fps",
    "qp",
    "preset",
    "bitrate_bps",
    "mos",
)


@dataclass(frozen=True)
class DatasetItem:
    """Manifest record for one encoded video clip."""

    id: str
    path: str
    width: int
    height: int
    frames: int
    fps: float
    qp: int
    preset: str
    bitrate_bps: float
    mos: float

    @property
    def duration_s(self) -> float:
        return self.frames / self.fps


def _context(record, index) -> str:
    ident = record.get("id") if isinstance(record, dict) else None
    return f"record {ident!r}" if ident else f"record at index {index}"


def _validate_record(record, index, qp_set) -> DatasetItem:
    where = _context(record, index)
    if not isinstance(record, dict):
        raise SchemaError(f"{where}: expected an object, got {type(record).__name__}")
    missing = [k for k in _FIELDS if k not in record]
    if missing:
        raise SchemaError(f"{where}: missing fields {missing}")
    unknown = [k for k in record if k not in _FIELDS]
    if unknown:
        raise SchemaError(f"{where}: unknown fields {unknown}")
    if not isinstance(record["id"], str) or not record["id"]:
        raise SchemaError(f"{where}: id must be a non-empty string")
    if not isinstance(record["path"], str) or not record["path"]:
        raise SchemaError(f"{where}: path must be a non-empty string")
    for key in ("width", "height", "frames", "qp"):
        v = record[key]
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise SchemaError(f"{where}: {key} must be a positive integer, got {v!r}")
    for key in ("fps", "bitrate_bps", "mos"):
        v = record[key]
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise SchemaError(f"{where}: {key} must be a number, got {v!r}")
    if record["fps"] <= 0:
        raise SchemaError(f"{where}: fps must be positive, got {record['fps']}")
    if record["bitrate_bps"] <= 0:
        raise SchemaError(f"{where}: bitrate_bps must be positive, got {record['bitrate_bps']}")
    if not (MOS_MIN <= record["mos"] <= MOS_MAX):
        raise SchemaError(
            f"{where}: mos must be in [{MOS_MIN}, {MOS_MAX}], got {record['mos']}"
        )
    if qp_set is not None and record["qp"] not in qp_set:
        raise SchemaError(
            f"{where}: qp {record['qp']} not in the allowed set {sorted(qp_set)}"
        )
    if not isinstance(record["preset"], str) or not record["preset"]:
        raise SchemaError(f"{where}: preset must be a non-empty string")
    return DatasetItem(
        id=record["id"],
        path=record["path"],
        width=record["width"],
        height=record["height"],
        frames=record["frames"],
        fps=float(record["fps"]),
        qp=record["qp"],
        preset=record["preset"],
        bitrate_bps=float(record["bitrate_bps"]),
        mos=float(record["mos"]),
    )


def load_manifest(path, qp_set=DEFAULT_QP_SET, strict: bool = True) -> list[DatasetItem]:
    """Read and validate a manifest file.

    ``qp_set`` restricts the allowed quantization parameters; pass None to
    accept any positive integer.  ``strict=False`` only relaxes the QP
    check, never the structural ones.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: manifest must be a JSON array of records")
    items = [_validate_record(rec, i, qp_set if strict else None) for i, rec in enumerate(doc)]
    ids = [it.id for it in items]
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise SchemaError(f"{path}: duplicate item ids {sorted(dupes)}")
    return items


def write_manifest(path, items: list[DatasetItem]) -> None:
    """Write items as a JSON array, keys in canonical order."""
    records = []
    for it in items:
        d = asdict(it)
        records.append({k: d[k] for k in _FIELDS})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")


def resolve_item_path(item: DatasetItem, manifest_path) -> str:
    """Item path interpreted relative to the manifest's directory."""
    if os.path.isabs(item.path):
        return item.path
    return os.path.join(os.path.dirname(os.path.abspath(manifest_path)), item.path)
