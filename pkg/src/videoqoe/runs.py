"""Reproducible pipeline runs driven by a JSON config.

Every command resolves its configuration the same way: built-in defaults,
then the config file, then flag overrides, each level replacing keys
one-for-one.  The fully resolved config is written next to the outputs so
a run can be repeated exactly from its artifacts alone.  All randomness
flows from the single ``seed`` key; train, eval, pretrain, ingest and
netsim write into ``<out_dir>/seed<seed>/`` while synth writes the dataset
itself into ``out_dir``.
"""
from __future__ import annotations

import copy
import csv
import json
import os

import numpy as np

from .aggregate import extract_feature_vector, majority_vote
from .errors import ConfigError, SchemaError
from .estimators import PatchCnnClassifier, SequenceFeatureClassifier
from .manifest import DatasetItem, load_manifest, resolve_item_path
from .metrics import evaluate
from .mos import DiscretizationSpec, discretize_mos, occupied_bins
from .netmodel import (
    ClipTransmission,
    get_preset,
    preset_rate_mismatch,
    throughput,
    transmission_delay,
    stall_frame_count,
)
from .network import ModelConfig, build_model
from .optim import ADAGRAD_EPSILON, OptimizerConfig
from .seeding import KEY_SPLIT, generator
from .serialize import load_weights_into, save_arrays, save_weights
from .synthetic import SynthConfig, synthesize_dataset
from .training import read_curves_csv
from .video import PatchSpec, VideoVolume, extract_patches, read_yuv_luma, sort_patches

NETSIM_COLUMNS = ("preset", "rate_bps", "delay_s", "stall_frames", "item", "rate_mismatch")
INGEST_COLUMNS = ("item", "width", "height", "frames", "fps", "qp", "preset", "mos", "label", "patches")

_MODEL_DEFAULTS = {
    "num_conv_layers": 2,
    "first_layer_filters": 16,
    "fc_sizes": [1024, 512],
}

_TRAIN_DEFAULTS = {
    "epochs": 50,
    "optimizer": "adagrad",
    "learning_rate": 1e-2,
    "adagrad_epsilon": ADAGRAD_EPSILON,
    "batch_size": 32,
    "split": {"kind": "patch_random", "fraction": 0.2, "held_out_ids": []},
}

_COMMON_DEFAULTS = {
    "seed": 0,
    "out_dir": "runs",
    "manifest": "",
    "patch_k": 16,
    "input_scale": 1.0 / 255.0,
    "video_format": "auto",
    "discretization": {"interval_size": 1.33},
}

DEFAULTS: dict[str, dict] = {
    "synth": {
        "seed": 0,
        "out_dir": "data",
        "synth": {
            "items_per_class": 3,
            "width": 64,
            "height": 64,
            "frames": 32,
            "frame_rate": 25.0,
            "num_classes": 3,
        },
    },
    "ingest": dict(copy.deepcopy(_COMMON_DEFAULTS)),
    "netsim": {
        "seed": 0,
        "out_dir": "runs",
        "manifest": "",
        "netsim": {"preset": ""},
    },
    "train": {
        **copy.deepcopy(_COMMON_DEFAULTS),
        "model": copy.deepcopy(_MODEL_DEFAULTS),
        "train": copy.deepcopy(_TRAIN_DEFAULTS),
    },
    "eval": {
        **copy.deepcopy(_COMMON_DEFAULTS),
        "model": copy.deepcopy(_MODEL_DEFAULTS),
        "eval": {"weights": ""},
    },
    "pretrain": {
        **copy.deepcopy(_COMMON_DEFAULTS),
        "pretrain": {
            "patches_per_video": 64,
            "optimizer": "sgd",
            "learning_rate": 1e-2,
            "feature_cap": 65536,
            "snapshot_model": {
                "num_conv_layers": 2,
                "first_layer_filters": 2,
                "fc_sizes": [32, 16],
            },
            "aggregator": {
                "num_conv_layers": 2,
                "first_layer_filters": 4,
                "fc_sizes": [64, 32],
            },
            "train": {
                "epochs": 50,
                "optimizer": "adagrad",
                "learning_rate": 1e-2,
                "adagrad_epsilon": ADAGRAD_EPSILON,
                "batch_size": 4,
                "split": {"kind": "item_random", "fraction": 0.25, "held_out_ids": []},
            },
        },
    },
    "report": {
        "seed": 0,
        "report": {"curves": ""},
    },
}

COMMANDS = tuple(DEFAULTS)


def _merge(base: dict, override, context: str) -> dict:
    """Recursive merge of ``override`` into ``base``, rejecting unknown keys."""
    if not isinstance(override, dict):
        raise SchemaError(f"config section {context or '<top>'} must be an object")
    out = dict(base)
    for key, value in override.items():
        where = f"{context}.{key}" if context else key
        if key not in base:
            raise SchemaError(f"unknown config key {where!r}")
        if isinstance(base[key], dict):
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = _check_leaf(base[key], value, where)
    return out


def _list_element_type(path: str):
    if path.endswith("fc_sizes"):
        return int
    if path.endswith("held_out_ids"):
        return str
    return None


def _check_leaf(default, value, path: str):
    if isinstance(default, list):
        elem = _list_element_type(path)
        if not isinstance(value, list):
            raise SchemaError(f"config key {path!r} must be a list")
        try:
            return [elem(v) for v in value]
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"config key {path!r}: {exc}") from exc
    if isinstance(default, bool) or isinstance(value, bool):
        raise SchemaError(f"config key {path!r} has no boolean form")
    if isinstance(default, str):
        if not isinstance(value, str):
            raise SchemaError(f"config key {path!r} must be a string, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise SchemaError(f"config key {path!r} must be an integer, got {value!r}")
    if isinstance(default, float):
        if isinstance(value, (int, float)):
            return float(value)
        raise SchemaError(f"config key {path!r} must be a number, got {value!r}")
    raise SchemaError(f"config key {path!r} has unsupported type {type(value).__name__}")


def _coerce_flag(default, raw: str, path: str):
    """Parse one ``--section.key value`` override against its default's type."""
    if isinstance(default, list):
        elem = _list_element_type(path) or str
        parts = [p for p in raw.split(",") if p != ""]
        try:
            return [elem(p) for p in parts]
        except ValueError as exc:
            raise SchemaError(f"flag override {path!r}: {exc}") from exc
    if isinstance(default, str):
        return raw
    try:
        if isinstance(default, int) and not isinstance(default, bool):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError as exc:
        raise SchemaError(f"flag override {path!r}: {exc}") from exc
    raise SchemaError(f"flag override {path!r} has unsupported type")


def config_leaves(command: str, tree=None, prefix: str = ""):
    """(dotted path, default value) pairs for every leaf of a command config."""
    tree = DEFAULTS[command] if tree is None else tree
    for key, value in tree.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            yield from config_leaves(command, value, path)
        else:
            yield path, value


def resolve_config(command: str, config_path=None, overrides=None) -> dict:
    """Defaults <- config file <- flag overrides, validated against the schema."""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")
    resolved = copy.deepcopy(DEFAULTS[command])
    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{config_path}: invalid JSON: {exc}") from exc
        resolved = _merge(resolved, file_cfg, "")
    for path, raw in (overrides or {}).items():
        if raw is None:
            continue
        node = resolved
        parts = path.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise SchemaError(f"unknown config key {path!r}")
            node = node[part]
        leaf = parts[-1]
        if leaf not in node or isinstance(node[leaf], dict):
            raise SchemaError(f"unknown config key {path!r}")
        node[leaf] = _coerce_flag(node[leaf], raw, path)
    return resolved


def run_dir(config: dict) -> str:
    """Seed-named artifact directory of a run; created on demand."""
    return os.path.join(config["out_dir"], f"seed{config['seed']}")


def _write_resolved(config: dict, directory: str, command: str) -> str:
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"resolved-{command}-config.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _require_manifest(config: dict) -> str:
    path = config.get("manifest", "")
    if not path:
        raise ConfigError("a manifest path is required (config key 'manifest')")
    return path


def _item_format(item: DatasetItem, config: dict) -> str:
    fmt = config.get("video_format", "auto")
    if fmt != "auto":
        return fmt
    ext = os.path.splitext(item.path)[1].lower()
    if ext in (".yraw", ".y", ".luma"):
        return "y_only"
    if ext in (".yuv", ".raw"):
        return "planar420"
    raise ConfigError(
        f"cannot infer the raw format of {item.path!r}; set config key 'video_format'"
    )


def _load_volume(item: DatasetItem, manifest_path: str, config: dict) -> VideoVolume:
    return read_yuv_luma(
        resolve_item_path(item, manifest_path),
        item.width,
        item.height,
        item.frames,
        fmt=_item_format(item, config),
        frame_rate=item.fps,
    )


def _labeled_items(config: dict):
    """Manifest items with their discretized labels, in manifest order."""
    manifest_path = _require_manifest(config)
    spec = DiscretizationSpec(interval_size=float(config["discretization"]["interval_size"]))
    items = load_manifest(manifest_path)
    labels = [discretize_mos(item.mos, spec) for item in items]
    return manifest_path, spec, items, labels


def _model_config(section: dict, num_classes: int) -> ModelConfig:
    return ModelConfig(
        num_conv_layers=int(section["num_conv_layers"]),
        first_layer_filters=int(section["first_layer_filters"]),
        fc_sizes=tuple(int(v) for v in section["fc_sizes"]),
        num_classes=num_classes,
    )


def _split_item_ids(items, split: dict, seed: int, random_kind: str):
    """(train ids, held-out ids) under the configured split section."""
    ids = [item.id for item in items]
    kind = split["kind"]
    if kind == "by_item":
        held = list(split["held_out_ids"])
        if not held:
            raise ConfigError("by_item split needs at least one id in held_out_ids")
        unknown = sorted(set(held) - set(ids))
        if unknown:
            raise ConfigError(f"held_out_ids not in the manifest: {unknown}")
        train = [i for i in ids if i not in set(held)]
        if not train:
            raise ConfigError("by_item split holds out every item")
        return train, held
    if kind == random_kind:
        fraction = float(split["fraction"])
        if not (0 < fraction < 1):
            raise ConfigError(f"split fraction must be in (0, 1), got {fraction}")
        n = len(ids)
        n_val = max(1, int(round(n * fraction)))
        if n_val >= n:
            raise ConfigError(f"split fraction {fraction} leaves no training items for {n}")
        order = generator(seed, KEY_SPLIT).permutation(n)
        held = {ids[i] for i in order[:n_val]}
        return [i for i in ids if i not in held], [i for i in ids if i in held]
    raise ConfigError(f"unknown split kind {kind!r}; expected by_item or {random_kind}")


def cmd_synth(config: dict) -> dict:
    section = config["synth"]
    synth = SynthConfig(
        items_per_class=int(section["items_per_class"]),
        width=int(section["width"]),
        height=int(section["height"]),
        frames=int(section["frames"]),
        frame_rate=float(section["frame_rate"]),
        num_classes=int(section["num_classes"]),
        seed=int(config["seed"]),
    )
    out_dir = config["out_dir"]
    items = synthesize_dataset(synth, out_dir)
    _write_resolved(config, out_dir, "synth")
    steps = "/".join(str(s) for s in synth.class_steps[: synth.num_classes])
    return {
        "out_dir": out_dir,
        "manifest": os.path.join(out_dir, "manifest.json"),
        "items": len(items),
        "classes": synth.num_classes,
        "quantization_steps": steps,
    }


def cmd_ingest(config: dict) -> dict:
    manifest_path, spec, items, labels = _labeled_items(config)
    patch_spec = PatchSpec(k=int(config["patch_k"]))
    directory = run_dir(config)
    os.makedirs(directory, exist_ok=True)
    rows = []
    total_patches = 0
    for item, label in zip(items, labels):
        volume = _load_volume(item, manifest_path, config)
        count = patch_spec.count(volume)
        total_patches += count
        rows.append(
            (item.id, item.width, item.height, item.frames, repr(item.fps),
             item.qp, item.preset, repr(item.mos), label, count)
        )
    csv_path = os.path.join(directory, "ingest.csv")
    with open(csv_path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(INGEST_COLUMNS)
        writer.writerows(rows)
    _write_resolved(config, directory, "ingest")
    return {
        "csv": csv_path,
        "items": len(items),
        "patches": total_patches,
        "bins": spec.num_bins,
        "occupied_bins": occupied_bins([item.mos for item in items], spec),
    }


def cmd_netsim(config: dict) -> dict:
    manifest_path = _require_manifest(config)
    items = load_manifest(manifest_path)
    override = config["netsim"]["preset"]
    directory = run_dir(config)
    os.makedirs(directory, exist_ok=True)
    csv_path = os.path.join(directory, "netsim.csv")
    mismatches = 0
    with open(csv_path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(NETSIM_COLUMNS)
        for item in items:
            preset = get_preset(override or item.preset)
            rate = throughput(preset.condition)
            clip = ClipTransmission(bitrate_bps=item.bitrate_bps, duration_s=item.duration_s)
            delay = transmission_delay(clip, rate)
            stalls = stall_frame_count(delay, item.fps)
            mismatch = preset_rate_mismatch(preset)
            mismatches += int(mismatch)
            writer.writerow(
                (preset.name, repr(rate), repr(delay), stalls, item.id, int(mismatch))
            )
    _write_resolved(config, directory, "netsim")
    return {"csv": csv_path, "items": len(items), "rate_mismatches": mismatches}


def _load_sorted_patches(config: dict):
    """All patches of the manifest in canonical order, plus per-item labels."""
    manifest_path, spec, items, labels = _labeled_items(config)
    patch_spec = PatchSpec(k=int(config["patch_k"]))
    patches = []
    for item, label in zip(items, labels):
        volume = _load_volume(item, manifest_path, config)
        patches.extend(extract_patches(volume, patch_spec, label, source_item=item.id))
    return spec, items, labels, sort_patches(patches)


def _stack_patches(patches):
    X = np.stack([p.cube for p in patches])
    y = np.array([p.label for p in patches], dtype=np.int64)
    return X, y


def cmd_train(config: dict) -> dict:
    spec, items, _, patches = _load_sorted_patches(config)
    section = config["train"]
    seed = int(config["seed"])
    train_ids, held_ids = None, None
    if section["split"]["kind"] == "by_item":
        train_ids, held_ids = _split_item_ids(items, section["split"], seed, "patch_random")
        held = set(held_ids)
        Xt, yt = _stack_patches([p for p in patches if p.source_item not in held])
        validation = _stack_patches([p for p in patches if p.source_item in held])
    else:
        Xt, yt = _stack_patches(patches)
        validation = None

    clf = PatchCnnClassifier(
        num_conv_layers=int(config["model"]["num_conv_layers"]),
        first_layer_filters=int(config["model"]["first_layer_filters"]),
        fc_sizes=tuple(int(v) for v in config["model"]["fc_sizes"]),
        n_classes=spec.num_bins,
        optimizer=section["optimizer"],
        learning_rate=float(section["learning_rate"]),
        adagrad_epsilon=float(section["adagrad_epsilon"]),
        epochs=int(section["epochs"]),
        batch_size=int(section["batch_size"]),
        validation_fraction=float(section["split"]["fraction"]),
        input_scale=float(config["input_scale"]),
        seed=seed,
    )
    clf.fit(Xt, yt, validation_data=validation)

    directory = run_dir(config)
    os.makedirs(directory, exist_ok=True)
    weights_path = os.path.join(directory, "weights.bin")
    curves_path = os.path.join(directory, "curves.csv")
    save_weights(weights_path, clf.network_)
    clf.history_.write_csv(curves_path)
    _write_resolved(config, directory, "train")
    return {
        "weights": weights_path,
        "curves": curves_path,
        "patches": len(patches),
        "params": clf.n_params_,
        "train_acc": clf.history_.train_acc[-1],
        "val_acc": clf.history_.val_acc[-1],
        "held_out_items": held_ids or [],
    }


def cmd_eval(config: dict) -> dict:
    weights_path = config["eval"]["weights"]
    if not weights_path:
        raise ConfigError("a weights path is required (config key 'eval.weights')")
    spec, items, labels, patches = _load_sorted_patches(config)
    net = build_model(_model_config(config["model"], spec.num_bins), int(config["patch_k"]))
    load_weights_into(weights_path, net)

    scale = float(config["input_scale"])
    truths = np.array([p.label for p in patches], dtype=np.int64)
    preds = np.zeros(len(patches), dtype=np.int64)
    by_item: dict[str, list[int]] = {item.id: [] for item in items}
    for i, patch in enumerate(patches):
        probs, _ = net.forward(patch.cube[None] * scale)
        preds[i] = int(np.argmax(probs))
        by_item[patch.source_item].append(int(preds[i]))

    item_truths = np.array(labels, dtype=np.int64)
    item_preds = np.array([majority_vote(by_item[item.id]) for item in items], dtype=np.int64)
    sequence_accuracy = float(np.mean(item_preds == item_truths))

    report = evaluate(truths, preds, spec.num_bins)
    report.extras["sequence_accuracy"] = sequence_accuracy

    directory = run_dir(config)
    os.makedirs(directory, exist_ok=True)
    report_path = os.path.join(directory, "report.csv")
    report.write_csv(report_path)
    predictions_path = os.path.join(directory, "predictions.csv")
    with open(predictions_path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("item", "label", "majority_prediction"))
        for item, truth, pred in zip(items, item_truths, item_preds):
            writer.writerow((item.id, int(truth), int(pred)))
    _write_resolved(config, directory, "eval")
    return {
        "report": report_path,
        "predictions": predictions_path,
        "patch_accuracy": report.accuracy,
        "sequence_accuracy": sequence_accuracy,
        "items": len(items),
    }


def cmd_pretrain(config: dict) -> dict:
    manifest_path, spec, items, labels = _labeled_items(config)
    section = config["pretrain"]
    seed = int(config["seed"])
    snapshot_config = _model_config(section["snapshot_model"], spec.num_bins)
    snapshot_optimizer = OptimizerConfig(
        kind=section["optimizer"], learning_rate=float(section["learning_rate"])
    )

    features = []
    for item in items:
        volume = _load_volume(item, manifest_path, config)
        features.append(
            extract_feature_vector(
                volume,
                snapshot_config,
                int(config["patch_k"]),
                patches_per_video=int(section["patches_per_video"]),
                seed=seed,
                optimizer=snapshot_optimizer,
                input_scale=float(config["input_scale"]),
            )
        )
    X = np.stack(features)
    y = np.array(labels, dtype=np.int64)

    directory = run_dir(config)
    os.makedirs(directory, exist_ok=True)
    features_path = os.path.join(directory, "features.bin")
    save_arrays(features_path, features, [item.id for item in items])

    train_ids, held_ids = _split_item_ids(items, section["train"]["split"], seed, "item_random")
    index = {item.id: i for i, item in enumerate(items)}
    t_idx = np.array([index[i] for i in train_ids])
    v_idx = np.array([index[i] for i in held_ids])

    tsec = section["train"]
    clf = SequenceFeatureClassifier(
        num_conv_layers=int(section["aggregator"]["num_conv_layers"]),
        first_layer_filters=int(section["aggregator"]["first_layer_filters"]),
        fc_sizes=tuple(int(v) for v in section["aggregator"]["fc_sizes"]),
        n_classes=spec.num_bins,
        optimizer=tsec["optimizer"],
        learning_rate=float(tsec["learning_rate"]),
        adagrad_epsilon=float(tsec["adagrad_epsilon"]),
        epochs=int(tsec["epochs"]),
        batch_size=int(tsec["batch_size"]),
        feature_cap=int(section["feature_cap"]),
        seed=seed,
    )
    clf.fit(X[t_idx], y[t_idx], validation_data=(X[v_idx], y[v_idx]))

    weights_path = os.path.join(directory, "aggregator-weights.bin")
    curves_path = os.path.join(directory, "aggregator-curves.csv")
    save_weights(weights_path, clf.network_)
    clf.history_.write_csv(curves_path)

    preds = clf.predict(X[v_idx])
    report = evaluate(y[v_idx], preds, spec.num_bins)
    report.extras["sequence_accuracy"] = report.accuracy
    report_path = os.path.join(directory, "sequence-report.csv")
    report.write_csv(report_path)
    _write_resolved(config, directory, "pretrain")
    return {
        "features": features_path,
        "weights": weights_path,
        "curves": curves_path,
        "report": report_path,
        "feature_length": int(X.shape[1]),
        "held_out_items": held_ids,
        "sequence_accuracy": report.accuracy,
    }


def cmd_report(config: dict) -> dict:
    curves_path = config["report"]["curves"]
    if not curves_path:
        raise ConfigError("a curves CSV path is required (config key 'report.curves')")
    curves = read_curves_csv(curves_path)
    directory = os.path.dirname(os.path.abspath(curves_path))
    accuracy_path = os.path.join(directory, "accuracy.dat")
    loss_path = os.path.join(directory, "loss.dat")
    with open(accuracy_path, "w", encoding="ascii") as fh:
        fh.write("# epoch train_acc val_acc\n")
        for row in curves.rows():
            fh.write(f"{row[0]} {row[1]!r} {row[2]!r}\n")
    with open(loss_path, "w", encoding="ascii") as fh:
        fh.write("# epoch train_loss val_loss\n")
        for row in curves.rows():
            fh.write(f"{row[0]} {row[3]!r} {row[4]!r}\n")
    _write_resolved(config, directory, "report")
    return {"accuracy": accuracy_path, "loss": loss_path, "epochs": len(curves.train_acc)}


COMMAND_FUNCTIONS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "netsim": cmd_netsim,
    "train": cmd_train,
    "eval": cmd_eval,
    "pretrain": cmd_pretrain,
    "report": cmd_report,
}
