"""CLI surface: config resolution, artifacts, determinism, exit codes."""
import csv
import json
import os

import numpy as np
import pytest

from videoqoe.cli import main
from videoqoe.errors import SchemaError
from videoqoe.network import ModelConfig, build_model
from videoqoe.runs import resolve_config
from videoqoe.serialize import load_weights

SMALL_SYNTH = [
    "--synth.width", "32", "--synth.height", "32", "--synth.frames", "16",
    "--synth.items_per_class", "2",
]
SMALL_MODEL = ["--model.first_layer_filters", "2", "--model.fc_sizes", "16,8"]
HELD_OUT = "synth-c0-01,synth-c1-01,synth-c2-01"


def _synth(tmp_path, name="data", extra=()):
    out = tmp_path / name
    assert main(["synth", "--out_dir", str(out), *SMALL_SYNTH, *extra]) == 0
    return out / "manifest.json"


def _train(tmp_path, manifest, name="train", epochs="2", extra=()):
    out = tmp_path / name
    code = main([
        "train", "--manifest", str(manifest), "--out_dir", str(out),
        *SMALL_MODEL, "--train.epochs", epochs, "--train.batch_size", "4",
        "--train.split.kind", "by_item", "--train.split.held_out_ids", HELD_OUT,
        *extra,
    ])
    assert code == 0
    return out / "seed0"


def test_resolve_config_precedence(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"seed": 5, "train": {"epochs": 7}}))
    cfg = resolve_config("train", str(cfg_file), {"train.epochs": "9"})
    assert cfg["seed"] == 5  # file beats default
    assert cfg["train"]["epochs"] == 9  # flag beats file
    assert cfg["train"]["batch_size"] == 32  # default survives


def test_resolve_config_rejects_unknown_keys(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SchemaError):
        resolve_config("train", str(cfg_file))
    with pytest.raises(SchemaError):
        resolve_config("train", None, {"no.such.key": "1"})


def test_resolve_config_rejects_bad_json(tmp_path):
    cfg_file = tmp_path / "run.json"
    cfg_file.write_text("{not json")
    with pytest.raises(SchemaError):
        resolve_config("train", str(cfg_file))


def test_synth_writes_a_valid_dataset(tmp_path, capsys):
    manifest = _synth(tmp_path)
    assert manifest.exists()
    records = json.loads(manifest.read_text())
    assert len(records) == 6
    assert (tmp_path / "data" / "resolved-synth-config.json").exists()
    out = capsys.readouterr().out
    assert "items: 6" in out


def test_synth_same_seed_is_byte_identical(tmp_path):
    a = _synth(tmp_path, "a")
    b = _synth(tmp_path, "b")
    for name in sorted(os.listdir(a.parent)):
        if name.endswith(".yraw") or name == "manifest.json":
            assert (a.parent / name).read_bytes() == (b.parent / name).read_bytes()


def test_ingest_reports_labels_and_patch_counts(tmp_path):
    manifest = _synth(tmp_path)
    out = tmp_path / "ingest"
    assert main(["ingest", "--manifest", str(manifest), "--out_dir", str(out)]) == 0
    with open(out / "seed0" / "ingest.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    assert [r["label"] for r in rows] == ["0", "0", "1", "1", "2", "2"]
    assert all(r["patches"] == "4" for r in rows)  # 32x32x16 at k=16


def test_netsim_rates_and_mismatch_flags(tmp_path):
    manifest = _synth(tmp_path)
    out = tmp_path / "netsim"
    assert main(["netsim", "--manifest", str(manifest), "--out_dir", str(out)]) == 0
    with open(out / "seed0" / "netsim.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    by_preset = {r["preset"]: r for r in rows}
    assert abs(float(by_preset["cond1"]["rate_bps"]) - 1.70e6) / 1.70e6 < 0.01
    assert abs(float(by_preset["cond4"]["rate_bps"]) - 92.60e6) / 92.60e6 < 0.01
    assert {p: r["rate_mismatch"] for p, r in by_preset.items()} == {
        "cond1": "0", "cond2": "1", "cond3": "1", "cond4": "0",
    }


def test_netsim_preset_override_applies_to_all_rows(tmp_path):
    manifest = _synth(tmp_path)
    out = tmp_path / "netsim"
    code = main([
        "netsim", "--manifest", str(manifest), "--out_dir", str(out),
        "--netsim.preset", "cond4",
    ])
    assert code == 0
    with open(out / "seed0" / "netsim.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["preset"] for r in rows} == {"cond4"}


def test_train_writes_all_artifacts(tmp_path):
    manifest = _synth(tmp_path)
    rundir = _train(tmp_path, manifest)
    assert (rundir / "weights.bin").exists()
    assert (rundir / "weights.bin.layers.txt").exists()
    assert (rundir / "curves.csv").exists()
    resolved = json.loads((rundir / "resolved-train-config.json").read_text())
    assert resolved["train"]["epochs"] == 2
    assert resolved["train"]["split"]["held_out_ids"] == HELD_OUT.split(",")


def test_train_is_byte_identical_across_runs(tmp_path):
    manifest = _synth(tmp_path)
    a = _train(tmp_path, manifest, "a")
    b = _train(tmp_path, manifest, "b")
    assert (a / "weights.bin").read_bytes() == (b / "weights.bin").read_bytes()
    assert (a / "curves.csv").read_bytes() == (b / "curves.csv").read_bytes()


def test_train_seed_changes_the_weights(tmp_path):
    manifest = _synth(tmp_path)
    a = _train(tmp_path, manifest, "a")
    out = tmp_path / "c"
    code = main([
        "train", "--manifest", str(manifest), "--out_dir", str(out), "--seed", "1",
        *SMALL_MODEL, "--train.epochs", "2", "--train.batch_size", "4",
        "--train.split.kind", "by_item", "--train.split.held_out_ids", HELD_OUT,
    ])
    assert code == 0
    assert (a / "weights.bin").read_bytes() != (out / "seed1" / "weights.bin").read_bytes()


def test_eval_consumes_train_output(tmp_path, capsys):
    manifest = _synth(tmp_path)
    rundir = _train(tmp_path, manifest)
    out = tmp_path / "eval"
    code = main([
        "eval", "--manifest", str(manifest), "--out_dir", str(out),
        *SMALL_MODEL, "--eval.weights", str(rundir / "weights.bin"),
    ])
    assert code == 0
    with open(out / "seed0" / "report.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert ["section", "a", "b", "value"] == rows[0]
    keys = {(r[0], r[2]) for r in rows[1:]}
    assert ("overall", "sequence_accuracy") in keys
    assert ("class_rate", "tpr") in keys
    with open(out / "seed0" / "predictions.csv", newline="") as fh:
        preds = list(csv.DictReader(fh))
    assert len(preds) == 6
    assert "sequence_accuracy:" in capsys.readouterr().out


def test_eval_wrong_architecture_exits_dimension_code(tmp_path):
    manifest = _synth(tmp_path)
    rundir = _train(tmp_path, manifest)
    code = main([
        "eval", "--manifest", str(manifest), "--out_dir", str(tmp_path / "eval"),
        "--model.first_layer_filters", "4", "--model.fc_sizes", "16,8",
        "--eval.weights", str(rundir / "weights.bin"),
    ])
    assert code == 4


def test_pretrain_feature_file_length(tmp_path):
    manifest = _synth(tmp_path)
    out = tmp_path / "pre"
    code = main([
        "pretrain", "--manifest", str(manifest), "--out_dir", str(out),
        "--pretrain.patches_per_video", "4",
        "--pretrain.snapshot_model.first_layer_filters", "1",
        "--pretrain.snapshot_model.fc_sizes", "8,6",
        "--pretrain.aggregator.first_layer_filters", "2",
        "--pretrain.aggregator.fc_sizes", "16,8",
        "--pretrain.feature_cap", "256",
        "--pretrain.train.epochs", "2",
        "--pretrain.train.split.kind", "by_item",
        "--pretrain.train.split.held_out_ids", HELD_OUT,
    ])
    assert code == 0
    vectors = load_weights(out / "seed0" / "features.bin")
    assert len(vectors) == 6
    snapshot = build_model(
        ModelConfig(num_conv_layers=2, first_layer_filters=1, fc_sizes=(8, 6), num_classes=3),
        16,
    )
    assert all(v.shape == (4 * snapshot.num_params,) for v in vectors)
    assert (out / "seed0" / "aggregator-weights.bin").exists()
    assert (out / "seed0" / "sequence-report.csv").exists()
    assert (out / "seed0" / "aggregator-curves.csv").exists()


def test_report_emits_gnuplot_data(tmp_path):
    manifest = _synth(tmp_path)
    rundir = _train(tmp_path, manifest)
    code = main(["report", "--report.curves", str(rundir / "curves.csv")])
    assert code == 0
    acc = (rundir / "accuracy.dat").read_text().splitlines()
    loss = (rundir / "loss.dat").read_text().splitlines()
    assert acc[0] == "# epoch train_acc val_acc"
    assert loss[0] == "# epoch train_loss val_loss"
    assert len(acc) == len(loss) == 3  # header + 2 epochs
    epoch, train_acc, val_acc = acc[1].split()
    assert epoch == "1"
    float(train_acc), float(val_acc)  # parseable numbers


def test_exit_codes_for_common_failures(tmp_path, capsys):
    assert main(["train", "--manifest", str(tmp_path / "missing.json")]) == 2
    manifest = _synth(tmp_path)
    assert main([
        "netsim", "--manifest", str(manifest), "--out_dir", str(tmp_path / "n"),
        "--netsim.preset", "nosuch",
    ]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"bogus": 1}')
    assert main(["train", "--config", str(bad)]) == 1
    assert main([
        "train", "--manifest", str(manifest), "--threads", "0",
    ]) == 1
    # truncated video file: format error -> I/O exit code
    records = json.loads(manifest.read_text())
    first = manifest.parent / records[0]["path"]
    first.write_bytes(first.read_bytes()[:-1])
    assert main([
        "ingest", "--manifest", str(manifest), "--out_dir", str(tmp_path / "i"),
    ]) == 2
    capsys.readouterr()  # swallow the error prints
