"""Command-line entry point.

One command per process.  Every leaf of a command's default config is
exposed as a ``--section.key`` flag overriding exactly that key; ``--config``
names a JSON file merged between the defaults and the flags.  ``--threads``
caps BLAS parallelism (default 1 so repeated runs are bit-identical).
"""
from __future__ import annotations

import argparse
import sys

from threadpoolctl import threadpool_limits

from .errors import ConfigError, VideoQoeError, exit_code_for
from .runs import COMMAND_FUNCTIONS, COMMANDS, config_leaves, resolve_config

_SUMMARY_LINES = {
    "synth": ("manifest", "items", "classes", "quantization_steps"),
    "ingest": ("csv", "items", "patches", "bins", "occupied_bins"),
    "netsim": ("csv", "items", "rate_mismatches"),
    "train": ("weights", "curves", "patches", "params", "train_acc", "val_acc"),
    "eval": ("report", "predictions", "patch_accuracy", "sequence_accuracy"),
    "pretrain": ("features", "weights", "report", "feature_length", "sequence_accuracy"),
    "report": ("accuracy", "loss", "epochs"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="videoqoe",
        description="No-reference video quality pipeline: synthesize, train, evaluate.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"run the {command} step")
        sub.add_argument("--config", default=None, help="JSON config file")
        sub.add_argument(
            "--threads",
            type=int,
            default=1,
            help="BLAS thread cap (default 1 for bit-reproducible output)",
        )
        for path, default in config_leaves(command):
            sub.add_argument(
                f"--{path}",
                dest=path,
                default=None,
                metavar="VALUE",
                help=f"override config key {path} (default {default!r})",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    command = args.command
    overrides = {
        path: getattr(args, path)
        for path, _ in config_leaves(command)
        if getattr(args, path) is not None
    }
    try:
        config = resolve_config(command, args.config, overrides)
        threads = int(args.threads)
        if threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {threads}")
        with threadpool_limits(limits=threads):
            summary = COMMAND_FUNCTIONS[command](config)
    except (VideoQoeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    for key in _SUMMARY_LINES[command]:
        print(f"{key}: {summary[key]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
