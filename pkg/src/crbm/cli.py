"""Command-line entry point.

One command per process: train, summarize, baseline, visualize. Outputs go
to --out; stdout carries only the run manifest (command, config snapshot,
FNV-1a digests of inputs and outputs, wall-clock duration), so reruns can
be compared by digest. Diagnostics go to stderr.

Exit codes: 0 success, 1 usage, 2 malformed input files, 3 numeric or
capacity failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .baselines import kmeans_keyframes, uniform_summary
from .coreg import TrainConfig, load_pair, read_config, save_pair, train_pair
from .errors import (
    AlignmentError,
    BatchError,
    CapacityError,
    CrbmError,
    DataError,
    DegenerateWeightError,
    DimensionError,
    FormatError,
    LabelError,
    NumericError,
    UsageError,
    WriteError,
)
from .features import (
    FeatureMatrix,
    normalize,
    read_feature_labels,
    read_features,
    read_labels_file,
)
from .summary import broadcast_alpha, select_keyframes, frame_descriptor, write_summary
from .unitviz import write_unit_reports

_USAGE_EXIT = 1
_FORMAT_EXIT = 2
_NUMERIC_EXIT = 3

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a, dependency-free and stable across platforms."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def digest_file(path) -> str:
    try:
        with open(path, "rb") as fh:
            return f"{fnv1a_64(fh.read()):016x}"
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


class RunManifest:
    """Reproducibility record printed to stdout after every command."""

    def __init__(self, command: str):
        self.command = command
        self.config: dict[str, object] = {}
        self.inputs: list[tuple[str, str]] = []
        self.outputs: list[tuple[str, str]] = []
        self._t0 = time.monotonic()

    def add_input(self, path) -> None:
        self.inputs.append((str(path), digest_file(path)))

    def add_output(self, path) -> None:
        self.outputs.append((str(path), digest_file(path)))

    def render(self, fmt: str) -> str:
        duration = time.monotonic() - self._t0
        if fmt == "json":
            return json.dumps(
                {
                    "command": self.command,
                    "config": self.config,
                    "inputs": dict(self.inputs),
                    "outputs": dict(self.outputs),
                    "duration_s": round(duration, 3),
                },
                indent=2,
            )
        lines = [f"command={self.command}"]
        lines += [f"config.{k}={v}" for k, v in self.config.items()]
        lines += [f"input.{p}={d}" for p, d in self.inputs]
        lines += [f"output.{p}={d}" for p, d in self.outputs]
        lines.append(f"duration_s={duration:.3f}")
        return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures through UsageError
        raise UsageError(message)


def _thread_count() -> int:
    raw = os.environ.get("CRBM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"CRBM_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise UsageError("CRBM_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _load_normalized(path, expect_modality: str) -> FeatureMatrix:
    m = read_features(path)
    if m.modality != expect_modality:
        raise DataError(f"{path}: expected {expect_modality} features, found {m.modality}")
    return normalize(m, "minmax_per_dim")


def _build_config(args) -> TrainConfig:
    cfg = read_config(args.config) if args.config else TrainConfig()
    updates = {}
    if args.k is not None:
        updates["k_units"] = args.k
    if args.seed is not None:
        updates["seed"] = args.seed
    if not updates:
        return cfg
    fields = {key: getattr(cfg, key) for key in (
        "k_units", "lambda_subject", "lambda_scene", "sparsity_target",
        "learning_rate", "cd_steps", "minibatch_size", "epochs", "seed",
    )}
    fields.update(updates)
    try:
        return TrainConfig(**fields)
    except ValueError as exc:
        raise UsageError(str(exc))


def _config_snapshot(cfg: TrainConfig) -> dict[str, object]:
    snap: dict[str, object] = {
        "k_units": cfg.k_units,
        "lambda_subject": cfg.lambda_subject,
        "lambda_scene": cfg.lambda_scene,
        "sparsity_target": cfg.resolved_sparsity_target,
        "learning_rate": cfg.learning_rate,
        "cd_steps": cfg.cd_steps,
        "minibatch_size": cfg.minibatch_size,
        "epochs": cfg.epochs,
        "seed": cfg.seed,
    }
    return snap


def _cmd_train(args) -> RunManifest:
    manifest = RunManifest("train")
    cfg = _build_config(args)
    manifest.config = _config_snapshot(cfg)
    manifest.add_input(args.subject)
    manifest.add_input(args.scene)
    if args.config:
        manifest.add_input(args.config)
    x_subject = _load_normalized(args.subject, "subject")
    x_scene = _load_normalized(args.scene, "scene")
    model = train_pair(x_subject, x_scene, cfg)
    save_pair(model, args.out)
    manifest.add_output(args.out)
    return manifest


def _parse_alpha(raw: str, k: int):
    parts = raw.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"--alpha must be a number or comma-separated list, got {raw!r}")
    if len(values) == 1:
        alpha = values[0]
    elif len(values) == k:
        alpha = values
    else:
        raise UsageError(f"--alpha has {len(values)} entries but the model has K={k} units")
    try:
        return broadcast_alpha(alpha, k)
    except (DataError, DimensionError) as exc:
        raise UsageError(str(exc))


def _cmd_summarize(args) -> RunManifest:
    manifest = RunManifest("summarize")
    manifest.add_input(args.checkpoint)
    manifest.add_input(args.subject)
    manifest.add_input(args.scene)
    model = load_pair(args.checkpoint)
    alpha = _parse_alpha(args.alpha, model.k_units)
    manifest.config = {
        "alpha": ",".join(f"{a:g}" for a in alpha),
        "distinct": args.distinct,
        "k_units": model.k_units,
    }
    x_subject = _load_normalized(args.subject, "subject")
    x_scene = _load_normalized(args.scene, "scene")
    scores = frame_descriptor(model, x_subject, x_scene, alpha)
    summary = select_keyframes(scores, x_subject.fps, distinct=args.distinct, alpha=alpha)
    write_summary(summary, args.out, args.format)
    manifest.add_output(args.out)
    return manifest


def _cmd_baseline(args) -> RunManifest:
    manifest = RunManifest("baseline")
    manifest.config = {"scheme": args.scheme, "k": args.k}
    if args.scheme == "uniform":
        source = args.subject or args.scene or args.pixels
        if source is None:
            raise UsageError("uniform baseline needs --subject, --scene or --pixels for the duration")
        manifest.add_input(source)
        m = read_features(source)
        summary = uniform_summary(m.frames / m.fps, args.k, m.fps)
    elif args.scheme == "kmeans":
        if args.pixels is None:
            raise UsageError("k-means baseline needs --pixels")
        manifest.add_input(args.pixels)
        manifest.config["runs"] = args.runs
        pixels = read_features(args.pixels)
        summary = kmeans_keyframes(pixels, args.k, runs=args.runs, threads=_thread_count())
    else:
        raise UsageError(f"unknown baseline scheme {args.scheme!r}")
    write_summary(summary, args.out, args.format)
    manifest.add_output(args.out)
    return manifest


def _cmd_visualize(args) -> RunManifest:
    manifest = RunManifest("visualize")
    manifest.add_input(args.checkpoint)
    model = load_pair(args.checkpoint)
    features = {}
    labels = {}
    for modality, path, labels_path in (
        ("subject", args.subject, args.labels_subject),
        ("scene", args.scene, args.labels_scene),
    ):
        if path is None:
            continue
        manifest.add_input(path)
        features[modality] = _load_normalized(path, modality)
        if labels_path:
            manifest.add_input(labels_path)
            labels[modality] = read_labels_file(labels_path, modality)
        else:
            embedded = read_feature_labels(path)
            if embedded is not None:
                labels[modality] = embedded
    if not features:
        raise UsageError("visualize needs --subject and/or --scene features")
    pixels = None
    if args.pixels:
        manifest.add_input(args.pixels)
        pixels = read_features(args.pixels)
    manifest.config = {"k_units": model.k_units, "top": args.top}
    written = write_unit_reports(model, args.out, features, labels, pixels, n=args.top)
    for path in written:
        manifest.add_output(path)
    return manifest


def build_parser() -> _Parser:
    parser = _Parser(prog="crbm", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"crbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a co-regularized RBM pair")
    p_train.add_argument("--subject", required=True, help="subject CRBF feature file")
    p_train.add_argument("--scene", required=True, help="scene CRBF feature file")
    p_train.add_argument("--config", help="key=value training config file")
    p_train.add_argument("--k", type=int, help="override k_units from the config")
    p_train.add_argument("--seed", type=int, help="override seed from the config")
    p_train.add_argument("--out", required=True, help="output PAIR checkpoint path")
    p_train.add_argument("--format", choices=("tsv", "json"), default="tsv")

    p_sum = sub.add_parser("summarize", help="select keyframes from a checkpoint")
    p_sum.add_argument("checkpoint", help="PAIR checkpoint from `crbm train`")
    p_sum.add_argument("--subject", required=True)
    p_sum.add_argument("--scene", required=True)
    p_sum.add_argument("--alpha", default="0.5", help="scalar or comma-separated K-vector in [0,1]")
    p_sum.add_argument("--distinct", action=argparse.BooleanOptionalAction, default=True,
                       help="force pairwise-distinct keyframes (default on)")
    p_sum.add_argument("--out", required=True, help="summary manifest path")
    p_sum.add_argument("--format", choices=("tsv", "json"), default="tsv")

    p_base = sub.add_parser("baseline", help="uniform or k-means comparison summary")
    p_base.add_argument("scheme", choices=("uniform", "kmeans"))
    p_base.add_argument("--subject")
    p_base.add_argument("--scene")
    p_base.add_argument("--pixels", help="pixel CRBF file (required for kmeans)")
    p_base.add_argument("--k", type=int, required=True)
    p_base.add_argument("--runs", type=int, default=100, help="k-means restarts (default 100)")
    p_base.add_argument("--out", required=True)
    p_base.add_argument("--format", choices=("tsv", "json"), default="tsv")

    p_viz = sub.add_parser("visualize", help="per-unit reports and average images")
    p_viz.add_argument("checkpoint")
    p_viz.add_argument("--subject")
    p_viz.add_argument("--scene")
    p_viz.add_argument("--pixels")
    p_viz.add_argument("--labels-subject")
    p_viz.add_argument("--labels-scene")
    p_viz.add_argument("--top", type=int, default=100, help="frames per unit (default 100)")
    p_viz.add_argument("--out", required=True, help="output directory")
    p_viz.add_argument("--format", choices=("tsv", "json"), default="tsv")

    return parser


_DISPATCH = {
    "train": _cmd_train,
    "summarize": _cmd_summarize,
    "baseline": _cmd_baseline,
    "visualize": _cmd_visualize,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        manifest = _DISPATCH[args.command](args)
    except UsageError as exc:
        print(f"crbm: {exc}", file=sys.stderr)
        return _USAGE_EXIT
    except (FormatError, DataError, AlignmentError, LabelError, WriteError) as exc:
        print(f"crbm: {exc}", file=sys.stderr)
        return _FORMAT_EXIT
    except (NumericError, CapacityError, BatchError, DimensionError, DegenerateWeightError) as exc:
        print(f"crbm: {exc}", file=sys.stderr)
        return _NUMERIC_EXIT
    except CrbmError as exc:  # anything new defaults to the format family
        print(f"crbm: {exc}", file=sys.stderr)
        return _FORMAT_EXIT
    print(manifest.render(args.format))
    return 0


def entrypoint() -> None:
    sys.exit(main())
