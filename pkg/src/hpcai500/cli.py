"""Command-line front end wiring the modules together.

Machine output always goes to stdout; diagnostics and warnings go to
stderr, so pipelines stay clean. Exit codes: 0 success, 1 domain violation,
2 input or parse error. Every command is deterministic: reruns with the
same inputs, flags, and seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import __version__
from .characterization import (
    Mode,
    characterize,
    write_clusters_json,
    write_embedding_csv,
)
from .core import (
    BenchmarkSpec,
    DomainError,
    QualityMetric,
    MAP_IOU_050,
    TOP1_ACCURACY,
    registry_lookup,
    validate_run,
)
from .ingest import FORMAT_VERSION, ParseError, parse_runs, parse_profiles
from .repeatability import (
    DEFAULT_GROUP_FIELDS,
    DEFAULT_THRESHOLD,
    classify_repeatability,
    group_epochs,
    variation,
)
from .report import Format, emit, rank
from .scaling import (
    CommModel,
    Topology,
    scaling_curve,
    write_prediction_csv,
    write_scaling_csv,
)
from .scoring import score_run

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INPUT = 2

DEFAULT_SEED = 42
OUTPUT_DIR_ENV = "HPCAI500_OUTPUT_DIR"

_METRIC_SHORTHAND = {
    "map_iou_050": MAP_IOU_050,
    "top1_accuracy": TOP1_ACCURACY,
}


@dataclass(frozen=True)
class Config:
    """Validated per-invocation settings."""

    registry_overrides: Mapping[str, BenchmarkSpec]
    seed: int
    threshold: float
    k: int
    perplexity: float
    output_dir: Path

    @classmethod
    def from_args(cls, args) -> "Config":
        threshold = getattr(args, "threshold", DEFAULT_THRESHOLD)
        if threshold < 0:
            raise DomainError(f"threshold {threshold} < 0")
        k = getattr(args, "k", 3)
        if k < 1:
            raise DomainError(f"k {k} < 1")
        perplexity = getattr(args, "perplexity", 4.0)
        if not perplexity > 0:
            raise DomainError(f"perplexity {perplexity} not > 0")
        output_dir = Path(
            getattr(args, "output_dir", None)
            or os.environ.get(OUTPUT_DIR_ENV)
            or "."
        )
        overrides = {}
        registry_path = getattr(args, "registry", None)
        if registry_path:
            overrides = load_registry_overrides(registry_path)
        return cls(
            registry_overrides=overrides,
            seed=getattr(args, "seed", DEFAULT_SEED),
            threshold=threshold,
            k=k,
            perplexity=perplexity,
            output_dir=output_dir,
        )


def _parse_metric(value) -> QualityMetric:
    if isinstance(value, str):
        if value in _METRIC_SHORTHAND:
            return _METRIC_SHORTHAND[value]
        raise ParseError(
            f"quality_metric {value!r} unknown; use "
            + ", ".join(sorted(_METRIC_SHORTHAND))
            + " or an object with kind/name/higher_is_better"
        )
    if isinstance(value, dict):
        return QualityMetric(
            kind=value.get("kind", "other"),
            name=value["name"],
            higher_is_better=bool(value.get("higher_is_better", True)),
        )
    raise ParseError("quality_metric must be a string or an object")


def load_registry_overrides(path: str | Path) -> dict[str, BenchmarkSpec]:
    """Per-invocation benchmark specs: a JSON array of spec objects. On an
    id clash with a built-in, the file's entry wins for this invocation."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, list):
        raise ParseError(f"{path}: expected a JSON array of benchmark specs")
    overrides = {}
    for i, obj in enumerate(raw):
        try:
            spec = BenchmarkSpec(
                id=obj["id"],
                problem_domain=obj.get("problem_domain", ""),
                model_name=obj.get("model_name", ""),
                dataset_name=obj.get("dataset_name", ""),
                quality_metric=_parse_metric(obj["quality_metric"]),
                target_quality=float(obj["target_quality"]),
                required_epochs=int(obj["required_epochs"]),
                penalty_exponent=int(obj["penalty_exponent"]),
            )
        except KeyError as exc:
            raise ParseError(f"{path}: entry {i}: missing field {exc.args[0]}") from None
        if spec.id in overrides:
            raise ParseError(f"{path}: duplicate spec id {spec.id!r}")
        overrides[spec.id] = spec
    return overrides


def load_comm_model(path: str | Path) -> CommModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc.msg}") from None
    try:
        return CommModel(
            model_bytes=float(obj["model_bytes"]),
            per_device_compute_seconds=float(obj["per_device_compute_seconds"]),
            intra_node_bandwidth=float(obj["intra_node_bandwidth"]),
            inter_node_bandwidth=float(obj["inter_node_bandwidth"]),
            devices_per_node=int(obj["devices_per_node"]),
            compression=bool(obj.get("compression", False)),
            topology=Topology(obj.get("topology", "ring")),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc.args[0]}") from None
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"{path}: {exc}") from None


def _read_runs(path: str) -> tuple:
    text = Path(path).read_text(encoding="utf-8")
    return parse_runs(text, path=path).records


def cmd_validate(args, config: Config) -> int:
    records = _read_runs(args.runs)
    all_valid = True
    for record in records:
        spec = registry_lookup(record.benchmark_id, config.registry_overrides)
        for violation in validate_run(record, spec):
            print(f"{record.run_id}: {violation}")
            all_valid = False
    return EXIT_OK if all_valid else EXIT_DOMAIN


def cmd_score(args, config: Config) -> int:
    records = _read_runs(args.runs)
    reports = []
    for record in records:
        spec = registry_lookup(record.benchmark_id, config.registry_overrides)
        report = score_run(record, spec)
        reports.append(
            {
                "run_id": report.run_id,
                "benchmark_id": record.benchmark_id,
                "penalty_coefficient": report.penalty_coefficient,
                "above_target": report.above_target,
                "vflops": report.vflops,
                "time_to_quality_seconds": report.time_to_quality_seconds,
                "valid": report.valid,
                "violations": list(report.violations),
            }
        )
    print(json.dumps(reports, indent=2, allow_nan=False))
    return EXIT_OK


def cmd_rank(args, config: Config) -> int:
    records = _read_runs(args.runs)
    scored = [
        (
            score_run(
                record,
                registry_lookup(record.benchmark_id, config.registry_overrides),
            ),
            record,
        )
        for record in records
    ]
    entries = rank(scored, include_invalid=args.include_invalid)
    text = emit(entries, Format(args.format))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_variation(args, config: Config) -> int:
    records = _read_runs(args.runs)
    fields = tuple(f.strip() for f in args.group_by.split(",") if f.strip())
    groups = group_epochs(records, fields)
    results = []
    for key in sorted(groups):
        samples = groups[key]
        if len(samples) < 2:
            print(
                f"warning: group {key!r} has {len(samples)} run(s); skipped",
                file=sys.stderr,
            )
            continue
        report = variation(samples, workload_id=key)
        results.append(
            {
                "group": key,
                "runs": report.runs,
                "mean_epochs": report.mean_epochs,
                "stddev_epochs": report.stddev_epochs,
                "variation": report.variation,
                "variation_percent": report.variation * 100.0,
                "classification": classify_repeatability(
                    report, config.threshold
                ).value,
            }
        )
    print(json.dumps(results, indent=2, allow_nan=False))
    return EXIT_OK


def cmd_cluster(args, config: Config) -> int:
    text = Path(args.profiles).read_text(encoding="utf-8")
    dump = parse_profiles(text, path=args.profiles)
    result = characterize(
        dump.vectors,
        Mode(args.mode),
        seed=config.seed,
        k=config.k,
        perplexity=config.perplexity,
    )
    for workload_id in result.dropped:
        print(
            f"warning: {workload_id} dropped (missing architecture-"
            "independent features)",
            file=sys.stderr,
        )
    config.output_dir.mkdir(parents=True, exist_ok=True)
    embedding_path = config.output_dir / "embedding.csv"
    clusters_path = config.output_dir / "clusters.json"
    write_embedding_csv(embedding_path, result)
    write_clusters_json(clusters_path, result)
    print(f"wrote {embedding_path} and {clusters_path}", file=sys.stderr)
    return EXIT_OK


def cmd_scaling(args, config: Config) -> int:
    config.output_dir.mkdir(parents=True, exist_ok=True)
    if args.runs:
        records = _read_runs(args.runs)
        curve = scaling_curve(records, baseline_scale=args.baseline_scale)
        for warning in curve.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        out = config.output_dir / "scaling.csv"
        write_scaling_csv(out, curve)
    else:
        model = load_comm_model(args.model)
        try:
            scales = [int(s) for s in args.scales.split(",") if s.strip()]
        except ValueError:
            raise ParseError(f"bad --scales value {args.scales!r}") from None
        if not scales:
            raise ParseError("no scales given")
        out = config.output_dir / "prediction.csv"
        write_prediction_csv(out, model, scales)
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hpcai500",
        description="Score, rank, and analyze HPC AI benchmark runs.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"hpcai500 {__version__} (run-file format_version {FORMAT_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_registry(p):
        p.add_argument(
            "--registry",
            metavar="PATH",
            help="JSON file of per-invocation benchmark specs",
        )

    p = sub.add_parser("validate", help="check runs against their benchmarks")
    p.add_argument("runs", help="run-record file (one JSON object per line)")
    add_registry(p)
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("score", help="score runs; JSON reports on stdout")
    p.add_argument("runs")
    add_registry(p)
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("rank", help="emit the ranking list for one benchmark")
    p.add_argument("runs")
    add_registry(p)
    p.add_argument(
        "--format",
        choices=[f.value for f in Format],
        default="markdown",
    )
    p.add_argument(
        "--include-invalid",
        action="store_true",
        help="rank runs that failed validation too",
    )
    p.add_argument("--output", metavar="PATH", help="write here instead of stdout")
    p.set_defaults(handler=cmd_rank)

    p = sub.add_parser("variation", help="run-to-run variation per run group")
    p.add_argument("runs")
    p.add_argument(
        "--group-by",
        default=",".join(DEFAULT_GROUP_FIELDS),
        help="comma-separated RunRecord fields forming the group key; "
        "None-valued fields (an unrecorded seed) are dropped from the key "
        "(default: %(default)s)",
    )
    p.add_argument(
        "--threshold",
        type=float,
        default=DEFAULT_THRESHOLD,
        help="repeatable iff variation <= this fraction (default 0.02)",
    )
    p.set_defaults(handler=cmd_variation)

    p = sub.add_parser("cluster", help="cluster and embed profile vectors")
    p.add_argument("profiles", help="profiler metric dump (CSV)")
    p.add_argument(
        "--mode",
        choices=[m.value for m in Mode],
        default="arch_dependent",
    )
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--perplexity", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output-dir", metavar="DIR")
    p.set_defaults(handler=cmd_cluster)

    p = sub.add_parser(
        "scaling", help="measured scaling curve or modeled efficiency"
    )
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--runs", metavar="PATH", help="measured runs to analyze")
    source.add_argument(
        "--model", metavar="PATH", help="communication model config (JSON)"
    )
    p.add_argument("--baseline-scale", type=int, default=8)
    p.add_argument(
        "--scales",
        default="8,16,32,64",
        help="device counts for --model predictions (default: %(default)s)",
    )
    p.add_argument("--output-dir", metavar="DIR")
    p.set_defaults(handler=cmd_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = Config.from_args(args)
        return args.handler(args, config)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
