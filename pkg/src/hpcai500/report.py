"""Ranking-list generation and emission.

Rankings are dense (1, 2, 3, ...) even when scores tie, because the
tie-breaks below make the order total; this is not competition ranking.
JSON output is machine precision; CSV and markdown show the score to 4
significant digits with an SI unit chosen by magnitude.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

from .core import DomainError, PrecisionMode, RunRecord, ScoreReport


class Format(str, Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "markdown"


@dataclass(frozen=True)
class RankingEntry:
    rank: int
    system_name: str
    benchmark_id: str
    vflops: float
    penalty_coefficient: float
    time_to_quality_seconds: Optional[float]
    scale: int
    precision_mode: PrecisionMode


def rank(
    scored: Iterable[tuple[ScoreReport, RunRecord]],
    include_invalid: bool = False,
) -> list[RankingEntry]:
    """Order scored runs into a ranking list.

    Sorted by score descending; ties broken by time-to-quality ascending
    (never-reached sorts last), then system name, then run id, which makes
    the order total and independent of input order. Invalid runs are
    excluded unless include_invalid is set.
    """
    pairs = list(scored)
    benchmark_ids = {record.benchmark_id for _, record in pairs}
    if len(benchmark_ids) > 1:
        raise DomainError(
            "ranking mixes benchmark ids: " + ", ".join(sorted(benchmark_ids))
        )
    if not include_invalid:
        pairs = [(report, record) for report, record in pairs if report.valid]

    def sort_key(pair):
        report, record = pair
        ttq = report.time_to_quality_seconds
        return (
            -report.vflops,
            ttq is None,
            ttq if ttq is not None else 0.0,
            record.system_name,
            record.run_id,
        )

    pairs.sort(key=sort_key)
    return [
        RankingEntry(
            rank=position,
            system_name=record.system_name,
            benchmark_id=record.benchmark_id,
            vflops=report.vflops,
            penalty_coefficient=report.penalty_coefficient,
            time_to_quality_seconds=report.time_to_quality_seconds,
            scale=record.accelerator_count,
            precision_mode=record.precision_mode,
        )
        for position, (report, record) in enumerate(pairs, start=1)
    ]


def format_flops(value: float) -> tuple[str, str]:
    """4-significant-digit value plus SI unit (PFLOPS from 1e15, TFLOPS
    below): 9.39e14 -> ("939.0", "TFLOPS")."""
    if value >= 1e15:
        scaled, unit = value / 1e15, "PFLOPS"
    else:
        scaled, unit = value / 1e12, "TFLOPS"
    text = f"{scaled:#.4g}"
    if text.endswith("."):
        text = text[:-1]
    return text, unit


def _format_ttq(ttq: Optional[float]) -> str:
    return "unreached" if ttq is None else f"{ttq:.6g}"


def emit(entries: list[RankingEntry], fmt: Format | str) -> str:
    """Serialize a ranking. Output bytes are identical for identical input."""
    fmt = Format(fmt)
    if fmt is Format.JSON:
        payload = [
            {
                "rank": e.rank,
                "system_name": e.system_name,
                "benchmark_id": e.benchmark_id,
                "vflops": e.vflops,
                "penalty_coefficient": e.penalty_coefficient,
                "time_to_quality_seconds": e.time_to_quality_seconds,
                "scale": e.scale,
                "precision_mode": e.precision_mode.value,
            }
            for e in entries
        ]
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if fmt is Format.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(
            [
                "rank",
                "system_name",
                "benchmark_id",
                "vflops",
                "vflops_unit",
                "penalty_coefficient",
                "time_to_quality_seconds",
                "scale",
                "precision_mode",
            ]
        )
        for e in entries:
            value, unit = format_flops(e.vflops)
            writer.writerow(
                [
                    e.rank,
                    e.system_name,
                    e.benchmark_id,
                    value,
                    unit,
                    f"{e.penalty_coefficient:.6g}",
                    _format_ttq(e.time_to_quality_seconds),
                    e.scale,
                    e.precision_mode.value,
                ]
            )
        return buffer.getvalue()
    header = [
        "rank",
        "system",
        "VFLOPS",
        "penalty",
        "time_to_quality",
        "scale",
        "precision",
    ]
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for e in entries:
        value, unit = format_flops(e.vflops)
        cells = [
            str(e.rank),
            e.system_name.replace("|", "\\|"),
            f"{value} {unit}",
            f"{e.penalty_coefficient:.6g}",
            _format_ttq(e.time_to_quality_seconds),
            str(e.scale),
            e.precision_mode.value,
        ]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def parse_ranking_json(text: str) -> list[RankingEntry]:
    """Inverse of emit(..., json); reproduces the entry list exactly."""
    entries = []
    for obj in json.loads(text):
        entries.append(
            RankingEntry(
                rank=obj["rank"],
                system_name=obj["system_name"],
                benchmark_id=obj["benchmark_id"],
                vflops=obj["vflops"],
                penalty_coefficient=obj["penalty_coefficient"],
                time_to_quality_seconds=obj["time_to_quality_seconds"],
                scale=obj["scale"],
                precision_mode=PrecisionMode(obj["precision_mode"]),
            )
        )
    return entries
