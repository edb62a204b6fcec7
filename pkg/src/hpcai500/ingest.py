"""On-disk formats: line-delimited run records and profiler metric dumps.

Run-record files are UTF-8, one JSON object per line, field names exactly
matching RunRecord. Lines starting with '#' are comments; the writer emits a
'# format_version=N' header. Profile dumps are UTF-8 CSV with a fixed header.

Parsers are pure functions over their input text; files may be parsed
concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import DomainError, PrecisionMode, ProfileVector, RunRecord

FORMAT_VERSION = 1

PROFILE_HEADER = (
    "workload_id,achieved_occupancy,ipc_efficiency,gld_efficiency,"
    "gst_efficiency,dram_utilization,parameter_count,epochs_to_quality,"
    "flops_per_forward"
)


class ParseError(ValueError):
    """Malformed input; the message carries the offending line number."""


class DuplicateIdError(ParseError):
    pass


@dataclass(frozen=True)
class RunFile:
    path: Optional[str]
    records: tuple[RunRecord, ...]


@dataclass(frozen=True)
class ProfileDump:
    path: Optional[str]
    vectors: tuple[ProfileVector, ...]


_RUN_FIELDS = {
    "run_id": str,
    "benchmark_id": str,
    "system_name": str,
    "accelerator_count": int,
    "precision_mode": str,
    "comm_compression": bool,
    "sustained_flops": float,
    "achieved_quality": float,
    "epochs_run": int,
    "wall_clock_seconds": float,
}
_OPTIONAL_RUN_FIELDS = {"seed": int}


def _reject_constant(token):
    raise ParseError(f"non-finite number {token}")


def _coerce(line_no: int, name: str, value, kind):
    # bool is an int subclass; keep the checks disjoint.
    if kind is bool:
        if not isinstance(value, bool):
            raise ParseError(f"line {line_no}: field {name}: expected boolean")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"line {line_no}: field {name}: expected integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"line {line_no}: field {name}: expected number")
        value = float(value)
        if not math.isfinite(value):
            raise ParseError(f"line {line_no}: field {name}: non-finite number")
        return value
    if not isinstance(value, str):
        raise ParseError(f"line {line_no}: field {name}: expected string")
    return value


def parse_runs(text: str | bytes, path: Optional[str] = None) -> RunFile:
    """Parse a line-delimited run-record stream.

    Raises ParseError with the line number and field name on the first
    malformed line, and DuplicateIdError naming both lines when a run_id
    repeats. Rejects unknown fields and non-finite numbers.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    records = []
    seen: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            obj = json.loads(stripped, parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {line_no}: invalid JSON: {exc.msg}") from None
        except ParseError as exc:
            raise ParseError(f"line {line_no}: {exc}") from None
        if not isinstance(obj, dict):
            raise ParseError(f"line {line_no}: expected an object")
        for name in obj:
            if name not in _RUN_FIELDS and name not in _OPTIONAL_RUN_FIELDS:
                raise ParseError(f"line {line_no}: unknown field {name}")
        fields = {}
        for name, kind in _RUN_FIELDS.items():
            if name not in obj:
                raise ParseError(f"line {line_no}: missing field {name}")
            fields[name] = _coerce(line_no, name, obj[name], kind)
        seed = obj.get("seed")
        if seed is not None:
            seed = _coerce(line_no, "seed", seed, int)
        try:
            fields["precision_mode"] = PrecisionMode(fields["precision_mode"])
        except ValueError:
            raise ParseError(
                f"line {line_no}: field precision_mode: expected one of "
                + ", ".join(m.value for m in PrecisionMode)
            ) from None
        record = RunRecord(seed=seed, **fields)
        if record.run_id in seen:
            raise DuplicateIdError(
                f"duplicate run_id {record.run_id!r} on lines "
                f"{seen[record.run_id]} and {line_no}"
            )
        seen[record.run_id] = line_no
        records.append(record)
    return RunFile(path=path, records=tuple(records))


def write_runs(records: Iterable[RunRecord]) -> str:
    """Serialize records so that parse_runs(write_runs(x)).records == x.

    Numbers keep their shortest round-trip decimal form; the seed field is
    omitted when absent. Non-finite numbers and duplicate run_ids are
    rejected here because the parser would reject them anyway.
    """
    lines = [f"# format_version={FORMAT_VERSION}"]
    seen = set()
    for record in records:
        if record.run_id in seen:
            raise DomainError(f"duplicate run_id {record.run_id!r}")
        seen.add(record.run_id)
        obj = {
            "run_id": record.run_id,
            "benchmark_id": record.benchmark_id,
            "system_name": record.system_name,
            "accelerator_count": record.accelerator_count,
            "precision_mode": record.precision_mode.value,
            "comm_compression": record.comm_compression,
            "sustained_flops": record.sustained_flops,
            "achieved_quality": record.achieved_quality,
            "epochs_run": record.epochs_run,
            "wall_clock_seconds": record.wall_clock_seconds,
        }
        if record.seed is not None:
            obj["seed"] = record.seed
        try:
            lines.append(json.dumps(obj, allow_nan=False))
        except ValueError:
            raise DomainError(
                f"run {record.run_id!r} holds a non-finite number"
            ) from None
    return "\n".join(lines) + "\n"


def _parse_ratio(line_no: int, name: str, token: str) -> float:
    token = token.strip()
    percent = token.endswith("%")
    if percent:
        token = token[:-1]
    try:
        if "_" in token:  # no thousands separators of any kind
            raise ValueError
        value = float(token)
    except ValueError:
        raise ParseError(
            f"line {line_no}: field {name}: non-numeric value {token!r}"
        ) from None
    if not math.isfinite(value):
        raise ParseError(f"line {line_no}: field {name}: non-finite number")
    if percent:
        value /= 100.0
    if not 0.0 <= value <= 1.0:
        raise ParseError(f"line {line_no}: {name} {value} outside [0, 1]")
    return value


def _parse_optional(line_no: int, name: str, token: str, kind):
    token = token.strip()
    if not token:
        return None
    try:
        if "_" in token:  # no thousands separators of any kind
            raise ValueError
        value = kind(token)
    except ValueError:
        raise ParseError(
            f"line {line_no}: field {name}: non-numeric value {token!r}"
        ) from None
    if kind is float and not math.isfinite(value):
        raise ParseError(f"line {line_no}: field {name}: non-finite number")
    return value


def parse_profiles(text: str | bytes, path: Optional[str] = None) -> ProfileDump:
    """Parse a profiler metric dump.

    The four efficiency ratios accept either fractions (0.875) or
    percentages ("87.5%"); dram_utilization is the profiler's 0-10 level
    and is divided by 10. The trailing three columns may be empty.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    expected = PROFILE_HEADER.split(",")
    header_seen = False
    vectors = []
    seen: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not header_seen:
            if [c.strip() for c in stripped.split(",")] != expected:
                raise ParseError(
                    f"line {line_no}: header mismatch; expected "
                    f"{PROFILE_HEADER!r}"
                )
            header_seen = True
            continue
        cells = stripped.split(",")
        if len(cells) != len(expected):
            raise ParseError(
                f"line {line_no}: expected {len(expected)} columns, "
                f"got {len(cells)}"
            )
        workload_id = cells[0].strip()
        if not workload_id:
            raise ParseError(f"line {line_no}: empty workload_id")
        ratios = [
            _parse_ratio(line_no, name, cell)
            for name, cell in zip(expected[1:5], cells[1:5])
        ]
        dram = _parse_optional(line_no, "dram_utilization", cells[5], float)
        if dram is None:
            raise ParseError(f"line {line_no}: missing field dram_utilization")
        if not 0.0 <= dram <= 10.0:
            raise ParseError(
                f"line {line_no}: dram_utilization {dram} outside [0, 10]"
            )
        vector_kwargs = dict(
            workload_id=workload_id,
            achieved_occupancy=ratios[0],
            ipc_efficiency=ratios[1],
            gld_efficiency=ratios[2],
            gst_efficiency=ratios[3],
            dram_utilization=dram / 10.0,
            parameter_count=_parse_optional(line_no, "parameter_count", cells[6], int),
            epochs_to_quality=_parse_optional(
                line_no, "epochs_to_quality", cells[7], float
            ),
            flops_per_forward=_parse_optional(
                line_no, "flops_per_forward", cells[8], float
            ),
        )
        try:
            vector = ProfileVector(**vector_kwargs)
        except DomainError as exc:
            raise ParseError(f"line {line_no}: {exc}") from None
        if vector.workload_id in seen:
            raise DuplicateIdError(
                f"duplicate workload_id {vector.workload_id!r} on lines "
                f"{seen[vector.workload_id]} and {line_no}"
            )
        seen[vector.workload_id] = line_no
        vectors.append(vector)
    if not header_seen:
        raise ParseError("line 1: header mismatch; empty input")
    return ProfileDump(path=path, vectors=tuple(vectors))
