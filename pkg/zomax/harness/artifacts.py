"""CSV and JSON artifacts. Floats are written with repr so files replay byte for byte."""

from __future__ import annotations

import csv
import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from zomax.schemas import SummaryRow
from zomax.solvers import RunTrace

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["k", "f_value", "diag_norm", "cum_evals"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_trace_csv(trace: RunTrace, path: Path, with_coordinates: bool) -> Path:
    d = trace.dims[0] + trace.dims[1]
    components = sorted(trace.components)
    header = list(TRACE_COLUMNS)
    if with_coordinates:
        header += [f"z_{i}" for i in range(d)]
    header += components
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for i in range(len(trace)):
            row = [
                str(int(trace.iterations[i])),
                repr(float(trace.f_values[i])),
                repr(float(trace.diag_norms[i])),
                str(int(trace.cum_evals[i])),
            ]
            if with_coordinates:
                row += [repr(float(v)) for v in trace.points[i]]
            row += [repr(float(trace.components[name][i])) for name in components]
            writer.writerow(row)
    logger.info("wrote trace %s (%d records)", path, len(trace))
    return path


def reset_summary(path: Path) -> Path:
    """Start a fresh summary so a rerun replaces the rows of the previous one."""
    path.unlink(missing_ok=True)
    return path


def append_summary(path: Path, row: SummaryRow) -> Path:
    fields = list(SummaryRow.model_fields)
    new_file = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        if new_file:
            writer.writerow(fields)
        writer.writerow([_fmt(getattr(row, name)) for name in fields])
    return path


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info("wrote %s", path)
    return path


def write_json(path: Path, model: BaseModel) -> Path:
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def write_error_marker(path: Path, exc: BaseException) -> Path:
    path.write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
    logger.error("run failed, marker written to %s", path)
    return path
