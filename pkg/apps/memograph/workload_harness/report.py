"""
CSV and JSON report files for sweep rows and per-task run reports.
"""
import json
import logging
import math
from pathlib import Path
from typing import Any, Sequence, Union

import pandas as pd

from memograph.constants import REPORT_FLOAT_FORMAT, ReportFormat
from memograph.error_handler import IoFailure
from memograph.workload_harness.experiment import RunReport

logger = logging.getLogger(__name__)

RUN_COLUMNS = [
    "task_id",
    "mode",
    "cost",
    "inconsistency",
    "rho_nodes",
    "rho_edges",
    "L",
    "walltime_ms",
    "merges",
    "graph_id",
    "version",
]

Rows = Union[pd.DataFrame, Sequence[dict[str, Any]], Sequence[RunReport]]


def run_rows(reports: Sequence[RunReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "task_id": report.task_id,
                "mode": report.mode.value,
                "cost": report.breakdown.cost,
                "inconsistency": report.breakdown.inconsistency,
                "rho_nodes": report.rho_nodes,
                "rho_edges": report.rho_edges,
                "L": report.breakdown.total,
                "walltime_ms": report.walltime_ms,
                "merges": report.merges,
                "graph_id": report.stored_ref[0],
                "version": report.stored_ref[1],
            }
            for report in reports
        ],
        columns=RUN_COLUMNS,
    )


def as_frame(rows: Rows) -> pd.DataFrame:
    if isinstance(rows, pd.DataFrame):
        return rows
    rows = list(rows)
    if rows and isinstance(rows[0], RunReport):
        return run_rows(rows)  # type: ignore[arg-type]
    return pd.DataFrame(rows)


def _json_value(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return float(REPORT_FLOAT_FORMAT % value)
    if hasattr(value, "item"):
        return _json_value(value.item())
    return value


def render(rows: Rows, fmt: ReportFormat) -> str:
    """
    Report text with a stable column order and floats at 9 significant digits.
    :param rows: DataFrame, row dicts or RunReports
    :param fmt: ReportFormat
    :return: file content
    """
    frame = as_frame(rows)
    if frame.empty:
        raise ValueError("report rows must not be empty")
    if fmt == ReportFormat.CSV:
        return frame.to_csv(index=False, float_format=REPORT_FLOAT_FORMAT, lineterminator="\n")
    records = [
        {column: _json_value(value) for column, value in zip(frame.columns, row)}
        for row in frame.itertuples(index=False, name=None)
    ]
    return json.dumps(records, indent=2, ensure_ascii=False) + "\n"


def report(rows: Rows, fmt: ReportFormat, out_path: Path) -> Path:
    """
    Write a CSV or JSON report.
    :param rows: DataFrame, row dicts or RunReports
    :param fmt: ReportFormat
    :param out_path: destination file
    :return: out_path
    """
    content = render(rows, fmt)
    out_path = Path(out_path)
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(content)
    except OSError as exc:
        raise IoFailure(str(out_path), str(exc))
    logger.info(f"Wrote {fmt.value} report with {len(as_frame(rows))} rows to {out_path}")
    return out_path


def read_report(path: Path) -> pd.DataFrame:
    """
    Parse a report written by ``report``; JSON "inf" strings come back as floats.
    """
    path = Path(path)
    try:
        if path.suffix == ".csv":
            return pd.read_csv(path)
        with open(path, "r", encoding="utf-8") as handle:
            records = json.load(handle)
    except OSError as exc:
        raise IoFailure(str(path), str(exc))
    for record in records:
        for column, value in record.items():
            if value in ("inf", "-inf"):
                record[column] = float(value)
    return pd.DataFrame(records)
