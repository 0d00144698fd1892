"""Report persistence. JSON floats are written with ``repr`` and so read back bit-exactly."""
import csv
import json

import numpy as np

from ..report import CSV_COLUMNS, RunReport

FORMATS = ("csv", "json")


def _csv_value(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


def emit_report(reports, path, fmt="csv"):
    """Write ``reports`` to ``path`` as CSV (summary columns) or JSON (every field)."""
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {fmt!r}")
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
                writer.writeheader()
                for r in reports:
                    writer.writerow({k: _csv_value(v) for k, v in r.csv_row().items()})
            else:
                json.dump([r.to_dict() for r in reports], fh, indent=1, allow_nan=False)
                fh.write("\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report to {path}: {exc.strerror}") from exc


def read_reports(path):
    """Reports from a JSON file written by :func:`emit_report`."""
    try:
        with open(path) as fh:
            docs = json.load(fh)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read reports from {path}: {exc.strerror}") from exc
    return [RunReport.from_dict(d) for d in docs]


def read_csv_rows(path):
    try:
        with open(path, newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read reports from {path}: {exc.strerror}") from exc
