import csv
import json
import re
from pathlib import Path

import numpy as np

from cli.exceptions import CliError
from cli.serializers import schema_errors
from evolution.models import SERIES_COLUMNS, ObserverCurve, ObserverSeries

CSV_FORMAT = ".17g"


def output_dir(path=None, default=None) -> Path:
    directory = Path(path or default)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def slug(curve_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9.+-]", "_", curve_id)


def series_path(directory, curve_id: str) -> Path:
    return Path(directory) / f"series_{slug(curve_id)}.csv"


def write_csv(path, columns: dict) -> Path:
    """Columns of equal length, 17 significant digits, '\\n' line ends."""
    names = list(columns)
    arrays = [np.asarray(columns[name], dtype=float) for name in names]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([format(value, CSV_FORMAT) for value in row])
    return Path(path)


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise CliError(f"{path} is empty")
    names, body = rows[0], rows[1:]
    values = np.array(body, dtype=float).reshape(len(body), len(names))
    return {name: values[:, i] for i, name in enumerate(names)}


def write_series(directory, series: ObserverSeries) -> Path:
    return write_csv(series_path(directory, series.curve.id), series.columns())


def read_series(directory, curve_id: str, tau_offset=0.0) -> ObserverSeries:
    path = series_path(directory, curve_id)
    if not path.exists():
        raise CliError(f"no series for '{curve_id}' at {path}")
    columns = read_csv(path)
    missing = [name for name in SERIES_COLUMNS if name not in columns]
    if missing:
        raise CliError(f"{path} lacks columns {missing}")
    return ObserverSeries(
        curve=ObserverCurve.from_id(curve_id),
        tau_offset=tau_offset,
        **{name: columns[name] for name in SERIES_COLUMNS},
    )


def write_json(path, payload, schema: str | None = None) -> Path:
    """Sorted, indented JSON; checked against ``schema`` before writing."""
    if schema is not None:
        errors = schema_errors(payload, schema)
        if errors:
            raise CliError(
                f"{schema} payload breaks its schema: " + "; ".join(errors)
            )
    text = json.dumps(payload, indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return Path(path)


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def write_timings(directory, timings: dict) -> Path:
    """Wall-clock figures live apart so result files stay reproducible."""
    path = Path(directory) / "timings.json"
    previous = read_json(path) if path.exists() else {}
    previous.update(timings)
    return write_json(path, previous)


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return format(value, ".5g")
    return str(value)


def fit_table(fits: list[dict]) -> str:
    """Plain-text table of serialized TailFits."""
    header = [
        "scenario",
        "k",
        "curve",
        "field",
        "p_inf",
        "p_theory",
        "amplitude",
        "target",
        "deviation",
        "passes",
    ]
    rows = [[_cell(fit[name]) for name in header] for fit in fits]
    widths = [
        max(len(row[i]) for row in [header, *rows])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths))
        for row in [header, *rows]
    ]
    return "\n".join(line.rstrip() for line in lines) + "\n"
