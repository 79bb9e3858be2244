"""CSV and JSON report writers.

Floats in CSV files use six significant digits. JSON reports embed the
resolved configuration, the seed and the package version and carry no
timestamps, so rerunning a config reproduces the same files.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .config import RunConfig
from .constants import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Render one CSV cell.

    Examples
    --------
    >>> format_value(3.62198765)
    '3.62199'
    >>> format_value(float("nan"))
    'nan'
    >>> format_value(7)
    '7'
    """
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return CSV_FLOAT_FORMAT.format(float(value))
    if value is None:
        return ""
    return str(value)


def write_csv(
    path: Path,
    rows: Iterable[Mapping[str, Any]],
    fieldnames: Optional[Sequence[str]] = None,
) -> Path:
    """Write dict rows to ``path``; columns default to the first row's keys."""
    rows = list(rows)
    columns = list(fieldnames or (rows[0].keys() if rows else ()))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
    logger.debug(f"Wrote {len(rows)} rows to {path}")
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return matrix_to_dict(value)
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _finite(value: Any) -> Any:
    # JSON has no NaN; missing samples become null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite(v) for v in value]
    return value


def matrix_to_dict(mat: Any) -> dict[str, Any]:
    """Split a complex matrix into ``real`` and ``imag`` nested lists."""
    arr = np.asarray(mat, dtype=np.complex128)
    return {"real": arr.real.tolist(), "imag": arr.imag.tolist()}


def run_metadata(cfg: RunConfig, command: str) -> dict[str, Any]:
    """Command, version, seed and the resolved configuration of a run."""
    from . import __version__

    return {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config": cfg.model_dump(mode="json"),
    }


def write_json(
    path: Path, payload: Mapping[str, Any], cfg: RunConfig, command: str
) -> Path:
    """Write ``payload`` together with :func:`run_metadata` as sorted JSON."""
    document = {**run_metadata(cfg, command), "results": payload}
    text = json.dumps(document, indent=2, sort_keys=True, default=_jsonable)
    # round trip once so non-finite floats produced by numpy become null
    clean = _finite(json.loads(text))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(clean, indent=2, sort_keys=True, allow_nan=False) + "\n",
        encoding="utf-8",
    )
    logger.debug(f"Wrote report {path}")
    return path
