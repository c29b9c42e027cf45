"""
Result Emission
===============
Canonical config hashing and every file `run` writes:

  results.csv           one row per (experiment, cutoff)
  summary.json          per-experiment pass/fail with the tolerances used
  plotdata/<name>.csv   "log_N log_value" columns for gnuplot
  timings.json          wall-clock seconds per experiment

results.csv and summary.json are byte-identical for identical config and
seed; timings live in their own file for that reason.
"""

import json
import math
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import pandas as pd

from config import get_logger

logger = get_logger(__name__)

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1

RESULT_COLUMNS = [
    "experiment",
    "index",
    "parameters",
    "N",
    "value",
    "predicted_slope",
    "fitted_slope",
    "residual",
    "passed",
    "seed",
    "config_hash",
]


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK
    return h


def config_hash(obj: Any) -> str:
    """16 hex digits of FNV-1a 64 over the canonical UTF-8 JSON of obj."""
    return f"{fnv1a_64(canonical_json(obj).encode('utf-8')):016x}"


def _jsonable(value):
    """Replace non-finite floats so summary.json stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def write_results(rows: Sequence[Mapping], path: Path) -> None:
    """results.csv with RESULT_COLUMNS, 17 significant digits, '\\n' endings."""
    frame = pd.DataFrame(list(rows), columns=RESULT_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.debug("Wrote %d result rows to %s", len(frame), path)


def write_summary(summary: Mapping, path: Path) -> None:
    text = json.dumps(_jsonable(summary), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_plotdata(log_pairs: Sequence[tuple[float, float]], path: Path, label: str = "") -> None:
    """Two space-separated columns log_N log_value under a '#' header."""
    lines = [f"# {label} log_N log_value" if label else "# log_N log_value"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in log_pairs]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_timings(timings: Mapping[str, float], path: Path) -> None:
    Path(path).write_text(json.dumps(_jsonable(dict(timings)), indent=2) + "\n", encoding="utf-8")


def write_trajectory(rows: Sequence[Mapping], path: Path) -> None:
    """Hartree trajectory CSV: t, j, mass, trace, energy."""
    frame = pd.DataFrame(list(rows), columns=["t", "j", "mass", "trace", "energy"])
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def write_state_json(payload: Mapping, path: Path) -> None:
    """FourierState fixture format: compact, sorted keys, one object per file."""
    Path(path).write_text(json.dumps(_jsonable(payload), sort_keys=True) + "\n", encoding="utf-8")
