"""Serialization helpers: canonical JSON reports and sweep CSV files."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math

import numpy as np

__all__ = ["to_jsonable", "canonical_json", "sweep_rows", "write_csv_text"]


def to_jsonable(obj):
    """Recursively convert dataclasses, numpy scalars/arrays and tuples
    into plain JSON-serializable structures (non-finite floats -> str)."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(payload) -> str:
    """Deterministic JSON rendering (sorted keys, fixed layout)."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


def sweep_rows(results: dict):
    """Extract (parameter, raw, scaled, fitted) rows from experiment results.

    Sweep experiments expose eps_values/raw/scaled plus a fitted
    coefficient; coupling curves expose (alpha, value) pairs.  Returns
    ``None`` when the payload carries no sweep data.
    """
    if "eps_values" in results:
        fitted = results.get("fitted_coefficient")
        return [
            (e, r, s, fitted)
            for e, r, s in zip(results["eps_values"], results["raw"],
                               results["scaled"])
        ]
    if "s_alpha_curve" in results:
        return [(alpha, value, "", "") for alpha, value in results["s_alpha_curve"]]
    return None


def write_csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["parameter", "raw", "scaled", "fitted"])
    for row in rows:
        writer.writerow(list(row))
    return buf.getvalue()
