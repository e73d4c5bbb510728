"""Deterministic result serialization: report JSON and trajectory CSV.

Reports embed the config echo, the tool version and every tolerance used;
identical config and seed produce byte-identical files.  Wall time is not
part of the report (it goes to the run log) so determinism survives.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__

__all__ = ["format_float", "write_csv", "write_report", "jsonable"]


def format_float(x: float) -> str:
    """17 significant digits, locale-independent."""
    return format(float(x), ".17g")


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": float(np.real(obj)), "im": float(np.imag(obj))}
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_report(path: Path, command: str, config_echo: dict, seed: int, results: dict) -> None:
    payload = {
        "tool": "kovtop",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": jsonable(config_echo),
        "results": jsonable(results),
    }
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, columns: dict[str, np.ndarray]) -> None:
    """Delimited output, '.' decimal separator, 17 significant digits."""
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    n = arrays[0].size
    with path.open("w", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(format_float(a[i]) for a in arrays) + "\n")
