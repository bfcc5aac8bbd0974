"""Profile CSV (``r,value``) and JSON report files."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .grid import RadialGrid, RadialProfile


def write_profile_csv(path, p: RadialProfile) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "value"])
        for r, v in zip(p.grid.nodes, p.values):
            w.writerow([f"{r:.17g}", f"{v:.17g}"])


def read_profile_csv(path) -> RadialProfile:
    """Read a profile written by :func:`write_profile_csv`.

    The ``r`` column must be a uniform grid starting at 0.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["r", "value"]:
        raise ValueError(f"{path}: expected header 'r,value'")
    data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise ValueError(f"{path}: need at least two rows of 'r,value'")
    r, v = data[:, 0], data[:, 1]
    grid = RadialGrid(r.size, r[-1])
    if r[0] != 0.0 or not np.allclose(r, grid.nodes, rtol=0, atol=1e-12 * grid.r_max):
        raise ValueError(f"{path}: r column is not a uniform grid on [0, r_max]")
    return RadialProfile(grid, v)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")
