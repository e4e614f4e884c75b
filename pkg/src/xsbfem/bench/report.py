"""CSV and JSON emission of benchmark rows."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import ConfigError

_INT = ("nx", "ny", "layer_setting", "n_layers", "dofs")
_STR = ("problem", "tip", "sweep_name")
COLUMNS = [
    "problem", "tip", "nx", "ny", "layer_setting", "n_layers", "sweep_name", "sweep_value",
    "h", "dofs", "K_I_ref", "K_II_ref",
    "K_I_displacement", "K_II_displacement", "K_I_stress", "K_II_stress",
    "err_I_displacement", "err_II_displacement", "err_I_stress", "err_II_stress",
    "rate_I_displacement", "rate_I_stress",
    "mu_1", "mu_2", "L0", "residual", "scaled_condition_number", "condition_number",
]


def convergence_rate(h: Sequence[float], err: Sequence[float]) -> Optional[float]:
    """Least-squares slope of ``log(err)`` against ``log(h)``."""
    h, err = np.asarray(h, dtype=float), np.asarray(err, dtype=float)
    if len(h) < 2 or np.any(err <= 0) or len(np.unique(h)) < 2:
        return None
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def add_rates(rows: list, methods: Sequence[str]) -> None:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["tip"], r["layer_setting"], r["sweep_value"]), []).append(r)
    for group in groups.values():
        for m in methods:
            errs = [r[f"err_I_{m}"] for r in group]
            if any(e is None for e in errs):
                continue
            rate = convergence_rate([r["h"] for r in group], errs)
            for r in group:
                r[f"rate_I_{m}"] = rate


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _parse(column: str, text: str):
    if text == "":
        return None
    if column in _INT:
        return int(text)
    if column in _STR:
        return text
    return float(text)


def write_csv(rows: list, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return path


def read_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [{c: _parse(c, r[c]) for c in COLUMNS} for r in reader]


def normalise_row(row: dict) -> dict:
    """Row with the exact types the CSV reader produces (for round-trip comparison)."""
    return {c: _parse(c, _fmt(row.get(c))) for c in COLUMNS}


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_report(rows: list, path, metadata: Optional[dict] = None) -> tuple[Path, Path]:
    """Write ``<path>.csv`` and ``<path>.json``; ``path`` may carry either suffix or none."""
    if not rows:
        raise ConfigError("no benchmark rows to report")
    base = Path(path)
    if base.suffix in (".csv", ".json"):
        base = base.with_suffix("")
    try:
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path = write_csv(rows, base.with_suffix(".csv"))
        json_path = base.with_suffix(".json")
        doc = {"columns": COLUMNS, "rows": rows, "metadata": metadata or {}}
        with open(json_path, "w") as fh:
            json.dump(doc, fh, indent=1, default=_json_default, sort_keys=False)
    except OSError as exc:
        raise OSError(f"cannot write report at {base}: {exc}") from exc
    return csv_path, json_path
