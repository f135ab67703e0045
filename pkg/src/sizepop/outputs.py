"""CSV and JSON result files."""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .errors import IoError

_FMT = "{:.17g}"


def _fmt(x) -> str:
    return _FMT.format(float(x))


def _write_csv(path: Path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise IoError(exc.strerror or str(exc), path=path) from None


def _ensure_dir(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(exc.strerror or str(exc), path=out) from None
    if not os.access(out, os.W_OK):
        raise IoError("directory is not writable", path=out)
    return out


def _json_value(x):
    if x is None or isinstance(x, (bool, str, int)):
        return x
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return str(x)


def write_outputs(
    out_dir,
    grid,
    traj=None,
    spec=None,
    report=None,
    config: dict | None = None,
    seed: int | None = None,
    extra: dict | None = None,
    aeg=None,
) -> list[Path]:
    """Write the result files for a run into ``out_dir`` and return their paths.

    ``timeseries.csv`` is written when ``traj`` is given, ``profile.csv``
    always (final snapshot and/or eigenprofile columns), ``aeg.csv`` when a
    distance series is given, and ``summary.json`` always.
    """
    out = _ensure_dir(out_dir)
    written = []

    summary = {
        "malthus": None,
        "residual": None,
        "irreducible": None,
        "conservation_drift": None,
        "positivity_min": None,
        "dissipativity_max_ratio": None,
        "config": config,
        "seed": seed,
    }

    if traj is not None:
        path = out / "timeseries.csv"
        rows = ((t, M, b0, bm) for t, M, (b0, bm) in zip(traj.times, traj.masses, traj.boundary_series))
        _write_csv(path, ["t", "total_mass", "u_boundary_0", "u_boundary_m"], rows)
        written.append(path)
        m0 = traj.masses[0]
        summary["conservation_drift"] = abs(traj.masses[-1] - m0) / abs(m0) if m0 != 0 else None
        summary["positivity_min"] = traj.min_entry

    header, cols = ["s"], [grid.nodes]
    if traj is not None:
        header.append("u")
        cols.append(traj.final)
    if spec is not None:
        header.append("eigenprofile")
        cols.append(spec.right_vector)
        summary["malthus"] = spec.malthus
        summary["residual"] = spec.residual
        summary["irreducible"] = spec.irreducible
    path = out / "profile.csv"
    _write_csv(path, header, zip(*cols))
    written.append(path)

    if aeg is not None:
        path = out / "aeg.csv"
        _write_csv(path, ["t", "distance"], aeg)
        written.append(path)

    if report is not None:
        summary["dissipativity_max_ratio"] = report.max_ratio
    if extra:
        summary.update(extra)

    path = out / "summary.json"
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(_json_value(summary), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise IoError(exc.strerror or str(exc), path=path) from None
    written.append(path)
    return written
