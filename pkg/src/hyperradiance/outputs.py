"""Result files: long-format CSV/JSON, matrix CSV for 2-D maps, run manifest.

Undefined values are written as the literal ``NA``.  Floats use ``repr`` so
that a CSV round trip reproduces every value bit for bit.
"""
from __future__ import annotations

import csv
import json
import platform
import statistics
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from . import __version__
from .sweep import SweepConfig, SweepRecord

CSV_COLUMNS = [
    "delta", "j",
    "n1", "m1", "g2n_1", "g2m_1", "g2nm_1", "en_1",
    "n2", "m2", "g2n_2", "g2m_2", "g2nm_2", "en_2",
    "radiance", "flags",
]
MATRIX_FIELDS = ["radiance", "n1", "n2", "en_1", "en_2"]
NA = "NA"


def _fmt(x) -> str:
    if x is None:
        return NA
    return repr(float(x))


def record_row(rec: SweepRecord) -> dict[str, str]:
    row = {"delta": _fmt(rec.delta), "j": _fmt(rec.j)}
    for tag, obs in (("1", rec.one), ("2", rec.two)):
        vals = (
            [obs.mean_photon, obs.mean_phonon, obs.g2_photon, obs.g2_phonon, obs.g2_cross, obs.log_negativity]
            if obs is not None
            else [None] * 6
        )
        for key, v in zip(("n", "m", "g2n_", "g2m_", "g2nm_", "en_"), vals):
            row[f"{key}{tag}"] = _fmt(v)
    row["radiance"] = _fmt(rec.radiance)
    row["flags"] = ";".join(rec.flags)
    return row


def write_csv(path: Path, records: Sequence[SweepRecord]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for rec in records:
            writer.writerow(record_row(rec))
    return path


def read_csv(path: Path) -> list[dict[str, float | None | str]]:
    """Parse a results CSV; ``NA`` becomes ``None``."""
    rows = []
    with Path(path).open(newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, val in raw.items():
                if key == "flags":
                    row[key] = val
                else:
                    row[key] = None if val == NA else float(val)
            rows.append(row)
    return rows


def write_json(path: Path, records: Sequence[SweepRecord], config: SweepConfig | None = None) -> Path:
    path = Path(path)
    payload = {"records": [r.to_dict() for r in records]}
    if config is not None:
        payload["config"] = config.to_dict()
    path.write_text(json.dumps(payload, indent=1))
    return path


def _matrix_value(rec: SweepRecord, field: str):
    obs = rec.one if field.endswith("1") else rec.two
    if field == "radiance":
        return rec.radiance
    if obs is None:
        return None
    return obs.mean_photon if field.startswith("n") else obs.log_negativity


def write_matrices(prefix: str, grid: Sequence[Sequence[SweepRecord]], fields: Sequence[str] = MATRIX_FIELDS) -> list[Path]:
    """One CSV per field: header row of detunings, one row per coupling."""
    paths = []
    deltas = [rec.delta for rec in grid[0]] if grid else []
    for field in fields:
        path = Path(f"{prefix}.{field}.matrix.csv")
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["j\\delta"] + [_fmt(d) for d in deltas])
            for row in grid:
                writer.writerow([_fmt(row[0].j)] + [_fmt(_matrix_value(r, field)) for r in row])
        paths.append(path)
    return paths


def build_manifest(
    config: SweepConfig,
    records: Sequence[SweepRecord],
    files: Sequence[Path],
    wall_time: float,
) -> dict:
    residuals = [
        obs.residual
        for rec in records
        for obs in (rec.one, rec.two)
        if obs is not None and obs.residual is not None
    ]
    used = sorted(
        {tuple(obs.cutoffs) for rec in records for obs in (rec.one, rec.two) if obs is not None and obs.cutoffs}
    )
    return {
        "software": "hyperradiance",
        "version": __version__,
        "python": platform.python_version(),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "dissipator_convention": config.convention,
        "config": config.to_dict(),
        "cutoffs": {"policy": "auto" if config.cutoffs == "auto" else "fixed", "used": [list(c) for c in used]},
        "residuals": {
            "max": max(residuals) if residuals else None,
            "median": statistics.median(residuals) if residuals else None,
        },
        "n_points": len(records),
        "n_failed": sum(1 for r in records if r.error),
        "wall_time_s": round(wall_time, 3),
        "files": [str(Path(f).name) for f in files],
    }


def write_manifest(prefix: str, manifest: dict) -> Path:
    path = Path(f"{prefix}.manifest.json")
    path.write_text(json.dumps(manifest, indent=2))
    return path
