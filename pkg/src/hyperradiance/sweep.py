"""Parameter scans over detuning and coupling strength.

Each grid point solves the one-atom and two-atom systems at identical
parameters so that the radiance witness can be formed from the pair.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import CutoffCeiling, DenominatorTooSmall, SolverError
from .liouville import model_liouvillian, steady_state
from .model import CONVENTIONS, ModelParams
from .observables import ObservableSet, classify_radiance, compute_observables, radiance

__all__ = [
    "SweepConfig",
    "SweepRecord",
    "SweepPointError",
    "PRESETS",
    "preset",
    "solve_point",
    "run_point",
    "sweep_detuning",
    "sweep_2d",
    "converge_cutoffs",
    "refine_peak",
    "find_peaks",
    "window",
]

log = logging.getLogger(__name__)


class SweepPointError(SolverError):
    """A solver failure at a specific ``(delta, j)`` grid point."""

    def __init__(self, delta: float, j: float, cause: Exception):
        super().__init__(f"at delta={delta!r}, j={j!r}: {type(cause).__name__}: {cause}")
        self.delta = delta
        self.j = j
        self.cause = cause


def _range(spec) -> list[float]:
    if isinstance(spec, dict):
        spec = (spec["min"], spec["max"], spec["points"])
    lo, hi, n = spec
    n = int(n)
    if n < 2:
        raise ValueError(f"a range needs at least 2 points, got {n}")
    if not lo < hi:
        raise ValueError(f"range must be increasing, got ({lo}, {hi})")
    return [float(x) for x in np.linspace(lo, hi, n)]


@dataclass
class SweepConfig:
    """Grid and fixed parameters of a scan, all in units of kappa.

    ``j_values`` is either an explicit list or a ``{"min", "max", "points"}``
    range; ``cutoffs`` is ``"auto"`` or a ``(cavity, mechanical)`` pair.
    """

    delta_range: tuple[float, float, int] = (-1.0, 1.0, 801)
    j_values: Sequence[float] | dict = (0.1,)
    omega: float = 1.0
    gamma_c: float = 10.0
    gamma_m: float = 10.0
    kappa: float = 1.0
    kind: str = "detuning"
    cutoffs: str | tuple[int, int] = (4, 4)
    cutoff_tol: float = 1e-6
    max_cutoff: int = 12
    convention: str = "paper"
    transpose: str = "photon"
    atoms: tuple[int, ...] = (1, 2)
    workers: int = 1
    name: str = "sweep"

    def __post_init__(self):
        if isinstance(self.delta_range, dict):
            d = self.delta_range
            self.delta_range = (d["min"], d["max"], d["points"])
        self.delta_range = tuple(self.delta_range)
        _range(self.delta_range)
        if isinstance(self.j_values, dict):
            self.j_values = _range(self.j_values)
        else:
            self.j_values = sorted(set(float(j) for j in self.j_values))
        if not self.j_values:
            raise ValueError("j_values must not be empty")
        if self.kind not in ("detuning", "map"):
            raise ValueError(f"kind must be 'detuning' or 'map', got {self.kind!r}")
        if self.cutoffs != "auto":
            nc, nm = (int(c) for c in self.cutoffs)
            if nc < 1 or nm < 1:
                raise ValueError("cutoffs must be >= 1")
            self.cutoffs = (nc, nm)
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        self.atoms = tuple(sorted(set(int(a) for a in self.atoms)))
        if not self.atoms or any(a not in (1, 2) for a in self.atoms):
            raise ValueError(f"atoms must be a subset of (1, 2), got {self.atoms}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def deltas(self) -> list[float]:
        return _range(self.delta_range)

    def params(self, delta: float, j: float, n_atoms: int, cutoffs: tuple[int, int]) -> ModelParams:
        return ModelParams(
            delta=delta,
            j_coupling=j,
            omega_pump=self.omega,
            kappa=self.kappa,
            gamma_c=self.gamma_c,
            gamma_m=self.gamma_m,
            n_atoms=n_atoms,
            cavity_cutoff=cutoffs[0],
            mech_cutoff=cutoffs[1],
            convention=self.convention,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["delta_range"] = list(self.delta_range)
        d["j_values"] = list(self.j_values)
        d["cutoffs"] = self.cutoffs if self.cutoffs == "auto" else list(self.cutoffs)
        d["atoms"] = list(self.atoms)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


#: Parameter sets behind the published figures.
PRESETS = {
    "weak": dict(name="weak", delta_range=(-1.0, 1.0, 801), j_values=[0.1]),
    "strong": dict(name="strong", delta_range=(-200.0, 200.0, 801), j_values=[100.0]),
    "map": dict(
        name="map",
        kind="map",
        delta_range=(-200.0, 200.0, 101),
        j_values={"min": 0.0, "max": 100.0, "points": 101},
    ),
}


def preset(name: str, **overrides) -> SweepConfig:
    try:
        base = dict(PRESETS[name])
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    base.update(overrides)
    return SweepConfig(**base)


@dataclass
class SweepRecord:
    delta: float
    j: float
    one: ObservableSet | None = None
    two: ObservableSet | None = None
    radiance: float | None = None
    classification: str = "undefined"
    flags: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "j": self.j,
            "one_atom": self.one.to_dict() if self.one else None,
            "two_atom": self.two.to_dict() if self.two else None,
            "radiance": self.radiance,
            "classification": self.classification,
            "flags": list(self.flags),
            "error": self.error,
        }


def solve_point(p: ModelParams, transpose: str = "photon") -> ObservableSet:
    rho = steady_state(model_liouvillian(p))
    return compute_observables(rho, transpose=transpose)


def run_point(delta: float, j: float, config: SweepConfig) -> SweepRecord:
    """Solve every configured atom number at ``(delta, j)`` and form R.

    Raises
    ------
    SweepPointError
        Wraps any solver failure with the offending coordinates.
    """
    try:
        if config.cutoffs == "auto":
            cutoffs = converge_cutoffs(delta, j, config, tol=config.cutoff_tol)
        else:
            cutoffs = config.cutoffs
        sets = {n: solve_point(config.params(delta, j, n, cutoffs), config.transpose) for n in config.atoms}
    except SolverError as exc:
        raise SweepPointError(delta, j, exc) from exc

    rec = SweepRecord(delta=delta, j=j, one=sets.get(1), two=sets.get(2))
    for tag, obs in (("1", rec.one), ("2", rec.two)):
        if obs is not None:
            rec.flags.extend(f"{flag}_{tag}" for flag in obs.flags)
    if rec.one is not None and rec.two is not None:
        try:
            rec.radiance = radiance(rec.two.mean_photon, rec.one.mean_photon)
        except DenominatorTooSmall:
            rec.flags.append("radiance_undefined")
    else:
        rec.flags.append("radiance_undefined")
    rec.classification = classify_radiance(rec.radiance)
    return rec


def _point_task(args) -> SweepRecord:
    delta, j, config = args
    try:
        return run_point(delta, j, config)
    except SweepPointError as exc:
        log.warning("%s", exc)
        return SweepRecord(delta=delta, j=j, flags=["error"], error=str(exc))


def _run_points(points: list[tuple[float, float]], config: SweepConfig, workers: int | None = None) -> list[SweepRecord]:
    workers = config.workers if workers is None else workers
    tasks = [(d, j, config) for d, j in points]
    if workers == 1:
        records = [_point_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_point_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    records.sort(key=lambda r: (r.j, r.delta))
    return records


def sweep_detuning(config: SweepConfig, workers: int | None = None) -> list[SweepRecord]:
    """One record per ``(j, delta)``, ordered by ``j`` then ``delta``.

    Failed points are kept as records carrying the ``error`` flag.
    """
    points = [(d, j) for j in config.j_values for d in config.deltas]
    return _run_points(points, config, workers)


def sweep_2d(config: SweepConfig, workers: int | None = None) -> list[list[SweepRecord]]:
    """Grid of records: rows follow ``j_values``, columns the detuning grid."""
    records = sweep_detuning(config, workers)
    n = len(config.deltas)
    return [records[k * n:(k + 1) * n] for k in range(len(config.j_values))]


def _monitored(delta: float, j: float, config: SweepConfig, cutoffs: tuple[int, int], atoms) -> np.ndarray:
    vals = []
    for n in atoms:
        obs = solve_point(config.params(delta, j, n, cutoffs), config.transpose)
        vals.extend([obs.mean_photon, obs.mean_phonon, obs.log_negativity])
    return np.array(vals)


def _rel_change(x: np.ndarray, y: np.ndarray) -> float:
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1e-300)
    return float(np.max(np.abs(x - y) / scale))


def converge_cutoffs(
    delta: float,
    j: float,
    config: SweepConfig,
    tol: float = 1e-6,
    start: tuple[int, int] = (3, 3),
    max_cutoff: int | None = None,
    atoms: Sequence[int] | None = None,
) -> tuple[int, int]:
    """Smallest cutoffs such that doubling either one, or both, changes <n>,
    <m> and E_N by less than ``tol`` (relative), for every configured atom
    number.  Cutoffs grow by one per round along the failing directions.

    Without pumping the steady state is the vacuum and ``(1, 1)`` is returned.
    """
    max_cutoff = config.max_cutoff if max_cutoff is None else max_cutoff
    atoms = config.atoms if atoms is None else tuple(atoms)
    if config.omega == 0:
        return (1, 1)
    if not tol > 0:
        raise CutoffCeiling(f"tolerance {tol} can never be met")
    nc, nm = start
    while True:
        if nc > max_cutoff or nm > max_cutoff:
            raise CutoffCeiling(
                f"cutoffs ({nc}, {nm}) exceed maximum {max_cutoff} at delta={delta}, j={j}"
            )
        base = _monitored(delta, j, config, (nc, nm), atoms)
        dc = _rel_change(base, _monitored(delta, j, config, (2 * nc, nm), atoms))
        dm = _rel_change(base, _monitored(delta, j, config, (nc, 2 * nm), atoms))
        db = _rel_change(base, _monitored(delta, j, config, (2 * nc, 2 * nm), atoms))
        log.debug(
            "cutoffs (%d, %d): change %.3g (cavity) %.3g (mechanics) %.3g (both)", nc, nm, dc, dm, db
        )
        if max(dc, dm, db) < tol:
            return (nc, nm)
        grow_c = dc >= tol or db >= tol
        grow_m = dm >= tol or db >= tol
        nc += grow_c
        nm += grow_m


def refine_peak(x: Sequence[float], y: Sequence[float], i: int) -> float:
    """Vertex of the parabola through the grid maximum ``i`` and its neighbours.

    Assumes a uniform grid; falls back to ``x[i]`` at the grid edges.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if i <= 0 or i >= len(x) - 1:
        return float(x[i])
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return float(x[i])
    h = x[i + 1] - x[i]
    return float(x[i] + 0.5 * h * (y0 - y2) / denom)


def find_peaks(x: Sequence[float], y: Sequence[float], minima: bool = False) -> list[float]:
    """Refined positions of all strict interior local maxima (or minima)."""
    y = np.asarray(y, dtype=float)
    if minima:
        y = -y
    idx = [i for i in range(1, len(y) - 1) if y[i] > y[i - 1] and y[i] > y[i + 1]]
    return [refine_peak(x, y, i) for i in idx]


def window(center: float, half_width: float, spacing: float) -> list[float]:
    """Grid points ``center + k * spacing`` covering ``[center - hw, center + hw]``.

    Used to evaluate a sub-range of a larger uniform grid.
    """
    k = math.ceil(half_width / spacing)
    return [center + i * spacing for i in range(-k, k + 1)]
