"""Scalar observables of a steady state.

Every bosonic quantity is evaluated on the photon-phonon reduced state, so
the routines below accept either a full state (atoms, cavity, mechanics) or a
state that already has the atoms traced out.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

import numpy as np

from .errors import DenominatorTooSmall, HermitianExpectationComplex, OccupationTooSmall
from .liouville import DensityMatrix
from .qspace import HilbertSpace, Operator, embed, ladder

__all__ = [
    "OCCUPATION_FLOOR",
    "ObservableSet",
    "expectation",
    "partial_trace",
    "bosonic_state",
    "g2_auto",
    "g2_cross",
    "log_negativity",
    "radiance",
    "classify_radiance",
    "compute_observables",
]

#: Occupations below this make normalised correlations undefined.
OCCUPATION_FLOOR = 1e-12
IMAG_TOL = 1e-10


def expectation(A: Operator, rho: DensityMatrix, hermitian: bool | None = None) -> complex | float:
    """``Tr(A rho)``.

    For Hermitian ``A`` (detected automatically unless ``hermitian`` is
    given) the imaginary part is checked against ``1e-10`` and dropped.
    """
    if A.space != rho.space:
        raise ValueError(f"space mismatch: {A.space.dims} vs {rho.space.dims}")
    if A.is_sparse:
        val = complex(A.data.multiply(rho.data.T).sum())
    else:
        val = complex(np.einsum("ij,ji->", A.data, rho.data))
    if hermitian is None:
        hermitian = A.is_hermitian()
    if not hermitian:
        return val
    if abs(val.imag) > IMAG_TOL:
        raise HermitianExpectationComplex(f"<A> = {val} for Hermitian A")
    return val.real


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Reduce ``rho`` to the subsystems listed in ``keep`` (order preserved)."""
    space = rho.space
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= space.n_sites:
        raise IndexError(f"subsystem indices {keep} out of range for {space.n_sites} sites")
    n = space.n_sites
    if keep == list(range(n)):
        return DensityMatrix(space, rho.data.copy())
    tensor = rho.data.reshape(space.dims + space.dims)
    # einsum letters: row indices 0..n-1, column indices n..2n-1
    row = list(range(n))
    col = [k if k not in keep else n + k for k in range(n)]
    out = [k for k in keep] + [n + k for k in keep]
    reduced = np.einsum(tensor, row + col, out)
    dims = tuple(space.dims[k] for k in keep)
    n_atoms = sum(1 for k in keep if k < space.n_atoms)
    d = int(np.prod(dims))
    return DensityMatrix(HilbertSpace(dims, n_atoms=n_atoms), reduced.reshape(d, d))


def bosonic_state(rho: DensityMatrix) -> DensityMatrix:
    """Photon-phonon reduced state; identity on states without atoms."""
    space = rho.space
    if space.n_sites != space.n_atoms + 2:
        raise ValueError(f"expected atoms followed by two bosonic modes, got dims {space.dims}")
    if space.n_atoms == 0:
        return rho
    return partial_trace(rho, [space.cavity_site, space.mech_site])


def _moments(rho_nm: DensityMatrix) -> dict[str, float]:
    space = rho_nm.space
    a = embed(space, 0, ladder(space.dims[0]))
    b = embed(space, 1, ladder(space.dims[1]))
    na = a.dag() @ a
    nb = b.dag() @ b
    ops = {
        "n": na,
        "m": nb,
        "nn": a.dag() @ a.dag() @ a @ a,
        "mm": b.dag() @ b.dag() @ b @ b,
        "nm": a.dag() @ b.dag() @ b @ a,
    }
    return {k: expectation(op, rho_nm, hermitian=True) for k, op in ops.items()}


def _ratio(num: float, occ: Iterable[float], what: str) -> float:
    occ = list(occ)
    if min(occ) < OCCUPATION_FLOOR:
        raise OccupationTooSmall(f"{what}: occupation {min(occ):.3g} below {OCCUPATION_FLOOR}")
    return num / math.prod(occ)


def g2_auto(rho: DensityMatrix, mode: str = "photon") -> float:
    """Equal-time ``<c^dag c^dag c c> / <c^dag c>^2`` for ``c = a`` or ``b``.

    Raises :class:`OccupationTooSmall` when ``<c^dag c> < 1e-12``.
    """
    if mode not in ("photon", "phonon"):
        raise ValueError(f"mode must be 'photon' or 'phonon', got {mode!r}")
    mom = _moments(bosonic_state(rho))
    if mode == "photon":
        return _ratio(mom["nn"], [mom["n"]] * 2, "g2 photon")
    return _ratio(mom["mm"], [mom["m"]] * 2, "g2 phonon")


def g2_cross(rho: DensityMatrix) -> float:
    """``<a^dag b^dag b a> / (<a^dag a><b^dag b>)``."""
    mom = _moments(bosonic_state(rho))
    return _ratio(mom["nm"], [mom["n"], mom["m"]], "g2 cross")


def log_negativity(rho: DensityMatrix, space: HilbertSpace | None = None, transpose: str = "photon") -> float:
    """``log2`` of the trace norm of the partially transposed photon-phonon state.

    Atoms are traced out first.  Results within ``1e-10`` of zero are
    returned as exactly zero.
    """
    if space is not None and space != rho.space:
        raise ValueError("rho does not live on the given space")
    if transpose not in ("photon", "phonon"):
        raise ValueError(f"transpose must be 'photon' or 'phonon', got {transpose!r}")
    red = bosonic_state(rho)
    dn, dm = red.space.dims
    t = red.data.reshape(dn, dm, dn, dm)
    t = t.transpose(2, 1, 0, 3) if transpose == "photon" else t.transpose(0, 3, 2, 1)
    pt = t.reshape(dn * dm, dn * dm)
    pt = 0.5 * (pt + pt.conj().T)
    norm = float(np.abs(np.linalg.eigvalsh(pt)).sum())
    en = math.log2(norm)
    return 0.0 if abs(en) <= 1e-10 else en


def radiance(mean_photon_two_atom: float, mean_photon_one_atom: float) -> float:
    """Excess two-atom emission over twice the one-atom emission, normalised."""
    if not mean_photon_one_atom > 1e-14:
        raise DenominatorTooSmall(f"one-atom mean photon number {mean_photon_one_atom:.3g} too small")
    n1 = mean_photon_one_atom
    return (mean_photon_two_atom - 2.0 * n1) / (2.0 * n1)


def classify_radiance(r: float | None) -> str:
    if r is None or not np.isfinite(r):
        return "undefined"
    if r > 1:
        return "hyperradiance"
    if r > 0:
        return "superradiance"
    if r < 0:
        return "subradiance"
    return "uncorrelated"


@dataclass
class ObservableSet:
    mean_photon: float
    mean_phonon: float
    g2_photon: float | None
    g2_phonon: float | None
    g2_cross: float | None
    log_negativity: float
    residual: float | None = None
    cutoffs: tuple[int, int] | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cutoffs"] = list(self.cutoffs) if self.cutoffs else None
        return d


def compute_observables(rho: DensityMatrix, transpose: str = "photon") -> ObservableSet:
    """Means, correlations and log-negativity; undefined ratios become ``None``
    and are listed in ``flags``."""
    red = bosonic_state(rho)
    mom = _moments(red)
    flags = []

    def guarded(name, num, occ):
        try:
            return _ratio(num, occ, name)
        except OccupationTooSmall:
            flags.append(f"{name}_undefined")
            return None

    g2n = guarded("g2n", mom["nn"], [mom["n"]] * 2)
    g2m = guarded("g2m", mom["mm"], [mom["m"]] * 2)
    g2nm = guarded("g2nm", mom["nm"], [mom["n"], mom["m"]])
    space = rho.space
    cutoffs = (space.dims[space.cavity_site] - 1, space.dims[space.mech_site] - 1)
    return ObservableSet(
        mean_photon=max(mom["n"], 0.0),
        mean_phonon=max(mom["m"], 0.0),
        g2_photon=g2n,
        g2_phonon=g2m,
        g2_cross=g2nm,
        log_negativity=log_negativity(red, transpose=transpose),
        residual=rho.residual,
        cutoffs=cutoffs,
        flags=flags,
    )
