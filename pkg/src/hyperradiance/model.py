"""Effective Hamiltonian and dissipation channels of the hybrid system.

Frequencies are in units of the atomic decay rate ``kappa`` unless stated
otherwise.  The Hamiltonian, in the frame rotating at the mechanical
frequency, is::

    H = delta a^dag a + sum_i [ delta s+_i s-_i
                                - J (s+_i a b + s-_i a^dag b^dag)
                                + Omega (s+_i + s-_i) ]
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

from .qspace import HilbertSpace, Operator, embed, ladder, make_space

__all__ = [
    "CONVENTIONS",
    "LabParams",
    "EffectiveParams",
    "ModelParams",
    "ModelValidityWarning",
    "effective_params",
    "hamiltonian",
    "collapse_channels",
    "mode_operators",
    "pair_charge",
]

log = logging.getLogger(__name__)

#: ``paper``: rate * (2 c rho c^dag - {c^dag c, rho});
#: ``standard``: rate * (c rho c^dag - {c^dag c, rho} / 2).
CONVENTIONS = ("paper", "standard")


class ModelValidityWarning(UserWarning):
    """Lab parameters fall outside the regime where the effective model holds."""


@dataclass(frozen=True)
class LabParams:
    """Lab-frame frequencies and couplings, all in one consistent unit."""

    omega_c: float
    omega_m: float
    omega_a: float
    omega_p: float
    g_ca: float
    g_ma: float
    Omega: float = 0.0

    def __post_init__(self):
        for name in ("omega_c", "omega_m", "omega_a", "omega_p"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("g_ca", "g_ma", "Omega"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative, got {getattr(self, name)}")


@dataclass(frozen=True)
class EffectiveParams:
    delta: float
    j_coupling: float
    omega_pump: float
    eta: float
    epsilon: float
    consistency_error: float
    consistent: bool
    weak_displacement: bool
    weak_coupling: bool

    @property
    def valid(self) -> bool:
        return self.consistent and self.weak_displacement and self.weak_coupling


def effective_params(lab: LabParams, eta_max: float = 0.1, tol: float | None = None) -> EffectiveParams:
    """Map lab-frame parameters onto the effective model.

    ``J = g_ma g_ca / w_m``, ``eps = g_ma^2 / w_m``, ``eta = g_ma / w_m`` and
    ``delta = w_a - w_p``.  The detuning is required to agree with
    ``w_c - (w_p - w_m)`` up to the polaron shift ``eps`` (plus ``tol``,
    default ``1e-9 * w_p``); violations and a large ``eta`` only warn.
    """
    eta = lab.g_ma / lab.omega_m
    epsilon = lab.g_ma**2 / lab.omega_m
    j = lab.g_ma * lab.g_ca / lab.omega_m
    delta = lab.omega_a - lab.omega_p
    mismatch = delta - (lab.omega_c - (lab.omega_p - lab.omega_m))
    if tol is None:
        tol = 1e-9 * lab.omega_p
    consistent = abs(mismatch) <= epsilon + tol
    weak_disp = eta < eta_max
    weak_coup = max(lab.g_ca, lab.g_ma) < eta_max * min(lab.omega_a, lab.omega_m, lab.omega_c)

    if not weak_disp:
        warnings.warn(
            f"eta = g_ma/omega_m = {eta:.3g} >= {eta_max}; the linearised displacement is unreliable",
            ModelValidityWarning,
            stacklevel=2,
        )
    if not consistent:
        warnings.warn(
            f"detuning mismatch {mismatch:.3g}: omega_a - omega_p != omega_c - (omega_p - omega_m)",
            ModelValidityWarning,
            stacklevel=2,
        )
    if not weak_coup:
        warnings.warn(
            "couplings are not small compared with the bare frequencies",
            ModelValidityWarning,
            stacklevel=2,
        )
    return EffectiveParams(
        delta=delta,
        j_coupling=j,
        omega_pump=lab.Omega,
        eta=eta,
        epsilon=epsilon,
        consistency_error=mismatch,
        consistent=consistent,
        weak_displacement=weak_disp,
        weak_coupling=weak_coup,
    )


@dataclass(frozen=True)
class ModelParams:
    """Effective-frame parameters, in units of the atomic decay rate."""

    delta: float
    j_coupling: float
    omega_pump: float = 1.0
    kappa: float = 1.0
    gamma_c: float = 10.0
    gamma_m: float = 10.0
    n_atoms: int = 1
    cavity_cutoff: int = 3
    mech_cutoff: int = 3
    convention: str = "paper"

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.gamma_c < 0 or self.gamma_m < 0:
            raise ValueError("decay rates gamma_c, gamma_m must be nonnegative")
        if self.n_atoms not in (1, 2):
            raise ValueError(f"n_atoms must be 1 or 2, got {self.n_atoms}")
        if self.cavity_cutoff < 1 or self.mech_cutoff < 1:
            raise ValueError("Fock cutoffs must be >= 1")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    def space(self) -> HilbertSpace:
        return make_space(self.n_atoms, self.cavity_cutoff, self.mech_cutoff)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_space(p: ModelParams, space: HilbertSpace) -> None:
    if space != p.space():
        raise ValueError(
            f"space {space.dims} does not match parameters "
            f"(n_atoms={p.n_atoms}, cutoffs=({p.cavity_cutoff}, {p.mech_cutoff}))"
        )


def mode_operators(space: HilbertSpace) -> tuple[Operator, Operator, list[Operator]]:
    """Return ``(a, b, [sigma_minus_i])`` embedded in ``space``."""
    a = embed(space, space.cavity_site, ladder(space.dims[space.cavity_site]))
    b = embed(space, space.mech_site, ladder(space.dims[space.mech_site]))
    sm = [embed(space, i, ladder(2)) for i in range(space.n_atoms)]
    return a, b, sm


def hamiltonian(p: ModelParams, space: HilbertSpace | None = None) -> Operator:
    if space is None:
        space = p.space()
    _check_space(p, space)
    a, b, sms = mode_operators(space)
    ad, bd = a.dag(), b.dag()
    pair_down = a @ b
    pair_up = ad @ bd
    H = p.delta * (ad @ a)
    for sm in sms:
        sp_ = sm.dag()
        H = H + p.delta * (sp_ @ sm)
        H = H - p.j_coupling * (sp_ @ pair_down + sm @ pair_up)
        H = H + p.omega_pump * (sp_ + sm)
    return H


def collapse_channels(p: ModelParams, space: HilbertSpace | None = None) -> list[tuple[float, Operator]]:
    """Individual atomic decay for each atom, then cavity, then mechanics.

    Rates are returned bare; how they enter the dissipator is fixed by the
    Liouvillian convention (see :data:`CONVENTIONS`).
    """
    if space is None:
        space = p.space()
    _check_space(p, space)
    a, b, sms = mode_operators(space)
    channels = [(p.kappa, sm) for sm in sms]
    channels.append((p.gamma_c, a))
    channels.append((p.gamma_m, b))
    return channels


def pair_charge(space: HilbertSpace) -> np.ndarray:
    """Diagonal of ``a^dag a - b^dag b`` in the product basis.

    Photons and phonons are only created or destroyed in pairs, so this
    difference commutes with the Hamiltonian.
    """
    levels = np.indices(space.dims).reshape(space.n_sites, -1)
    return (levels[space.cavity_site] - levels[space.mech_site]).astype(float)
