"""Built-in oracle checks run by ``hyperradiance validate``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .liouville import (
    DensityMatrix,
    coupled_splitting,
    dressed_spectrum,
    evolve,
    model_liouvillian,
    steady_state,
)
from .model import ModelParams, mode_operators
from .observables import expectation, log_negativity
from .qspace import HilbertSpace

__all__ = ["CheckResult", "bloch_excited_population", "run_checks", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    skipped: bool = False


def bloch_excited_population(delta: float, omega: float, kappa: float, convention: str = "paper") -> float:
    """Closed-form steady excited population of a driven, decaying qubit.

    The population decay rate is ``2 kappa`` in the ``"paper"`` (doubled-rate) convention and
    ``kappa`` in the standard one.
    """
    gamma = 2.0 * kappa if convention == "paper" else kappa
    return omega**2 / (2.0 * omega**2 + gamma**2 / 4.0 + delta**2)


def _driven_qubit_population(delta: float, omega: float, kappa: float, convention: str) -> float:
    p = ModelParams(
        delta=delta, j_coupling=0.0, omega_pump=omega, kappa=kappa,
        gamma_c=1.0, gamma_m=1.0, n_atoms=1, cavity_cutoff=1, mech_cutoff=1,
        convention=convention,
    )
    rho = steady_state(model_liouvillian(p))
    _, _, (sm,) = mode_operators(rho.space)
    return expectation(sm.dag() @ sm, rho)


def check_bloch(convention: str = "paper") -> CheckResult:
    worst = 0.0
    for delta, omega in [(0.0, 1.0), (0.7, 0.3), (-2.0, 1.5), (5.0, 0.1)]:
        num = _driven_qubit_population(delta, omega, 1.0, convention)
        ref = bloch_excited_population(delta, omega, 1.0, convention)
        worst = max(worst, abs(num - ref))
    return CheckResult(f"bloch[{convention}]", worst <= 1e-9, f"max |P_e - closed form| = {worst:.2e}")


def check_flux(convention: str = "paper", n_points: int = 5, seed: int = 7) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        p = ModelParams(
            delta=rng.uniform(-20, 20),
            j_coupling=rng.uniform(0.1, 20),
            omega_pump=rng.uniform(0.3, 2.0),
            gamma_c=rng.uniform(1, 20),
            gamma_m=rng.uniform(1, 20),
            n_atoms=int(rng.integers(1, 3)),
            cavity_cutoff=3,
            mech_cutoff=3,
            convention=convention,
        )
        rho = steady_state(model_liouvillian(p))
        a, b, _ = mode_operators(rho.space)
        n = expectation(a.dag() @ a, rho)
        m = expectation(b.dag() @ b, rho)
        worst = max(worst, abs(p.gamma_c * n - p.gamma_m * m) / max(p.gamma_c * n, 1e-300))
    return CheckResult(f"flux[{convention}]", worst <= 1e-8, f"max relative flux mismatch = {worst:.2e}")


def check_evolve(convention: str = "paper") -> CheckResult:
    p = ModelParams(delta=0.0, j_coupling=0.1, n_atoms=1, cavity_cutoff=2, mech_cutoff=2, convention=convention)
    L = model_liouvillian(p)
    rho_ss = steady_state(L)
    rho0 = DensityMatrix.basis_state(L.space, (0, 0, 0))
    rho_t = evolve(rho0, L, t_final=50.0 / p.kappa)
    dist = rho_t.trace_distance(rho_ss)
    return CheckResult(f"evolve[{convention}]", dist <= 1e-6, f"trace distance after t=50/kappa = {dist:.2e}")


def check_negativity(convention: str = "paper") -> CheckResult:
    space = HilbertSpace((2, 2))
    worst = 0.0
    for theta in np.linspace(0.0, math.pi / 2, 7):
        ket = np.zeros(4, dtype=complex)
        ket[0], ket[3] = math.cos(theta), math.sin(theta)
        en = log_negativity(DensityMatrix.from_ket(space, ket))
        worst = max(worst, abs(en - math.log2(1 + math.sin(2 * theta))))
    prod = DensityMatrix(space, np.kron(np.diag([0.7, 0.3]), np.diag([0.4, 0.6])))
    en_prod = log_negativity(prod)
    ok = worst <= 1e-9 and en_prod <= 1e-10
    return CheckResult("negativity", ok, f"theta family err {worst:.2e}, product E_N {en_prod:.1e}")


def check_dressed(convention: str = "paper") -> CheckResult:
    worst = 0.0
    for j in (0.1, 1.0, 100.0):
        for n_atoms, factor in ((1, 2.0), (2, 2.0 * math.sqrt(2))):
            p = ModelParams(delta=0.0, j_coupling=j, omega_pump=0.0, n_atoms=n_atoms, cavity_cutoff=2, mech_cutoff=2)
            split = coupled_splitting(dressed_spectrum(p), p.space())
            worst = max(worst, abs(split - factor * j) / (factor * j))
    return CheckResult("dressed", worst <= 1e-9, f"max relative splitting error = {worst:.2e}")


CHECKS: dict[str, Callable[[str], CheckResult]] = {
    "bloch": check_bloch,
    "flux": check_flux,
    "evolve": check_evolve,
    "negativity": check_negativity,
    "dressed": check_dressed,
}


def run_checks(convention: str = "paper", quick: bool = False) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        if quick and name == "evolve":
            results.append(CheckResult(f"{name}[{convention}]", True, "skipped (--quick)", skipped=True))
            continue
        try:
            results.append(fn(convention))
        except Exception as exc:  # a crash is a failed check, not a crashed validator
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results
