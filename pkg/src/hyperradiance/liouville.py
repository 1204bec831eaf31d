"""Lindblad superoperators, steady states, time evolution and dressed states.

Density matrices are vectorised column-wise, so that
``vec(A X B) = (B^T kron A) vec(X)``.
"""
from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonUniqueSteadyState, NotConverged, StepUnstable
from .model import CONVENTIONS, ModelParams, collapse_channels, hamiltonian, pair_charge
from .qspace import HilbertSpace, Operator

__all__ = [
    "DENSE_SUPEROP_MAX_DIM",
    "Superoperator",
    "DensityMatrix",
    "build_liouvillian",
    "model_liouvillian",
    "steady_state",
    "evolve",
    "suggest_dt",
    "one_excitation_basis",
    "dressed_spectrum",
    "coupled_splitting",
    "vec",
    "unvec",
]

log = logging.getLogger(__name__)

#: Superoperators for Hilbert dimensions up to this are kept dense.
DENSE_SUPEROP_MAX_DIM = 32

#: Constrained systems with a 1-norm condition estimate above this are rejected.
COND_LIMIT = 1e13

#: Residual-correction passes after each direct solve.
REFINE_STEPS = 2


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True)
class DensityMatrix:
    """State on a :class:`HilbertSpace` with optional solver metadata."""

    space: HilbertSpace
    data: np.ndarray
    residual: float | None = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        n = self.space.total_dim
        if arr.shape != (n, n):
            raise ValueError(f"density matrix shape {arr.shape} does not match dimension {n}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_ket(cls, space: HilbertSpace, ket: np.ndarray) -> "DensityMatrix":
        ket = np.asarray(ket, dtype=complex).ravel()
        ket = ket / np.linalg.norm(ket)
        return cls(space, np.outer(ket, ket.conj()))

    @classmethod
    def basis_state(cls, space: HilbertSpace, levels: Sequence[int]) -> "DensityMatrix":
        return cls.from_ket(space, space.basis(levels))

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def check(self, herm_tol: float = 1e-10, trace_tol: float = 1e-10, psd_tol: float = 1e-8) -> None:
        """Raise ``ValueError`` unless the state is Hermitian, unit trace and PSD."""
        if self.hermiticity_error() > herm_tol:
            raise ValueError(f"not Hermitian: max|rho - rho^dag| = {self.hermiticity_error():.3g}")
        if abs(self.trace() - 1) > trace_tol:
            raise ValueError(f"trace {self.trace():.12g} != 1")
        lam = self.min_eigenvalue()
        if lam < -psd_tol:
            raise ValueError(f"not positive semidefinite: min eigenvalue {lam:.3g}")

    def trace_distance(self, other: "DensityMatrix") -> float:
        if other.space != self.space:
            raise ValueError("space mismatch")
        diff = self.data - other.data
        diff = 0.5 * (diff + diff.conj().T)
        return 0.5 * float(np.abs(np.linalg.eigvalsh(diff)).sum())


class Superoperator:
    """Matrix acting on column-vectorised density matrices."""

    __slots__ = ("space", "matrix", "convention", "rate_scale", "charge")

    def __init__(
        self,
        space: HilbertSpace,
        matrix,
        convention: str = "paper",
        rate_scale: float = 1.0,
        charge: np.ndarray | None = None,
    ):
        n = space.total_dim**2
        if matrix.shape != (n, n):
            raise ValueError(f"superoperator shape {matrix.shape} does not match {n}")
        self.space = space
        self.matrix = matrix
        self.convention = convention
        self.rate_scale = rate_scale
        self.charge = charge

    def sector(self, q: float = 0.0) -> np.ndarray:
        """Vectorised indices ``(i, j)`` with ``charge[i] - charge[j] == q``.

        Without a registered charge every index is returned.
        """
        d = self.space.total_dim
        if self.charge is None:
            return np.arange(d * d)
        diff = self.charge[:, None] - self.charge[None, :]
        return np.flatnonzero(vec(np.abs(diff - q) < 1e-9))

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def apply(self, rho: np.ndarray | DensityMatrix) -> np.ndarray:
        """Return ``L(rho)`` as a matrix."""
        data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
        d = self.space.total_dim
        return unvec(self.matrix @ vec(data), d)

    def norm_inf(self) -> float:
        if self.is_sparse:
            return float(abs(self.matrix).sum(axis=1).max())
        return float(np.abs(self.matrix).sum(axis=1).max())

    def trace_functional(self) -> np.ndarray:
        d = self.space.total_dim
        return vec(np.eye(d))

    def trace_residual(self) -> float:
        """max |Tr L(X)| over matrix units X; zero for a trace-preserving map."""
        row = self.trace_functional() @ self.matrix
        return float(np.max(np.abs(row)))


def build_liouvillian(
    H: Operator,
    channels: Sequence[tuple[float, Operator]],
    convention: str = "paper",
    sparse: bool | None = None,
    charge: np.ndarray | None = None,
) -> Superoperator:
    """Lindblad generator ``-i[H, .] + sum_k D_k``.

    With ``convention='paper'`` each channel contributes
    ``rate (2 c rho c^dag - c^dag c rho - rho c^dag c)``; with
    ``'standard'`` it contributes ``rate (c rho c^dag - {c^dag c, rho}/2)``.

    ``charge`` optionally gives the diagonal of an operator ``K`` (in the
    product basis) whose phase rotations leave the generator invariant.  The
    generator is then block diagonal in ``K_row - K_col`` and the steady
    state can be solved in the zero block only.  The claimed symmetry is
    verified here.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}, got {convention!r}")
    space = H.space
    for _, c in channels:
        if c.space != space:
            raise ValueError(f"collapse operator space {c.space.dims} != Hamiltonian space {space.dims}")
    d = space.total_dim
    if sparse is None:
        sparse = d > DENSE_SUPEROP_MAX_DIM
    jump_w, anti_w = (2.0, 1.0) if convention == "paper" else (1.0, 0.5)

    eye = sp.identity(d, dtype=complex, format="csr")
    h = H.to_sparse()
    L = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    rates = [0.0]
    for rate, op in channels:
        if rate == 0:
            continue
        c = op.to_sparse()
        cdc = (c.conj().T @ c).tocsr()
        L = L + rate * (
            jump_w * sp.kron(c.conj(), c) - anti_w * (sp.kron(eye, cdc) + sp.kron(cdc.T, eye))
        )
        rates.append(jump_w * rate)
    h_scale = float(abs(h).sum(axis=1).max()) if h.nnz else 0.0
    if charge is not None:
        charge = np.asarray(charge, dtype=float)
        _check_charge(L.tocoo(), charge)
    L = L.tocsc() if sparse else L.toarray()
    return Superoperator(space, L, convention, rate_scale=max(max(rates), h_scale), charge=charge)


def model_liouvillian(p: ModelParams, use_symmetry: bool = True) -> Superoperator:
    """Generator for the full model, registering the conserved photon-phonon
    pair charge unless ``use_symmetry`` is off."""
    space = p.space()
    charge = pair_charge(space) if use_symmetry else None
    return build_liouvillian(hamiltonian(p, space), collapse_channels(p, space), p.convention, charge=charge)


def _check_charge(L: sp.coo_matrix, charge: np.ndarray) -> None:
    d = len(charge)
    q = charge[np.arange(d * d) % d] - charge[np.arange(d * d) // d]
    bad = np.abs(q[L.row] - q[L.col]) > 1e-9
    if np.any(bad) and np.max(np.abs(L.data[bad])) > 0:
        raise ValueError("Liouvillian does not conserve the supplied charge")


def _constrained_system(M, trace_row: np.ndarray, row: int):
    """Replace equation ``row`` of ``M x = 0`` by ``trace_row . x = 1``."""
    n = M.shape[0]
    if sp.issparse(M):
        mask = np.ones(n)
        mask[row] = 0.0
        A = sp.diags(mask) @ M
        cols = np.flatnonzero(trace_row)
        A = (A + sp.csr_matrix((trace_row[cols], (np.full(len(cols), row), cols)), shape=A.shape)).tocsc()
        A.eliminate_zeros()
    else:
        A = np.array(M, dtype=complex)
        A[row, :] = trace_row
    b = np.zeros(n, dtype=complex)
    b[row] = 1.0
    return A, b


def _cond_estimate(A, solve, solve_h) -> float:
    n = A.shape[0]
    inv = spla.LinearOperator((n, n), matvec=solve, rmatvec=solve_h, dtype=complex)
    norm_a = spla.onenormest(A) if sp.issparse(A) else float(np.abs(A).sum(axis=0).max())
    return float(norm_a * spla.onenormest(inv))


def _solve_direct(A, b) -> tuple[np.ndarray, float]:
    if sp.issparse(A):
        try:
            lu = spla.splu(A)
        except RuntimeError as exc:
            raise NonUniqueSteadyState(f"constrained Liouvillian is singular: {exc}") from exc
        solve = lu.solve
        solve_h = lambda y: lu.solve(y, trans="H")  # noqa: E731
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", la.LinAlgWarning)
            lu_piv = la.lu_factor(A, check_finite=True)
        if np.any(np.diag(lu_piv[0]) == 0):
            raise NonUniqueSteadyState("constrained Liouvillian is exactly singular")
        solve = lambda y: la.lu_solve(lu_piv, y)  # noqa: E731
        solve_h = lambda y: la.lu_solve(lu_piv, y, trans=2)  # noqa: E731
    cond = _cond_estimate(A, solve, solve_h)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NonUniqueSteadyState(f"constrained Liouvillian is ill-conditioned (cond ~ {cond:.3g})")
    x = solve(b)
    # iterative refinement: small populations otherwise carry the LU
    # rounding error of the largest ones
    for _ in range(REFINE_STEPS):
        x = x + solve(b - A @ x)
    return x, cond


def _solve_iterative(A, b, tol: float, maxiter: int) -> np.ndarray:
    A = sp.csc_matrix(A)
    try:
        ilu = spla.spilu(A, drop_tol=1e-6, fill_factor=20)
        M = spla.LinearOperator(A.shape, ilu.solve, dtype=complex)
    except RuntimeError:
        M = None
    x, info = spla.gmres(A, b, rtol=tol, atol=0.0, restart=200, maxiter=maxiter, M=M)
    if info != 0:
        raise NotConverged(f"GMRES did not converge (info={info})")
    return x


def _solve_for_row(M, trace_row, row: int, method: str, tol: float, maxiter: int):
    A, b = _constrained_system(M, trace_row, row)
    if method == "direct":
        try:
            return _solve_direct(A, b)
        except MemoryError:
            log.warning("sparse LU ran out of memory; falling back to GMRES")
            method = "iterative"
    if method == "iterative":
        return _solve_iterative(A, b, tol, maxiter), float("nan")
    raise ValueError(f"unknown method {method!r}")


def steady_state(
    L: Superoperator,
    method: str = "direct",
    verify_uniqueness: bool = False,
    seed: int = 0,
    tol: float = 1e-12,
    maxiter: int = 1000,
    use_symmetry: bool = True,
) -> DensityMatrix:
    """Unit-trace kernel vector of ``L``.

    Among the population equations (rows acting on ``rho_kk``), the one
    whose diagonal entry of ``L`` is largest in magnitude is replaced by the
    trace condition and the resulting nonsingular system is solved (sparse
    LU by default, GMRES as fallback or on request).  When ``L`` carries a
    conserved charge and ``use_symmetry`` is set, only the zero-charge block
    is solved; a unique steady state always lives there.

    Raises
    ------
    NonUniqueSteadyState
        The constrained system is numerically singular.
    NotConverged
        The iterative solver did not converge.
    """
    d = L.space.total_dim
    idx = L.sector(0.0) if use_symmetry else np.arange(d * d)
    M = L.matrix
    if len(idx) < d * d:
        M = M[idx][:, idx] if sp.issparse(M) else M[np.ix_(idx, idx)]
    trace_row = vec(np.eye(d))[idx]
    # only population rows carry the trace dependency; dropping any other
    # row leaves the system singular
    pop_rows = np.flatnonzero(trace_row)
    diag = np.abs(M.diagonal()[pop_rows])
    row = int(pop_rows[np.argmax(diag)])

    def solve(r):
        x_sub, cond = _solve_for_row(M, trace_row, r, method, tol, maxiter)
        x = np.zeros(d * d, dtype=complex)
        x[idx] = x_sub
        rho = unvec(x, d)
        rho = 0.5 * (rho + rho.conj().T)
        return rho / np.trace(rho).real, cond

    rho, cond = solve(row)
    residual = float(np.max(np.abs(L.matrix @ vec(rho))))
    info = {"row": int(idx[row]), "cond_estimate": cond, "method": method, "block_size": len(idx)}

    if verify_uniqueness:
        rng = np.random.default_rng(seed)
        others = pop_rows[pop_rows != row]
        alt = int(rng.choice(others)) if len(others) else row
        rho2, _ = solve(alt)
        dist = 0.5 * float(np.abs(np.linalg.eigvalsh(rho - rho2)).sum())
        info["uniqueness_distance"] = dist
        if dist > 1e-8:
            raise NonUniqueSteadyState(
                f"steady state depends on the replaced row (trace distance {dist:.3g})"
            )
    log.debug("steady state: block=%d cond=%.3g residual=%.3g", len(idx), cond, residual)
    return DensityMatrix(L.space, rho, residual=residual, info=info)


def suggest_dt(L: Superoperator) -> float:
    """Conservative RK4 step: ``0.01 / max(rates, ||H||)``."""
    return 0.01 / max(L.rate_scale, 1e-12)


def evolve(
    rho0: DensityMatrix,
    L: Superoperator,
    t_final: float,
    dt: float | None = None,
    drift_limit: float = 1e-6,
) -> DensityMatrix:
    """Fixed-step RK4 integration of ``d vec(rho)/dt = L vec(rho)``.

    The trace is renormalised after every step; the largest correction is
    logged and recorded in ``info['max_renormalisation']``.
    """
    if rho0.space != L.space:
        raise ValueError("state and superoperator live on different spaces")
    if t_final < 0:
        raise ValueError("t_final must be nonnegative")
    if dt is None:
        dt = suggest_dt(L)
    if dt <= 0:
        raise ValueError("dt must be positive")
    d = L.space.total_dim
    steps = max(1, math.ceil(t_final / dt)) if t_final > 0 else 0
    h = t_final / steps if steps else 0.0
    M = sp.csr_matrix(L.matrix)  # Liouvillians are sparse even when stored dense
    tr = L.trace_functional()
    v = vec(rho0.data).astype(complex)
    worst = 0.0
    for step in range(steps):
        k1 = M @ v
        k2 = M @ (v + 0.5 * h * k1)
        k3 = M @ (v + 0.5 * h * k2)
        k4 = M @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t = tr @ v
        drift = abs(t - 1.0)
        if not np.isfinite(drift) or drift > drift_limit:
            raise StepUnstable(f"trace drift {drift:.3g} at step {step} (dt={h:.3g})")
        worst = max(worst, drift)
        v = v / t
    log.debug("evolve: %d steps of %.3g, max trace renormalisation %.3g", steps, h, worst)
    rho = unvec(v, d)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(L.space, rho, info={"steps": steps, "dt": h, "max_renormalisation": worst})


def one_excitation_basis(space: HilbertSpace) -> list[tuple[int, ...]]:
    """Product states spanning the lowest dressed manifold.

    All atoms in ``g`` with cavity and mechanical occupations in {0, 1}, plus
    a single excited atom with both modes empty.
    """
    n = space.n_atoms
    ground = (0,) * n
    states = [ground + (c, m) for c, m in itertools.product((0, 1), repeat=2)]
    for i in range(n):
        atoms = tuple(1 if k == i else 0 for k in range(n))
        states.append(atoms + (0, 0))
    return states


def dressed_spectrum(
    p: ModelParams, space: HilbertSpace | None = None, manifold: bool = True
) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of the undriven Hamiltonian, sorted by energy.

    With ``manifold=True`` only eigenpairs inside the one-excitation span are
    returned.  That span is invariant under ``H``, so it is diagonalised as a
    block; this keeps the returned vectors clean even when energies are
    degenerate with states outside the span.
    """
    if p.omega_pump != 0:
        raise ValueError("dressed states are defined for omega_pump = 0")
    if space is None:
        space = p.space()
    H = hamiltonian(p, space).to_dense()
    if not manifold:
        w, v = np.linalg.eigh(H)
        return [(float(w[k]), v[:, k]) for k in range(len(w))]

    idx = [space.index(s) for s in one_excitation_basis(space)]
    P = np.zeros((space.total_dim, len(idx)), dtype=complex)
    P[idx, np.arange(len(idx))] = 1.0
    leak = H @ P - P @ (P.conj().T @ H @ P)
    if np.max(np.abs(leak)) > 1e-12 * max(1.0, np.max(np.abs(H))):
        raise RuntimeError("one-excitation span is not invariant under H")
    w, v = np.linalg.eigh(P.conj().T @ H @ P)
    return [(float(w[k]), P @ v[:, k]) for k in range(len(w))]


def coupled_splitting(pairs: Sequence[tuple[float, np.ndarray]], space: HilbertSpace, tol: float = 1e-9) -> float:
    """Energy spread of the dressed levels containing the photon-phonon pair state.

    The pair state is ``|g..g 1 1>``; for ``J = 0`` it is itself an eigenstate
    and the spread is zero.
    """
    pair = space.index((0,) * space.n_atoms + (1, 1))
    energies = [w for w, v in pairs if abs(v[pair]) ** 2 > tol]
    if not energies:
        raise ValueError("no dressed level overlaps the photon-phonon pair state")
    return max(energies) - min(energies)
