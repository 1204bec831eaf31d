"""Composite Hilbert spaces and operator algebra.

Subsystems are always ordered atoms first, then the cavity mode, then the
mechanical mode.  Qubits use the basis ordering ``g = 0``, ``e = 1`` so that
the atomic lowering operator is ``ladder(2)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SPARSE_THRESHOLD",
    "HilbertSpace",
    "Operator",
    "make_space",
    "ladder",
    "embed",
    "identity",
    "commutator",
]

#: Operators on spaces with total dimension above this are stored sparse.
SPARSE_THRESHOLD = 128

Matrix = Union[np.ndarray, sp.spmatrix, sp.sparray]


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor-product space.

    Parameters
    ----------
    dims : tuple of int
        Local dimensions, atoms first (each 2), then cavity, then mechanics.
    n_atoms : int
        Number of leading two-level factors.
    """

    dims: tuple[int, ...]
    n_atoms: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if not dims:
            raise ValueError("a HilbertSpace needs at least one factor")
        if any(d < 2 for d in dims):
            raise ValueError(f"every local dimension must be >= 2, got {dims}")
        if not 0 <= self.n_atoms <= len(dims):
            raise ValueError(f"n_atoms={self.n_atoms} inconsistent with dims {dims}")
        if any(d != 2 for d in dims[: self.n_atoms]):
            raise ValueError(f"atomic factors must have dimension 2, got {dims}")

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def cavity_site(self) -> int:
        return self.n_atoms

    @property
    def mech_site(self) -> int:
        return self.n_atoms + 1

    @property
    def cavity_cutoff(self) -> int:
        return self.dims[self.cavity_site] - 1

    @property
    def mech_cutoff(self) -> int:
        return self.dims[self.mech_site] - 1

    @property
    def sparse(self) -> bool:
        return self.total_dim > SPARSE_THRESHOLD

    def index(self, levels: Sequence[int]) -> int:
        """Flat (row-major) index of the product basis state ``levels``."""
        if len(levels) != self.n_sites:
            raise ValueError(f"expected {self.n_sites} levels, got {len(levels)}")
        for k, d in zip(levels, self.dims):
            if not 0 <= k < d:
                raise IndexError(f"level {k} out of range for local dimension {d}")
        return int(np.ravel_multi_index(tuple(levels), self.dims))

    def levels(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`index`."""
        return tuple(int(k) for k in np.unravel_index(index, self.dims))

    def basis(self, levels: Sequence[int]) -> np.ndarray:
        vec = np.zeros(self.total_dim, dtype=complex)
        vec[self.index(levels)] = 1.0
        return vec

    def label(self, levels: Sequence[int]) -> str:
        """Ket label in the ``|x y c d>`` notation, e.g. ``|ge00>``."""
        atoms = "".join("ge"[k] for k in levels[: self.n_atoms])
        bosons = "".join(str(k) for k in levels[self.n_atoms:])
        return f"|{atoms}{bosons}>"


def make_space(n_atoms: int, cavity_cutoff: int, mech_cutoff: int) -> HilbertSpace:
    if n_atoms not in (1, 2):
        raise ValueError(f"n_atoms must be 1 or 2, got {n_atoms}")
    if cavity_cutoff < 1 or mech_cutoff < 1:
        raise ValueError(
            f"Fock cutoffs must be >= 1, got ({cavity_cutoff}, {mech_cutoff})"
        )
    dims = (2,) * n_atoms + (cavity_cutoff + 1, mech_cutoff + 1)
    return HilbertSpace(dims, n_atoms=n_atoms)


def ladder(local_dim: int) -> np.ndarray:
    """Truncated bosonic lowering operator with ``A[k-1, k] = sqrt(k)``."""
    if local_dim < 2:
        raise ValueError(f"local_dim must be >= 2, got {local_dim}")
    return np.diag(np.sqrt(np.arange(1, local_dim, dtype=float)), 1).astype(complex)


def _as_storage(mat: Matrix, sparse: bool) -> Matrix:
    if sparse:
        return sp.csr_matrix(mat, dtype=complex)
    if sp.issparse(mat):
        return mat.toarray().astype(complex)
    return np.asarray(mat, dtype=complex)


class Operator:
    """Complex matrix acting on a :class:`HilbertSpace`.

    Storage is dense or CSR sparse depending on the space size; mixed
    arithmetic between the two is handled transparently.  Instances are
    treated as immutable.
    """

    __slots__ = ("space", "data")

    def __init__(self, space: HilbertSpace, data: Matrix, sparse: bool | None = None):
        n = space.total_dim
        if data.shape != (n, n):
            raise ValueError(f"operator shape {data.shape} does not match space dimension {n}")
        if sparse is None:
            sparse = space.sparse
        self.space = space
        self.data = _as_storage(data, sparse)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def to_dense(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else np.array(self.data)

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.data)

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            return NotImplemented
        if other.space != self.space:
            raise ValueError(f"space mismatch: {self.space.dims} vs {other.space.dims}")
        return None

    def _wrap(self, result: Matrix) -> "Operator":
        return Operator(self.space, result)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.data + other.data)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.data - other.data)

    def __neg__(self):
        return self._wrap(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(self.data / scalar)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return self._wrap(self.data @ other.data)
        return self.data @ np.asarray(other)

    def adjoint(self) -> "Operator":
        return self._wrap(self.data.conj().T)

    dag = adjoint

    def trace(self) -> complex:
        return complex(self.data.diagonal().sum())

    def norm_max(self) -> float:
        """Largest absolute element."""
        if self.is_sparse:
            return float(abs(self.data).max()) if self.data.nnz else 0.0
        return float(np.max(np.abs(self.data))) if self.data.size else 0.0

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(self.norm_max(), 1.0)
        return (self - self.adjoint()).norm_max() <= tol * scale

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvals(self.to_dense())

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"Operator(dims={self.space.dims}, {kind})"


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, sp.identity(space.total_dim, dtype=complex, format="csr"))


def embed(space: HilbertSpace, site: int, local_op: Matrix) -> Operator:
    """Dilate ``local_op`` to ``I x ... x local_op x ... x I`` on ``space``."""
    if not 0 <= site < space.n_sites:
        raise IndexError(f"site {site} out of range for {space.n_sites} subsystems")
    local = sp.csr_matrix(local_op, dtype=complex)
    d = space.dims[site]
    if local.shape != (d, d):
        raise ValueError(
            f"local operator shape {local.shape} does not match dimension {d} of site {site}"
        )
    factors = [
        local if k == site else sp.identity(dk, dtype=complex, format="csr")
        for k, dk in enumerate(space.dims)
    ]
    full = reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)
    return Operator(space, full)


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a
