"""Two-species Bose-Hubbard ring with Peierls phases.

Units: hbar = 1, so energies and the current carry units of C and times are
in hbar/C.

Joint-space convention (used everywhere, including partial traces):
the product state ``|q_A>|q_B>`` sits at ``joint_index(q_A, q_B, d) = q_A*d + q_B``,
which is what ``np.kron(op_A, op_B)`` produces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Union

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .fock import Basis, enumerate_basis, hop

TWO_PI = 2.0 * math.pi

# joint dimension above which operators are assembled sparse
DENSE_LIMIT = 4096

HERMITIAN_RTOL = 1e-12

LABELS = ("kinetic-A", "kinetic-B", "kinetic", "interaction", "current-A", "current-B", "current", "total")

Matrix = Union[np.ndarray, sp.spmatrix, sp.sparray]


def joint_index(index_a: int, index_b: int, d: int) -> int:
    return index_a * d + index_b


def split_joint(index: int, d: int) -> tuple[int, int]:
    return divmod(index, d)


def reduce_phase(phi: float) -> float:
    """Map an angle into [0, 2pi)."""
    r = math.fmod(float(phi), TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True)
class ModelParams:
    """Ring size, particle number and couplings (hbar = 1).

    ``V`` is the *magnitude* of the inter-species attraction; the interaction
    enters as ``-V * n_A n_B``. Phases are stored reduced to [0, 2pi).
    """

    L: int
    N: int
    C: float = 1.0
    U: float = 0.0
    V: float = 0.0
    phi_a: float = 0.0
    phi_b: float = 0.0

    def __post_init__(self):
        enumerate_basis(self.L, self.N)  # domain check
        for name in ("C", "U", "V", "phi_a", "phi_b"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.C < 0:
            raise DomainError(f"tunneling C must be >= 0, got {self.C}")
        if self.U < 0 or self.V < 0:
            raise DomainError(f"U and V are magnitudes and must be >= 0, got U={self.U}, V={self.V}")
        object.__setattr__(self, "phi_a", reduce_phase(self.phi_a))
        object.__setattr__(self, "phi_b", reduce_phase(self.phi_b))

    @property
    def basis(self) -> Basis:
        return enumerate_basis(self.L, self.N)

    @property
    def d(self) -> int:
        return self.basis.dim

    @property
    def joint_dim(self) -> int:
        return self.d**2

    def with_phase(self, phi: float) -> "ModelParams":
        """Same couplings with ``phi_a = phi_b = phi``."""
        return replace(self, phi_a=phi, phi_b=phi)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class HermitianOperator:
    """A Hermitian matrix plus a tag recording what it was assembled from."""

    matrix: Matrix
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown operator label {self.label!r}")
        shape = self.matrix.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"operator must be square, got shape {shape}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.matrix.toarray()
        return np.asarray(self.matrix)

    def __matmul__(self, other):
        return self.matrix @ other

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return HermitianOperator(_as_storage(self.matrix + other.matrix), "total")

    def hermiticity_error(self) -> float:
        """max |M - M^dagger| relative to max |M| (0 for the zero matrix)."""
        m = self.matrix
        if sp.issparse(m):
            diff = abs(m - m.conj().T)
            num = diff.max() if diff.nnz else 0.0
            den = abs(m).max() if m.nnz else 0.0
        else:
            num = np.abs(m - m.conj().T).max(initial=0.0)
            den = np.abs(m).max(initial=0.0)
        return float(num / den) if den > 0 else 0.0

    def is_hermitian(self, rtol: float = HERMITIAN_RTOL) -> bool:
        return self.hermiticity_error() < rtol


def _as_storage(m: Matrix) -> Matrix:
    n = m.shape[0]
    if n <= DENSE_LIMIT:
        return m.toarray() if sp.issparse(m) else np.asarray(m)
    return sp.csr_matrix(m)


@lru_cache(maxsize=32)
def _forward_hops(L: int, N: int) -> sp.csr_matrix:
    """Sum over ring bonds of ``d_j^dagger d_{j+1}`` (real, non-negative entries)."""
    basis = enumerate_basis(L, N)
    rows, cols, vals = [], [], []
    for col, state in enumerate(basis.states):
        for j in range(L):
            moved = hop(state, (j + 1) % L, j)
            if moved is not None:
                new, amp = moved
                rows.append(basis.index(new))
                cols.append(col)
                vals.append(amp)
    d = basis.dim
    out = sp.csr_matrix((vals, (rows, cols)), shape=(d, d), dtype=float)
    out.sum_duplicates()
    return out


def forward_hopping(basis: Basis) -> sp.csr_matrix:
    """``X = sum_j d_j^dagger d_{j+1}`` on one species (ring-periodic)."""
    return _forward_hops(basis.L, basis.N)


def build_kinetic_single(basis: Basis, C: float, phi: float, label: str = "kinetic-A") -> HermitianOperator:
    """``-C sum_j (e^{i phi} d_j^dag d_{j+1} + e^{-i phi} d_{j+1}^dag d_j)`` for one species."""
    X = forward_hopping(basis)
    z = -C * np.exp(1j * phi)
    K = z * X + np.conj(z) * X.T
    return HermitianOperator(_as_storage(K.tocsr()), label)


def build_current(basis: Basis, C: float, phi: float, label: str = "current-A") -> HermitianOperator:
    """Particle current of one species, ``-(iC/L) sum_j (e^{i phi} d_j^dag d_{j+1} - h.c.)``.

    This equals ``(1/L) dK/dphi``, so for eigenstates ``<J_A + J_B> = (1/L) dE/dphi``.
    """
    X = forward_hopping(basis)
    z = -1j * C / basis.L * np.exp(1j * phi)
    J = z * X + np.conj(z) * X.T
    return HermitianOperator(_as_storage(J.tocsr()), label)


def lift_to_joint(op_a: HermitianOperator, op_b: HermitianOperator, label: str | None = None) -> HermitianOperator:
    """``op_a (x) 1 + 1 (x) op_b`` in the A-major joint ordering."""
    if op_a.dim != op_b.dim:
        raise ValueError(f"dimension mismatch: species A has dim {op_a.dim}, species B has {op_b.dim}")
    d = op_a.dim
    eye = sp.identity(d, format="csr")
    A = sp.csr_matrix(op_a.matrix)
    B = sp.csr_matrix(op_b.matrix)
    M = sp.kron(A, eye, format="csr") + sp.kron(eye, B, format="csr")
    if label is None:
        label = op_a.label.split("-")[0] if op_a.label.endswith("-A") else "total"
    return HermitianOperator(_as_storage(M), label)


def interaction_diagonal(basis: Basis, U: float, V: float) -> np.ndarray:
    """Diagonal of ``(U/2) sum_j (n_Aj^2 + n_Bj^2) - V sum_j n_Aj n_Bj`` in joint order."""
    occ = basis.occupations.astype(float)
    sq = 0.5 * (occ**2).sum(axis=1)
    cross = occ @ occ.T
    return (U * (sq[:, None] + sq[None, :]) - V * cross).ravel()


def build_interaction(basis: Basis, U: float, V: float) -> HermitianOperator:
    diag = interaction_diagonal(basis, U, V).astype(complex)
    return HermitianOperator(_as_storage(sp.diags(diag, format="csr")), "interaction")


def build_kinetic(params: ModelParams) -> HermitianOperator:
    basis = params.basis
    ka = build_kinetic_single(basis, params.C, params.phi_a, "kinetic-A")
    kb = build_kinetic_single(basis, params.C, params.phi_b, "kinetic-B")
    return lift_to_joint(ka, kb, "kinetic")


def build_hamiltonian(params: ModelParams) -> HermitianOperator:
    """``K_A + K_B + H_int`` on the joint space of dimension d^2."""
    K = build_kinetic(params)
    H = K.matrix + build_interaction(params.basis, params.U, params.V).matrix
    return HermitianOperator(_as_storage(H), "total")


def build_joint_current(params: ModelParams) -> HermitianOperator:
    """``J_A (x) 1 + 1 (x) J_B`` with each species at its own Peierls phase."""
    basis = params.basis
    ja = build_current(basis, params.C, params.phi_a, "current-A")
    jb = build_current(basis, params.C, params.phi_b, "current-B")
    return lift_to_joint(ja, jb, "current")


def joint_forward_hopping(params: ModelParams) -> sp.csr_matrix:
    """``-C (X (x) 1 + 1 (x) X)``; with a common phase, ``K(phi) = e^{i phi} F + e^{-i phi} F^T``."""
    X = forward_hopping(params.basis)
    eye = sp.identity(X.shape[0], format="csr")
    return (-params.C * (sp.kron(X, eye) + sp.kron(eye, X))).tocsr()
