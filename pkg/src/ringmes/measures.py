"""Entanglement and transport observables on the joint two-species space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, build_joint_current

PSD_ATOL = 1e-12


def _as_matrix(state: np.ndarray, d: int) -> np.ndarray:
    psi = np.asarray(state)
    if psi.ndim != 1 or psi.shape[0] != d * d:
        raise ValueError(f"state of length {psi.shape} does not live on a joint space of dimension {d}^2")
    # rows index species A, columns species B (joint index = a*d + b)
    return psi.reshape(d, d)


def infer_d(state: np.ndarray) -> int:
    n = np.asarray(state).shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n:
        raise ValueError(f"state length {n} is not a perfect square")
    return d


@dataclass(frozen=True)
class ReducedDensityMatrix:
    matrix: np.ndarray

    @property
    def d(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def check(self, atol: float = PSD_ATOL) -> None:
        m = self.matrix
        herm = np.abs(m - m.conj().T).max()
        if herm > atol:
            raise AssertionError(f"reduced state not Hermitian (deviation {herm:.3g})")
        if abs(self.trace() - 1.0) > atol:
            raise AssertionError(f"reduced state trace {self.trace()!r} != 1")
        lo = self.eigenvalues().min()
        if lo < -atol:
            raise AssertionError(f"reduced state has negative eigenvalue {lo:.3g}")


def reduce_to_B(state: np.ndarray, d: int | None = None) -> ReducedDensityMatrix:
    """``rho_B[q, q'] = sum_p psi[p d + q] conj(psi[p d + q'])``."""
    M = _as_matrix(state, d or infer_d(state))
    return ReducedDensityMatrix(M.T @ M.conj())


def reduce_to_A(state: np.ndarray, d: int | None = None) -> ReducedDensityMatrix:
    M = _as_matrix(state, d or infer_d(state))
    return ReducedDensityMatrix(M @ M.conj().T)


def schmidt_number(state: np.ndarray, d: int | None = None) -> tuple[float, float]:
    """Return ``(K0, K)`` with ``K0 = 1/Tr(rho_B^2)`` and ``K = (K0 - 1)/(d - 1)``."""
    d = d or infer_d(state)
    K0 = 1.0 / reduce_to_B(state, d).purity()
    return K0, (K0 - 1.0) / (d - 1)


def schmidt_coefficients(state: np.ndarray, d: int | None = None) -> np.ndarray:
    """Squared Schmidt coefficients, descending."""
    s = np.linalg.svd(_as_matrix(state, d or infer_d(state)), compute_uv=False)
    return s**2


def entanglement_entropy(state: np.ndarray, d: int | None = None) -> float:
    """Von Neumann entropy of rho_B in nats. Diagnostic only."""
    w = schmidt_coefficients(state, d)
    w = w[w > 1e-300]
    return float(-(w * np.log(w)).sum())


def fidelity(state: np.ndarray, target: np.ndarray) -> float:
    a = np.asarray(state)
    b = np.asarray(target)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(b, a)) ** 2)


def current_expectation(state: np.ndarray, params: ModelParams) -> tuple[float, float]:
    """Total current ``J = <J_A + J_B>`` and the renormalized ``1 - J/C``.

    The renormalized value is returned unclamped; it exceeds 1 when J < 0.
    """
    J_op = build_joint_current(params)
    psi = np.asarray(state)
    J = float(np.real(np.vdot(psi, J_op @ psi)))
    renorm = 1.0 - J / params.C if params.C > 0 else float("nan")
    return J, renorm
