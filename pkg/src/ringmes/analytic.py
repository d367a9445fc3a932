"""Closed-form zero-energy maximally entangled states and the Landau-Zener estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .fock import MIN_SITES, Basis, FockState
from .model import joint_index, reduce_phase

MIXED_PHASE_ATOL = 1e-9


def winding_phase(state: FockState) -> int:
    """``p(n) = -sum_j j * n_j`` with sites labelled 1..L.

    Moving one particle from site j+1 to site j raises ``p`` by one; across the
    wrap bond (site 1 -> site L) it changes by ``1 - L``, which is the same
    modulo L.
    """
    return -sum((j + 1) * n for j, n in enumerate(state))


def mes_phases(L: int, m: int) -> float:
    """Peierls phase ``m pi / L - pi/2`` (reduced to [0, 2pi)) at which ``|psi_m>`` has zero energy."""
    if L < MIN_SITES:
        raise DomainError(f"need L >= {MIN_SITES}, got {L}")
    return reduce_phase(m * math.pi / L - math.pi / 2)


@dataclass(frozen=True)
class MESState:
    """``|psi_m> = d^{-1/2} sum_n exp(2 pi i m p(n) / L) |n>_A |n>_B``."""

    m: int
    basis: Basis
    amplitudes: np.ndarray = field(repr=False)
    phases: tuple[int, ...] = field(repr=False)

    @property
    def d(self) -> int:
        return self.basis.dim

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes

    def phase_function(self, state: FockState) -> int:
        return self.phases[self.basis.index(state)]


def construct_mes(basis: Basis, m: int) -> MESState:
    L = basis.L
    m_red = int(m) % L
    d = basis.dim
    p = tuple(winding_phase(s) for s in basis.states)
    amps = np.zeros(d * d, dtype=complex)
    diag = np.arange(d)
    amps[joint_index(diag, diag, d)] = np.exp(2j * np.pi * m_red * np.array(p) / L) / math.sqrt(d)
    amps.setflags(write=False)
    return MESState(m=m_red, basis=basis, amplitudes=amps, phases=p)


def _circular_distance(a: float, b: float, period: float) -> float:
    r = math.fmod(a - b, period)
    if r < 0:
        r += period
    return min(r, period - r)


def mes_condition_mixed(phi_a: float, phi_b: float, L: int) -> Optional[int]:
    """Winding label ``m`` in ``1..L`` whose zero-energy MES exists at ``(phi_a, phi_b)``.

    Only the mean phase matters, and only modulo pi (the condition is on
    ``exp(i (phi_a + phi_b))``). Returns ``None`` off the MES lines.
    """
    mean = 0.5 * (phi_a + phi_b)
    for m in range(1, L + 1):
        if _circular_distance(mean, mes_phases(L, m), math.pi) < MIXED_PHASE_ATOL:
            return m
    return None


def lz_probability(gap: float, slope: float, alpha: float) -> float:
    """Landau-Zener probability of staying on the diabatic branch.

    ``gap`` is the minimal adiabatic splitting (so the coupling is gap/2),
    ``slope`` the rate of change of the diabatic energy difference per radian
    of phase, and ``alpha`` the phase velocity. Returns
    ``exp(-2 pi (gap/2)^2 / (alpha * slope))``.
    """
    if gap < 0:
        raise DomainError(f"gap must be >= 0, got {gap}")
    if slope <= 0:
        raise DomainError(f"diabatic slope must be > 0, got {slope}")
    if alpha <= 0:
        raise DomainError(f"sweep rate alpha must be > 0, got {alpha}")
    coupling = 0.5 * gap
    return math.exp(-2.0 * math.pi * coupling**2 / (alpha * slope))
