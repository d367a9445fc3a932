"""Time evolution under a ramped Peierls phase and the state-preparation protocol.

The Hamiltonian along a ramp is written ``H(phi) = e^{i phi} F + e^{-i phi} F^dag + D``
with ``F = -C (X (x) 1 + 1 (x) X)`` the forward hopping and ``D`` the
(real, diagonal) interaction, so each right-hand-side evaluation is two
sparse products. Both species see the same phase during a ramp.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import _backend, _tableau
from .analytic import MESState, construct_mes
from .errors import DomainError, NumericalError
from .measures import fidelity as _fidelity
from .measures import schmidt_number
from .model import HermitianOperator, ModelParams, build_hamiltonian, interaction_diagonal, joint_forward_hopping
from .spectra import eigendecompose

NORM_TOL = 1e-8
EPS_RANGE = (1e-12, 1e-6)
MAX_SAMPLES = 400
DEFAULT_MAX_STEPS = 50_000_000


@dataclass(frozen=True)
class RampGenerator:
    """``H(phi) = e^{i phi} F + e^{-i phi} F^dagger + diag(D)``."""

    F: sp.csr_matrix
    D: np.ndarray
    L: int = 1

    @classmethod
    def from_params(cls, params: ModelParams) -> "RampGenerator":
        F = joint_forward_hopping(params).astype(complex)
        D = interaction_diagonal(params.basis, params.U, params.V)
        return cls(F=F.tocsr(), D=np.ascontiguousarray(D, dtype=float), L=params.L)

    @classmethod
    def from_hermitian(cls, H) -> "RampGenerator":
        """Split a fixed Hermitian matrix into strict upper part and diagonal (use at phi = 0)."""
        M = H.dense() if isinstance(H, HermitianOperator) else np.asarray(H)
        F = sp.csr_matrix(np.triu(M, k=1).astype(complex))
        return cls(F=F, D=np.ascontiguousarray(np.real(np.diag(M)), dtype=float))

    @property
    def dim(self) -> int:
        return len(self.D)

    def matrix(self, phi: float) -> np.ndarray:
        z = complex(math.cos(phi), math.sin(phi))
        F = self.F.toarray()
        return z * F + np.conj(z) * F.conj().T + np.diag(self.D)

    def current(self, phi: float) -> np.ndarray:
        """``(1/L) dH/dphi``: the joint particle current at phase ``phi``."""
        z = complex(math.cos(phi), math.sin(phi))
        F = self.F.toarray()
        return (1j * z * F - 1j * np.conj(z) * F.conj().T) / self.L

    def norm_bound(self) -> float:
        rows = np.asarray(abs(self.F).sum(axis=1)).ravel()
        return 2.0 * float(rows.max(initial=0.0)) + float(np.abs(self.D).max(initial=0.0))


@dataclass(frozen=True)
class RampSchedule:
    """Linear phase ramp ``phi(t) = phi_start + alpha t`` stopped at ``phi_stop``.

    By default the stop is instantaneous. With ``decel_time > 0`` the velocity
    instead falls linearly to zero over that time, ending exactly at
    ``phi_stop``.
    """

    alpha: float
    phi_start: float = 0.0
    phi_stop: float = math.pi / 2
    decel_time: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise DomainError(f"ramp velocity alpha must be > 0, got {self.alpha}")
        if not self.phi_stop > self.phi_start:
            raise DomainError(f"need phi_stop > phi_start, got [{self.phi_start}, {self.phi_stop}]")
        if self.decel_time < 0 or 0.5 * self.alpha * self.decel_time > self.phi_stop - self.phi_start:
            raise DomainError("deceleration does not fit inside the ramp")

    @property
    def t_coast(self) -> float:
        return (self.phi_stop - self.phi_start - 0.5 * self.alpha * self.decel_time) / self.alpha

    @property
    def duration(self) -> float:
        return self.t_coast + self.decel_time

    def phase(self, t):
        from ._kernels_py import ramp_phase

        return np.vectorize(ramp_phase)(t, self.phi_start, self.alpha, self.t_coast, self.decel_time)


@dataclass
class Trajectory:
    times: np.ndarray
    phases: np.ndarray
    states: np.ndarray = field(repr=False)
    fidelity: np.ndarray
    schmidt: np.ndarray
    energy: np.ndarray
    current: np.ndarray
    norm: np.ndarray
    stats: dict

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norm_drift(self) -> float:
        return float(np.abs(self.norm - 1.0).max())


def _check_normalized(psi: np.ndarray) -> None:
    nrm = np.linalg.norm(psi)
    if abs(nrm - 1.0) > 1e-10:
        raise DomainError(f"initial state must be normalised (norm = {nrm!r})")


def _check_eps(eps: float) -> None:
    lo, hi = EPS_RANGE
    if not lo <= eps <= hi:
        raise DomainError(f"accuracy eps must lie in [{lo:g}, {hi:g}], got {eps:g}")


def propagate(
    gen: RampGenerator,
    psi0: np.ndarray,
    sample_times: Sequence[float],
    *,
    phi_start: float = 0.0,
    alpha: float = 0.0,
    t_coast: float = math.inf,
    decel_time: float = 0.0,
    eps: float = 1e-10,
    scale: float = 1.0,
    backend: Optional[str] = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[np.ndarray, dict]:
    """Integrate ``i dpsi/dt = H(phi(t)) psi`` and return the state at each sample time.

    Step control keeps the local error estimate below ``eps * scale * h``,
    which bounds the global error by ``eps * scale * t``.
    """
    _check_eps(eps)
    psi0 = np.asarray(psi0, dtype=complex)
    _check_normalized(psi0)
    ts = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(ts) < 0) or (len(ts) and ts[0] < 0):
        raise ValueError("sample times must be non-negative and ascending")
    F = gen.F.tocsr()
    G = F.conj().T.tocsr()
    F.sort_indices()
    G.sort_indices()
    h0 = 0.1 / max(gen.norm_bound(), 1e-12)
    kern = _backend.get(backend)
    states, stats = kern.integrate_ramp(
        F.data, F.indices, F.indptr,
        G.data, G.indices, G.indptr,
        gen.D, psi0,
        float(phi_start), float(alpha), float(min(t_coast, 1e300)), float(decel_time),
        ts,
        float(eps), float(scale), float(h0), int(max_steps),
        _tableau.A, _tableau.B, _tableau.C, _tableau.E3, _tableau.E5,
    )
    stats = dict(stats, backend=backend or _backend.default_backend())
    if stats["status"] == 1:
        raise NumericalError(f"step size underflow at t = {stats['fail_time']:.17g}")
    if stats["status"] == 2:
        raise NumericalError(f"step budget of {max_steps} exhausted at t = {stats['fail_time']:.17g}")
    return np.asarray(states), stats


def evolve_static(H, psi0: np.ndarray, times: Sequence[float], eps: float = 1e-10, backend: Optional[str] = None):
    """Propagate under a time-independent Hermitian ``H``; returns (states, stats)."""
    gen = RampGenerator.from_hermitian(H)
    return propagate(gen, psi0, times, eps=eps, backend=backend)


def evolve(
    initial: np.ndarray,
    params: ModelParams,
    schedule: RampSchedule,
    sample_count: int = 201,
    eps: float = 1e-10,
    target: Optional[np.ndarray] = None,
    backend: Optional[str] = None,
    check_norm: bool = True,
) -> Trajectory:
    """Run ``schedule`` on the ring from ``initial`` and record observables at equally spaced times.

    Energies are in units of C and times in hbar/C (``params.C`` sets the
    error scale). Raises :class:`NumericalError` if the norm drifts by more
    than 1e-8, since nothing renormalises the state along the way.
    """
    if not 2 <= sample_count <= MAX_SAMPLES:
        raise DomainError(f"sample_count must be in [2, {MAX_SAMPLES}], got {sample_count}")
    gen = RampGenerator.from_params(params)
    if len(initial) != gen.dim:
        raise ValueError(f"initial state has length {len(initial)}, expected {gen.dim}")
    times = np.linspace(0.0, schedule.duration, sample_count)
    times[-1] = schedule.duration
    states, stats = propagate(
        gen,
        initial,
        times,
        phi_start=schedule.phi_start,
        alpha=schedule.alpha,
        t_coast=schedule.t_coast,
        decel_time=schedule.decel_time,
        eps=eps,
        scale=max(params.C, 1e-300) if params.C > 0 else 1.0,
        backend=backend,
    )
    phases = schedule.phase(times)
    d = params.d
    norms = np.linalg.norm(states, axis=1)
    fid = np.full(len(times), np.nan)
    energy = np.empty(len(times))
    current = np.empty(len(times))
    schmidt = np.empty(len(times))
    for k, (phi, psi) in enumerate(zip(phases, states)):
        if target is not None:
            fid[k] = _fidelity(psi, target)
        schmidt[k] = schmidt_number(psi / norms[k], d)[1]
        energy[k] = np.real(np.vdot(psi, gen.matrix(phi) @ psi))
        current[k] = np.real(np.vdot(psi, gen.current(phi) @ psi))
    traj = Trajectory(
        times=times,
        phases=np.asarray(phases, dtype=float),
        states=states,
        fidelity=fid,
        schmidt=schmidt,
        energy=energy,
        current=current,
        norm=norms,
        stats=stats,
    )
    if check_norm and traj.norm_drift > NORM_TOL:
        raise NumericalError(f"norm drift {traj.norm_drift:.3g} exceeds {NORM_TOL:g}; tighten eps")
    return traj


def reference_evolve(gen: RampGenerator, psi0: np.ndarray, schedule: RampSchedule, steps: int) -> np.ndarray:
    """Oracle: exact exponentials of H frozen at each sub-interval midpoint."""
    psi = np.array(psi0, dtype=complex)
    edges = np.linspace(0.0, schedule.duration, steps + 1)
    mids = schedule.phase(0.5 * (edges[1:] + edges[:-1]))
    for dt, phi in zip(np.diff(edges), mids):
        w, v = np.linalg.eigh(gen.matrix(float(phi)))
        psi = v @ (np.exp(-1j * w * dt) * (v.conj().T @ psi))
    return psi


def protocol_target(params: ModelParams) -> MESState:
    """The zero-energy MES at phi = pi/2, i.e. winding ``m = L``."""
    return construct_mes(params.basis, params.L)


def ground_state(params: ModelParams, phi: float) -> tuple[np.ndarray, float, float]:
    """Ground state at phase ``phi`` plus its energy and the gap to the next level."""
    w, v = eigendecompose(build_hamiltonian(params.with_phase(phi)))
    gap = float(w[1] - w[0]) if len(w) > 1 else math.inf
    return v[:, 0], float(w[0]), gap


@dataclass
class ProtocolResult:
    alpha: float
    fidelity: float
    final_state: np.ndarray = field(repr=False)
    schmidt_final: float
    schmidt_peak: float
    fidelity_ground: float
    trajectory: Trajectory = field(repr=False)


def run_protocol(
    params: ModelParams,
    alpha: float,
    target: Optional[MESState | np.ndarray] = None,
    sample_count: int = 201,
    eps: float = 1e-10,
    backend: Optional[str] = None,
    decel_time: float = 0.0,
) -> ProtocolResult:
    """Ground state at phi = 0, linear ramp to pi/2, stop, compare with the MES."""
    if not math.isclose(params.U, params.V, rel_tol=1e-12, abs_tol=0.0):
        warnings.warn("U != V: the target MES is not an eigenstate of this Hamiltonian", stacklevel=2)
    psi0, _, gap0 = ground_state(params, 0.0)
    if gap0 < 1e-8 * max(params.C, 1.0):
        warnings.warn(f"ground state at phi=0 is degenerate (gap {gap0:.3g}); initial state is solver-dependent", stacklevel=2)
    if target is None:
        target = protocol_target(params)
    tvec = target.vector if isinstance(target, MESState) else np.asarray(target)
    schedule = RampSchedule(alpha=alpha, phi_start=0.0, phi_stop=math.pi / 2, decel_time=decel_time)
    traj = evolve(psi0, params, schedule, sample_count=sample_count, eps=eps, target=tvec, backend=backend)
    final = traj.final_state
    gs_end, _, _ = ground_state(params, math.pi / 2)
    return ProtocolResult(
        alpha=float(alpha),
        fidelity=float(traj.fidelity[-1]),
        final_state=final,
        schmidt_final=float(traj.schmidt[-1]),
        schmidt_peak=float(traj.schmidt.max()),
        fidelity_ground=_fidelity(final, gs_end),
        trajectory=traj,
    )


def scan_alpha(
    params: ModelParams,
    alphas: Sequence[float],
    target: Optional[MESState | np.ndarray] = None,
    sample_count: int = 201,
    eps: float = 1e-10,
    backend: Optional[str] = None,
    workers: int = 1,
) -> list[ProtocolResult]:
    """One protocol run per ramp velocity; results come back in grid order."""
    grid = [float(a) for a in alphas]
    if not grid or any(a <= 0 for a in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("alpha grid must be non-empty, positive and strictly ascending")

    def one(a: float) -> ProtocolResult:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return run_protocol(params, a, target, sample_count=sample_count, eps=eps, backend=backend)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, grid))
    return [one(a) for a in grid]
