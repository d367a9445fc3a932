"""Dense eigendecomposition, phase scans with band tracking, and avoided crossings."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NumericalError
from .measures import schmidt_number
from .model import DENSE_LIMIT, HermitianOperator, ModelParams, build_hamiltonian

EIG_RTOL = 1e-10
DEGENERACY_RTOL = 1e-8
MIN_TRACK_OVERLAP = 0.9
MAX_REFINE_DEPTH = 6
GOLDEN_XTOL = 1e-10
CROSSING_WINDOW = 5.0

Decomposition = tuple[np.ndarray, np.ndarray]


def _dense(H) -> tuple[np.ndarray, str]:
    if isinstance(H, HermitianOperator):
        return H.dense(), H.label
    return np.asarray(H), "matrix"


def eigendecompose(H, check: bool = True) -> Decomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of a Hermitian matrix."""
    M, label = _dense(H)
    n = M.shape[0]
    if n > DENSE_LIMIT:
        raise NumericalError(f"{label}: dense eigensolver limited to dim {DENSE_LIMIT}, got {n}")
    try:
        w, v = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{label} (dim {n}): eigensolver did not converge: {exc}") from exc
    if check:
        scale = max(np.linalg.norm(M, 2), 1.0) if n else 1.0
        res = np.abs(M @ v - v * w).max(initial=0.0)
        ortho = np.abs(v.conj().T @ v - np.eye(n)).max(initial=0.0)
        if res > EIG_RTOL * scale or ortho > EIG_RTOL:
            raise NumericalError(
                f"{label} (dim {n}): eigen-residual {res:.2e} / orthonormality {ortho:.2e} exceeds {EIG_RTOL}"
            )
    return w, v


def degenerate_clusters(w: np.ndarray, rtol: float = DEGENERACY_RTOL) -> list[range]:
    """Group consecutive sorted eigenvalues whose spacing is below ``rtol * max(|w|, 1)``."""
    if len(w) == 0:
        return []
    tol = rtol * max(float(np.abs(w).max()), 1.0)
    clusters, start = [], 0
    for i in range(1, len(w)):
        if w[i] - w[i - 1] >= tol:
            clusters.append(range(start, i))
            start = i
    clusters.append(range(start, len(w)))
    return clusters


def canonicalize_degenerate(w: np.ndarray, v: np.ndarray, rtol: float = DEGENERACY_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Replace each degenerate block of eigenvectors by a solver-independent basis.

    The canonical axes e_0, e_1, ... are projected onto the cluster subspace in
    index order and Gram-Schmidt orthonormalised until the block is full. Also
    returns a boolean mask of levels belonging to a degenerate cluster.
    """
    out = np.array(v, copy=True)
    flags = np.zeros(len(w), dtype=bool)
    for block in degenerate_clusters(w, rtol):
        k = len(block)
        if k == 1:
            continue
        Q = v[:, block.start : block.stop]
        chosen: list[np.ndarray] = []
        for axis in range(v.shape[0]):
            x = Q @ Q[axis].conj()  # projection of e_axis onto span(Q)
            for b in chosen:
                x = x - b * np.vdot(b, x)
            for b in chosen:  # second pass for stability
                x = x - b * np.vdot(b, x)
            nx = np.linalg.norm(x)
            if nx > 1e-6:
                chosen.append(x / nx)
            if len(chosen) == k:
                break
        out[:, block.start : block.stop] = np.array(chosen).T
        flags[block.start : block.stop] = True
    return out, flags


@dataclass(frozen=True)
class EntangledEigenstate:
    state: np.ndarray = field(repr=False)
    K: float
    K0: float
    level: int
    energy: float
    degenerate: bool


def highest_entanglement_eigenstate(H, d: Optional[int] = None) -> EntangledEigenstate:
    """The eigenvector with the largest normalised Schmidt number.

    Degenerate clusters are canonicalised first. Ties (within 1e-12) go to the
    lowest level, i.e. the lowest energy.
    """
    w, v = eigendecompose(H)
    v, flags = canonicalize_degenerate(w, v)
    n = v.shape[0]
    d = d or int(round(math.sqrt(n)))
    scores = np.array([schmidt_number(v[:, i], d) for i in range(n)])
    best = int(np.flatnonzero(scores[:, 1] >= scores[:, 1].max() - 1e-12)[0])
    return EntangledEigenstate(
        state=v[:, best],
        K=float(scores[best, 1]),
        K0=float(scores[best, 0]),
        level=best,
        energy=float(w[best]),
        degenerate=bool(flags[best]),
    )


SpectrumFn = Callable[[float], Decomposition]


def model_spectrum_fn(params: ModelParams) -> SpectrumFn:
    """phi -> eigen-decomposition of H with ``phi_a = phi_b = phi``."""

    def fn(phi: float) -> Decomposition:
        return eigendecompose(build_hamiltonian(params.with_phase(phi)))

    return fn


def matrix_family_fn(matrix_fn: Callable[[float], np.ndarray]) -> SpectrumFn:
    def fn(phi: float) -> Decomposition:
        return eigendecompose(matrix_fn(phi))

    return fn


@dataclass
class SpectrumScan:
    """Energies on a phase grid; ``bands[k, b]`` is the level index of band ``b`` at point ``k``."""

    phi_grid: np.ndarray
    energies: np.ndarray
    bands: Optional[np.ndarray] = None
    vectors: Optional[np.ndarray] = field(default=None, repr=False)
    spectrum_fn: Optional[SpectrumFn] = field(default=None, repr=False)
    refined_points: int = 0

    @property
    def n_levels(self) -> int:
        return self.energies.shape[1]

    def band_energies(self, band: int) -> np.ndarray:
        if self.bands is None:
            raise ValueError("scan has no tracked bands")
        k = np.arange(len(self.phi_grid))
        return self.energies[k, self.bands[:, band]]

    def band_vector(self, k: int, band: int) -> np.ndarray:
        return self.vectors[k][:, self.bands[k, band]]


def _greedy_match(overlap: np.ndarray) -> tuple[np.ndarray, float]:
    """perm[i] = level at the next point continuing level i; plus the smallest matched overlap."""
    n = overlap.shape[0]
    perm = np.full(n, -1)
    order = np.argsort(-overlap, axis=None, kind="stable")
    used_r = np.zeros(n, bool)
    used_c = np.zeros(n, bool)
    worst = 1.0
    left = n
    for flat in order:
        r, c = divmod(int(flat), n)
        if used_r[r] or used_c[c]:
            continue
        perm[r] = c
        used_r[r] = used_c[c] = True
        worst = min(worst, float(overlap[r, c]))
        left -= 1
        if left == 0:
            break
    return perm, worst


def _connect(fn: SpectrumFn, phi0: float, v0: np.ndarray, phi1: float, v1: np.ndarray, depth: int) -> tuple[np.ndarray, int]:
    """Level permutation from phi0 to phi1, halving the step while overlaps are poor."""
    perm, worst = _greedy_match(np.abs(v0.conj().T @ v1))
    if worst >= MIN_TRACK_OVERLAP or depth >= MAX_REFINE_DEPTH:
        return perm, 0
    mid = 0.5 * (phi0 + phi1)
    _, vm = fn(mid)
    p1, n1 = _connect(fn, phi0, v0, mid, vm, depth + 1)
    p2, n2 = _connect(fn, mid, vm, phi1, v1, depth + 1)
    return p2[p1], n1 + n2 + 1


def scan_spectrum(
    params: ModelParams | None,
    phi_grid: Sequence[float],
    track: bool = True,
    spectrum_fn: Optional[SpectrumFn] = None,
    workers: int = 1,
) -> SpectrumScan:
    """Diagonalise on every grid point (``phi_a = phi_b = phi``) and optionally connect bands."""
    grid = np.asarray(phi_grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0:
        raise ValueError("phi grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("phi grid must be strictly ascending")
    fn = spectrum_fn or model_spectrum_fn(params)
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(fn, grid))
    else:
        results = [fn(phi) for phi in grid]
    energies = np.array([w for w, _ in results])
    scan = SpectrumScan(phi_grid=grid, energies=energies, spectrum_fn=fn)
    if not track:
        return scan
    vectors = np.array([v for _, v in results])
    n = energies.shape[1]
    bands = np.empty((len(grid), n), dtype=int)
    bands[0] = np.arange(n)
    refined = 0
    for k in range(len(grid) - 1):
        perm, extra = _connect(fn, grid[k], vectors[k], grid[k + 1], vectors[k + 1], 0)
        refined += extra
        bands[k + 1] = perm[bands[k]]
    scan.bands = bands
    scan.vectors = vectors
    scan.refined_points = refined
    return scan


def golden_section(f: Callable[[float], float], a: float, b: float, xtol: float = GOLDEN_XTOL) -> float:
    """Minimiser of a unimodal ``f`` on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    e = a + invphi * (b - a)
    fc, fe = f(c), f(e)
    while abs(b - a) > xtol:
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    return 0.5 * (a + b)


@dataclass(frozen=True)
class CrossingReport:
    phi_c: float
    gap: float
    diabatic_slope: float
    band_pair: tuple[int, int]
    gap_width: float


def _follow(fn: SpectrumFn, phi: float, refs: Sequence[np.ndarray]) -> np.ndarray:
    """Energies at ``phi`` of the levels that best overlap each reference vector."""
    w, v = fn(phi)
    out = []
    taken: set[int] = set()
    for ref in refs:
        ov = np.abs(v.conj().T @ ref)
        for i in np.argsort(-ov, kind="stable"):
            if int(i) not in taken:
                taken.add(int(i))
                out.append(w[i])
                break
    return np.array(out)


def nearest_partner(scan: SpectrumScan, band: int) -> int:
    """The tracked band that comes closest in energy to ``band`` anywhere on the scan."""
    e0 = scan.band_energies(band)
    best, best_sep = -1, math.inf
    for b in range(scan.n_levels):
        if b == band:
            continue
        sep = float(np.abs(scan.band_energies(b) - e0).min())
        if sep < best_sep - 1e-14:
            best, best_sep = b, sep
    return best


def locate_crossing(scan: SpectrumScan, band_pair: tuple[int, int], energy_scale: float = 1.0) -> CrossingReport:
    """Refine the closest approach of two tracked bands.

    The splitting between the two bands (followed off-grid by eigenvector
    overlap) is minimised by golden-section search between the neighbours of
    the best grid point. The diabatic slope is read off the hyperbola
    ``s(phi)^2 = gap^2 + slope^2 (phi - phi_c)^2`` at ``phi_c +- 5 w``, where the
    gap width ``w`` is where the splitting reaches ``sqrt(2) * gap``.
    """
    if scan.bands is None or scan.vectors is None:
        raise ValueError("locate_crossing needs a scan with tracked bands")
    b1, b2 = band_pair
    grid = scan.phi_grid
    split = np.abs(scan.band_energies(b1) - scan.band_energies(b2))
    k = int(np.argmin(split))
    if split[k] > 0.5 * energy_scale:
        raise NumericalError(
            f"bands {band_pair} never approach within 0.5 energy units (closest {split[k]:.3g})"
        )
    fn = scan.spectrum_fn
    refs = (scan.band_vector(k, b1), scan.band_vector(k, b2))

    def splitting(phi: float) -> float:
        e = _follow(fn, phi, refs)
        return float(abs(e[1] - e[0]))

    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    phi_c = golden_section(splitting, lo, hi)
    gap = splitting(phi_c)

    span = grid[-1] - grid[0]
    target = math.sqrt(2.0) * gap

    def half_width(sign: float) -> float:
        x_in, x_out = 0.0, 1e-9
        while splitting(phi_c + sign * x_out) < target and x_out < span:
            x_in, x_out = x_out, 2.0 * x_out
        for _ in range(80):
            mid = 0.5 * (x_in + x_out)
            if splitting(phi_c + sign * mid) < target:
                x_in = mid
            else:
                x_out = mid
            if x_out - x_in < 1e-12 * max(x_out, 1e-300):
                break
        return 0.5 * (x_in + x_out)

    width = 0.5 * (half_width(+1.0) + half_width(-1.0))
    offset = max(CROSSING_WINDOW * width, 1e-6)
    slopes = []
    for sign in (+1.0, -1.0):
        s = splitting(phi_c + sign * offset)
        slopes.append(math.sqrt(max(s * s - gap * gap, 0.0)) / offset)
    return CrossingReport(
        phi_c=phi_c,
        gap=gap,
        diabatic_slope=float(np.mean(slopes)),
        band_pair=(int(b1), int(b2)),
        gap_width=width,
    )


EXACT_CROSSING_RTOL = 1e-8


def avoided_crossings(
    scan: SpectrumScan, band: int = 0, energy_scale: float = 1.0, reach: float = 0.5
) -> list[CrossingReport]:
    """Avoided crossings of ``band`` with every band that comes within ``reach * energy_scale``.

    Splittings below ``1e-8 * energy_scale`` are true level crossings between
    symmetry sectors (no coupling, nothing to avoid) and are left out. Sorted
    by gap, smallest first.
    """
    e0 = scan.band_energies(band)
    reports = []
    for b in range(scan.n_levels):
        if b == band:
            continue
        if np.abs(scan.band_energies(b) - e0).min() > reach * energy_scale:
            continue
        rep = locate_crossing(scan, (band, b), energy_scale)
        if rep.gap > EXACT_CROSSING_RTOL * energy_scale:
            reports.append(rep)
    reports.sort(key=lambda r: (r.gap, r.band_pair[1]))
    return reports
