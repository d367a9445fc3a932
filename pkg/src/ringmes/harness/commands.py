"""Plot-ready datasets: one function per CLI subcommand."""

from __future__ import annotations

import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from ..analytic import construct_mes, mes_phases
from ..dynamics import run_protocol, scan_alpha
from ..measures import current_expectation, schmidt_number
from ..model import (
    ModelParams,
    build_hamiltonian,
    build_interaction,
    build_joint_current,
    build_kinetic,
    interaction_diagonal,
)
from ..spectra import highest_entanglement_eigenstate, scan_spectrum
from .config import RunConfig


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _params_line(p: ModelParams) -> str:
    return (
        f"L={p.L} N={p.N} C={fmt(p.C)} U={fmt(p.U)} V={fmt(p.V)} "
        f"phi_a={fmt(p.phi_a)} phi_b={fmt(p.phi_b)} hbar=1"
    )


def write_csv(stream: TextIO, title: str, params: ModelParams, columns: Sequence[str], rows: Iterable[Sequence], context: Optional[str] = None) -> None:
    stream.write(f"# ringmes {title}\n")
    stream.write(f"# {context or _params_line(params)}\n")
    stream.write("# " + ",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Column names (with units) and the numeric table of a file written by :func:`write_csv`."""
    lines = text.splitlines()
    header = [ln for ln in lines if ln.startswith("#")]
    columns = header[-1][1:].strip().split(",")
    data = [list(map(float, ln.split(","))) for ln in lines if ln and not ln.startswith("#")]
    return columns, np.array(data, dtype=float).reshape(len(data), len(columns))


# -- spectrum ---------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, stream: TextIO) -> np.ndarray:
    """Energies vs. phi (phi_a = phi_b = phi), one row per grid point, in units of C."""
    p = cfg.model
    grid = cfg.phi_grid.values()
    scan = scan_spectrum(p, grid, track=False, workers=cfg.threads)
    unit = p.C if p.C > 0 else 1.0
    energies = scan.energies / unit
    label = "C" if p.C > 0 else "energy (C=0)"
    cols = ["phi [rad]"] + [f"E_{k + 1} [{label}]" for k in range(energies.shape[1])]
    zeros = grid[np.abs(energies).min(axis=1) < cfg.zero_tol]
    context = _params_line(p) + f"\n# zero-energy rows (|E| < {fmt(cfg.zero_tol)}): " + " ".join(fmt(x) for x in zeros)
    write_csv(stream, "spectrum", p, cols, ([phi, *row] for phi, row in zip(grid, energies)), context)
    return energies


# -- mes-check --------------------------------------------------------------


def mes_report(p: ModelParams, m: int, delta: float = 0.0, tol: float = 1e-12) -> dict:
    """Residuals and observables of ``|psi_m>`` at ``phi_a = phi_m + delta``, ``phi_b = phi_m - delta``."""
    phi = mes_phases(p.L, m)
    q = p.replace(phi_a=phi + delta, phi_b=phi - delta)
    psi = construct_mes(q.basis, m).vector
    unit = q.C if q.C > 0 else 1.0
    kin = float(np.linalg.norm(build_kinetic(q) @ psi)) / unit
    inter = float(np.linalg.norm(build_interaction(q.basis, q.U, q.V) @ psi)) / unit
    total = float(np.linalg.norm(build_hamiltonian(q) @ psi)) / unit
    K0, K = schmidt_number(psi, q.d)
    if q.C > 0:
        J, renorm = current_expectation(psi, q)
    else:
        J, renorm = 0.0, float("nan")
    return {
        "m": int(m),
        "phi_tilde": phi,
        "phi_a": q.phi_a,
        "phi_b": q.phi_b,
        "kinetic_residual": kin,
        "interaction_residual": inter,
        "total_residual": total,
        "K0": K0,
        "K": K,
        "J": J,
        "renormalized_current": renorm,
        "eigenstate": bool(total < tol),
        "zero_energy_of_both_parts": bool(kin < tol and inter < tol),
    }


def cmd_mes_check(cfg: RunConfig, stream: TextIO) -> dict:
    p = cfg.model
    ms = cfg.m_list if cfg.m_list is not None else tuple(range(1, 2 * p.L + 1))
    report = {
        "task": "mes-check",
        "model": {"L": p.L, "N": p.N, "C": p.C, "U": p.U, "V": p.V},
        "units": "residuals and J in units of C (hbar = 1)",
        "mes_delta": cfg.mes_delta,
        "residual_tol": cfg.residual_tol,
        "results": [mes_report(p, m, cfg.mes_delta, cfg.residual_tol) for m in ms],
    }
    json.dump(report, stream, indent=2, sort_keys=True, allow_nan=True)
    stream.write("\n")
    return report


# -- protocol / alpha-scan --------------------------------------------------


def cmd_protocol(cfg: RunConfig, stream: TextIO):
    p = cfg.model
    res = run_protocol(p, cfg.alpha, sample_count=cfg.samples, eps=cfg.eps)
    tr = res.trajectory
    cols = ["t [hbar/C]", "phi [rad]", "F", "K", "norm", "energy [C]", "J [C]"]
    unit = p.C if p.C > 0 else 1.0
    rows = zip(tr.times * unit, tr.phases, tr.fidelity, tr.schmidt, tr.norm, tr.energy / unit, tr.current / unit)
    write_csv(stream, f"protocol alpha={fmt(cfg.alpha)}", p, cols, rows)
    return res


def cmd_alpha_scan(cfg: RunConfig, stream: TextIO):
    p = cfg.model
    unit = p.C if p.C > 0 else 1.0
    alphas = cfg.alpha_grid.values() * unit
    results = scan_alpha(p, alphas, sample_count=cfg.samples, eps=cfg.eps, workers=cfg.threads)
    cols = ["alpha [C/hbar]", "F", "K_final", "K_peak", "F_ground"]
    rows = ((r.alpha / unit, r.fidelity, r.schmidt_final, r.schmidt_peak, r.fidelity_ground) for r in results)
    write_csv(stream, "alpha-scan", p, cols, rows)
    return results


# -- uv-sweep ---------------------------------------------------------------


@dataclass
class SweepResult:
    """Highest-entanglement eigenstate per (U, V) cell; arrays are indexed ``[iu, iv]``."""

    u_values: np.ndarray
    v_values: np.ndarray
    K: np.ndarray
    renormalized_current: np.ndarray
    J: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    level: np.ndarray = field(repr=False)
    degenerate: np.ndarray = field(repr=False)

    def rows(self):
        for iu, U in enumerate(self.u_values):
            for iv, V in enumerate(self.v_values):
                yield (
                    U, V, self.K[iu, iv], self.renormalized_current[iu, iv], self.J[iu, iv],
                    self.energy[iu, iv], self.level[iu, iv], self.degenerate[iu, iv],
                )


def uv_sweep(p: ModelParams, u_values: Sequence[float], v_values: Sequence[float], phi: float, workers: int = 1) -> SweepResult:
    """Cells in units of C: each (U, V) is multiplied by ``p.C`` before diagonalising."""
    q = p.with_phase(phi)
    kinetic = build_kinetic(q).dense()
    J_op = build_joint_current(q).dense()
    same = interaction_diagonal(q.basis, 1.0, 0.0)
    cross = interaction_diagonal(q.basis, 0.0, 1.0)
    u = np.asarray(u_values, float)
    v = np.asarray(v_values, float)

    def row(iu: int):
        out = []
        for V in v:
            H = kinetic + np.diag(u[iu] * p.C * same + V * p.C * cross)
            best = highest_entanglement_eigenstate(H, q.d)
            J = float(np.real(np.vdot(best.state, J_op @ best.state)))
            out.append((best.K, 1.0 - J / p.C, J / p.C, best.energy / p.C, best.level, best.degenerate))
        return out

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            table = list(pool.map(row, range(len(u))))
    else:
        table = [row(i) for i in range(len(u))]
    arr = np.array(table, dtype=float)  # (nu, nv, 6)
    return SweepResult(
        u_values=u,
        v_values=v,
        K=arr[..., 0],
        renormalized_current=arr[..., 1],
        J=arr[..., 2],
        energy=arr[..., 3],
        level=arr[..., 4].astype(int),
        degenerate=arr[..., 5].astype(bool),
    )


def cmd_uv_sweep(cfg: RunConfig, stream: TextIO) -> SweepResult:
    p = cfg.model
    sweep = uv_sweep(p, cfg.u_grid.values(), cfg.v_grid.values(), cfg.uv_phi, workers=cfg.threads)
    cols = ["U [C]", "V [C]", "K", "calJ", "J [C]", "energy [C]", "level", "degenerate"]
    context = f"L={p.L} N={p.N} C={fmt(p.C)} phi_a=phi_b={fmt(cfg.uv_phi)} hbar=1; U and V in units of C"
    write_csv(stream, "uv-sweep", p, cols, sweep.rows(), context)
    return sweep


def ridge_ratios(sweep: SweepResult, min_ratio: float = 0.05, max_ratio: float = 0.95) -> list[np.ndarray]:
    """For each U row, the V/U ratios of interior local maxima of K below the U = V line."""
    out = []
    for iu, U in enumerate(sweep.u_values):
        ratios = sweep.v_values / U
        mask = (ratios > min_ratio) & (ratios < max_ratio)
        idx = np.flatnonzero(mask)
        k = sweep.K[iu]
        peaks = [i for i in idx if 0 < i < len(k) - 1 and mask[i - 1] and mask[i + 1] and k[i] > k[i - 1] and k[i] >= k[i + 1]]
        out.append(ratios[peaks])
    return out


COMMANDS = {
    "spectrum": cmd_spectrum,
    "mes-check": cmd_mes_check,
    "protocol": cmd_protocol,
    "alpha-scan": cmd_alpha_scan,
    "uv-sweep": cmd_uv_sweep,
}


def run(cfg: RunConfig) -> str:
    """Execute ``cfg.task`` and return the serialized output (also written to ``cfg.out`` if set)."""
    cfg.validate()
    buf = io.StringIO()
    COMMANDS[cfg.task](cfg, buf)
    text = buf.getvalue()
    if cfg.out is not None:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)
    return text
