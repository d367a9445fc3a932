"""Pure-numpy twin of the compiled propagator in ``_kernels.pyx``.

Same tableau, error norm and step-size rule, so both backends agree to
rounding. Used when the extension is not built or when
``RINGMES_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp


def ramp_phase(t: float, phi_start: float, alpha: float, t_coast: float, tau: float) -> float:
    if t <= t_coast:
        return phi_start + alpha * t
    s = t - t_coast
    if s < tau:
        return phi_start + alpha * t_coast + alpha * (s - 0.5 * s * s / tau)
    return phi_start + alpha * t_coast + 0.5 * alpha * tau


def integrate_ramp(
    f_data, f_indices, f_indptr,
    g_data, g_indices, g_indptr,
    diag, psi0,
    phi_start, alpha, t_coast, tau,
    sample_times,
    eps, scale, h_init, max_steps,
    A, B, C, E3, E5,
):
    n = len(diag)
    F = sp.csr_matrix((f_data, f_indices, f_indptr), shape=(n, n))
    G = sp.csr_matrix((g_data, g_indices, g_indptr), shape=(n, n))
    D = np.asarray(diag, dtype=float)
    if n <= 512:
        F = F.toarray()
        G = G.toarray()

    def rhs(t, y):
        phi = ramp_phase(t, phi_start, alpha, t_coast, tau)
        z = complex(math.cos(phi), math.sin(phi))
        return -1j * (z * (F @ y) + z.conjugate() * (G @ y) + D * y)

    ts = np.asarray(sample_times, dtype=float)
    ns = len(C)
    out = np.zeros((len(ts), n), dtype=complex)
    y = np.array(psi0, dtype=complex, copy=True)
    K = np.zeros((ns + 1, n), dtype=complex)
    t = 0.0
    h = h_init
    accepted = rejected = 0
    status = 0
    fail_t = 0.0
    isamp = 0
    while isamp < len(ts) and ts[isamp] <= 0.0:
        out[isamp] = y
        isamp += 1
    K[0] = rhs(t, y)
    nfev = 1
    while isamp < len(ts):
        t_target = ts[isamp]
        clipped = False
        h_step = h
        if t + h_step >= t_target:
            h_step = t_target - t
            clipped = True
        if h_step < 1e-14 * max(1.0, abs(t)):
            status, fail_t = 1, t
            break
        if accepted + rejected >= max_steps:
            status, fail_t = 2, t
            break
        for s in range(1, ns):
            K[s] = rhs(t + C[s] * h_step, y + h_step * (A[s, :s] @ K[:s]))
        y_new = y + h_step * (B @ K[:ns])
        K[ns] = rhs(t + h_step, y_new)
        nfev += ns
        e5 = E5 @ K
        e3 = E3 @ K
        n5 = float(np.vdot(e5, e5).real)
        n3 = float(np.vdot(e3, e3).real)
        err = 0.0 if (n5 == 0.0 and n3 == 0.0) else h_step * n5 / math.sqrt(n5 + 0.01 * n3)
        ratio = err / (eps * scale * h_step)
        if ratio <= 1.0:
            t += h_step
            y = y_new
            K[0] = K[ns]
            accepted += 1
            factor = 10.0 if ratio == 0.0 else min(10.0, max(0.2, 0.9 * ratio ** (-1.0 / 8.0)))
            h = max(h, h_step * factor) if clipped else h_step * factor
            if clipped:
                t = t_target
                out[isamp] = y
                isamp += 1
        else:
            rejected += 1
            h = h_step * max(0.2, 0.9 * ratio ** (-1.0 / 8.0))
    return out, {
        "accepted": accepted,
        "rejected": rejected,
        "nfev": nfev,
        "status": status,
        "fail_time": fail_t,
        "samples_done": isamp,
    }
