# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled adaptive DOP853 propagator for i dpsi/dt = H(phi(t)) psi.

H(phi) = e^{i phi} F + e^{-i phi} G + diag(D), with F and G = F^dagger in CSR
form. The phase follows a linear ramp that optionally decelerates to rest.
Mirrors ``_kernels_py.integrate_ramp`` step for step.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs, pow, fmin, fmax

cnp.import_array()

ctypedef double complex cplx

cdef struct Ramp:
    double phi_start
    double alpha
    double t_coast
    double tau

cdef struct Op:
    const cplx* fdat
    const int* find
    const int* fptr
    const cplx* gdat
    const int* gind
    const int* gptr
    const double* diag
    Py_ssize_t n


cdef inline double ramp_phase(const Ramp* r, double t) noexcept nogil:
    cdef double s
    if t <= r.t_coast:
        return r.phi_start + r.alpha * t
    s = t - r.t_coast
    if s < r.tau:
        return r.phi_start + r.alpha * r.t_coast + r.alpha * (s - 0.5 * s * s / r.tau)
    return r.phi_start + r.alpha * r.t_coast + 0.5 * r.alpha * r.tau


cdef void rhs(const Op* op, const Ramp* ramp, double t, const cplx* y, cplx* out) noexcept nogil:
    cdef double phi = ramp_phase(ramp, t)
    cdef double c = cos(phi)
    cdef double s = sin(phi)
    cdef Py_ssize_t r, k
    cdef double fr, fi, gr, gi, hr, hi, yr, yi, ar, ai
    for r in range(op.n):
        fr = 0.0
        fi = 0.0
        for k in range(op.fptr[r], op.fptr[r + 1]):
            ar = op.fdat[k].real
            ai = op.fdat[k].imag
            yr = y[op.find[k]].real
            yi = y[op.find[k]].imag
            fr += ar * yr - ai * yi
            fi += ar * yi + ai * yr
        gr = 0.0
        gi = 0.0
        for k in range(op.gptr[r], op.gptr[r + 1]):
            ar = op.gdat[k].real
            ai = op.gdat[k].imag
            yr = y[op.gind[k]].real
            yi = y[op.gind[k]].imag
            gr += ar * yr - ai * yi
            gi += ar * yi + ai * yr
        # (c + i s) f + (c - i s) g + D y
        hr = c * (fr + gr) - s * (fi - gi) + op.diag[r] * y[r].real
        hi = c * (fi + gi) + s * (fr - gr) + op.diag[r] * y[r].imag
        # -i * H y
        out[r].real = hi
        out[r].imag = -hr


def integrate_ramp(
    f_data, f_indices, f_indptr,
    g_data, g_indices, g_indptr,
    diag, psi0,
    double phi_start, double alpha, double t_coast, double tau,
    sample_times,
    double eps, double scale, double h_init, long max_steps,
    A, B, C, E3, E5,
):
    cdef const cplx[::1] fd = np.ascontiguousarray(f_data, dtype=np.complex128)
    cdef const int[::1] fi = np.ascontiguousarray(f_indices, dtype=np.int32)
    cdef const int[::1] fp = np.ascontiguousarray(f_indptr, dtype=np.int32)
    cdef const cplx[::1] gd = np.ascontiguousarray(g_data, dtype=np.complex128)
    cdef const int[::1] gi = np.ascontiguousarray(g_indices, dtype=np.int32)
    cdef const int[::1] gp = np.ascontiguousarray(g_indptr, dtype=np.int32)
    cdef const double[::1] dg = np.ascontiguousarray(diag, dtype=np.float64)
    cdef const double[::1] ts = np.ascontiguousarray(sample_times, dtype=np.float64)
    cdef const double[:, ::1] a = np.ascontiguousarray(A, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(B, dtype=np.float64)
    cdef const double[::1] cc = np.ascontiguousarray(C, dtype=np.float64)
    cdef const double[::1] e3 = np.ascontiguousarray(E3, dtype=np.float64)
    cdef const double[::1] e5 = np.ascontiguousarray(E5, dtype=np.float64)

    cdef Py_ssize_t n = dg.shape[0]
    cdef Py_ssize_t ns = cc.shape[0]
    cdef Py_ssize_t nsamp = ts.shape[0]

    out_arr = np.zeros((nsamp, n), dtype=np.complex128)
    cdef cplx[:, ::1] out = out_arr
    y_arr = np.array(psi0, dtype=np.complex128, copy=True)
    cdef cplx[::1] y = y_arr
    cdef cplx[::1] ynew = np.zeros(n, dtype=np.complex128)
    cdef cplx[::1] ytmp = np.zeros(n, dtype=np.complex128)
    cdef cplx[:, ::1] K = np.zeros((ns + 1, n), dtype=np.complex128)

    cdef Op op
    op.fdat = &fd[0] if fd.shape[0] else NULL
    op.find = &fi[0] if fi.shape[0] else NULL
    op.fptr = &fp[0]
    op.gdat = &gd[0] if gd.shape[0] else NULL
    op.gind = &gi[0] if gi.shape[0] else NULL
    op.gptr = &gp[0]
    op.diag = &dg[0]
    op.n = n

    cdef Ramp ramp
    ramp.phi_start = phi_start
    ramp.alpha = alpha
    ramp.t_coast = t_coast
    ramp.tau = tau

    cdef double t = 0.0
    cdef double h = h_init
    cdef double h_step, t_target, err, n5, n3, ratio, factor, tol
    cdef double ar5, ai5, ar3, ai3
    cdef long accepted = 0, rejected = 0, nfev = 0
    cdef int status = 0
    cdef double fail_t = 0.0
    cdef Py_ssize_t isamp = 0, s, j, i
    cdef bint clipped
    cdef cplx acc

    while isamp < nsamp and ts[isamp] <= 0.0:
        out[isamp, :] = y
        isamp += 1

    with nogil:
        rhs(&op, &ramp, t, &y[0], &K[0, 0])
        nfev += 1
        while isamp < nsamp:
            t_target = ts[isamp]
            clipped = False
            h_step = h
            if t + h_step >= t_target:
                h_step = t_target - t
                clipped = True
            if h_step < 1e-14 * fmax(1.0, fabs(t)):
                status = 1
                fail_t = t
                break
            if accepted + rejected >= max_steps:
                status = 2
                fail_t = t
                break
            # stages
            for s in range(1, ns):
                for i in range(n):
                    acc = 0.0
                    for j in range(s):
                        if a[s, j] != 0.0:
                            acc = acc + a[s, j] * K[j, i]
                    ytmp[i] = y[i] + h_step * acc
                rhs(&op, &ramp, t + cc[s] * h_step, &ytmp[0], &K[s, 0])
            for i in range(n):
                acc = 0.0
                for j in range(ns):
                    acc = acc + b[j] * K[j, i]
                ynew[i] = y[i] + h_step * acc
            rhs(&op, &ramp, t + h_step, &ynew[0], &K[ns, 0])
            nfev += ns
            # error estimate (per unit step)
            n5 = 0.0
            n3 = 0.0
            for i in range(n):
                ar5 = 0.0
                ai5 = 0.0
                ar3 = 0.0
                ai3 = 0.0
                for j in range(ns + 1):
                    ar5 += e5[j] * K[j, i].real
                    ai5 += e5[j] * K[j, i].imag
                    ar3 += e3[j] * K[j, i].real
                    ai3 += e3[j] * K[j, i].imag
                n5 += ar5 * ar5 + ai5 * ai5
                n3 += ar3 * ar3 + ai3 * ai3
            if n5 == 0.0 and n3 == 0.0:
                err = 0.0
            else:
                err = h_step * n5 / sqrt(n5 + 0.01 * n3)
            tol = eps * scale * h_step
            ratio = err / tol
            if ratio <= 1.0:
                t = t + h_step
                for i in range(n):
                    y[i] = ynew[i]
                    K[0, i] = K[ns, i]
                accepted += 1
                if ratio == 0.0:
                    factor = 10.0
                else:
                    factor = fmin(10.0, fmax(0.2, 0.9 * pow(ratio, -1.0 / 8.0)))
                if clipped:
                    # a step shortened to land on a sample says nothing against h
                    h = fmax(h, h_step * factor)
                else:
                    h = h_step * factor
                if clipped:
                    t = t_target
                    for i in range(n):
                        out[isamp, i] = y[i]
                    isamp += 1
            else:
                rejected += 1
                h = h_step * fmax(0.2, 0.9 * pow(ratio, -1.0 / 8.0))

    return out_arr, {
        "accepted": accepted,
        "rejected": rejected,
        "nfev": nfev,
        "status": status,
        "fail_time": fail_t,
        "samples_done": isamp,
    }
