# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled stepping kernels.

Twin of ``_kernels_py``: same argument lists, same per-step order of
operations, same return values.  Kept in lockstep so the engine can run on
either backend; the cross-backend agreement test in the suite guards the
pairing.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, isfinite, pow, sin

BACKEND_NAME = "compiled"

FORCING_ZERO = 0
FORCING_SINUSOID = 1
FORCING_TABULATED = 2

STATUS_OK = 0
STATUS_BLOWUP = 1

cdef int C_FORCING_ZERO = 0
cdef int C_FORCING_SINUSOID = 1
cdef int C_FORCING_TABULATED = 2


cdef inline double _kappa(double V, double om, double th) nogil:
    cdef double root, level
    if V <= 0.0:
        return 0.0
    root = pow(V, 1.0 / 3.0)
    level = (1.0 / 3.0) * (1.0 + 3.0 * th) * root * root
    if fabs(om) >= level:
        if om > 0.0:
            return -root
        if om < 0.0:
            return root
        return 0.0
    return -3.0 * (3.0 * th + 1.0) * root


cdef inline double _forcing_scalar(int fkind, double famp, double fomega,
                                   double t) nogil:
    if fkind == C_FORCING_SINUSOID:
        return famp * sin(fomega * t)
    return 0.0


cdef void _rhs(double[::1] state, double[:, ::1] d1, double[:, ::1] d2,
               double[:, ::1] d4, double[::1] lam, int fkind, double famp,
               double fomega, double[::1] ftab, double t,
               double[::1] out) nogil:
    """Interior right-hand side into out[0 .. n-5]."""
    cdef Py_ssize_t n = state.shape[0]
    cdef Py_ssize_t j, k
    cdef double acc1, acc2, acc4, sk, f
    f = _forcing_scalar(fkind, famp, fomega, t)
    for j in range(2, n - 2):
        acc1 = 0.0
        acc2 = 0.0
        acc4 = 0.0
        for k in range(n):
            sk = state[k]
            acc1 += d1[j, k] * sk
            acc2 += d2[j, k] * sk
            acc4 += d4[j, k] * sk
        if fkind == C_FORCING_TABULATED:
            f = ftab[j]
        out[j - 2] = f - state[j] * acc1 - lam[j] * acc2 - acc4


cdef inline bint _state_bad(double[::1] arr, double cap) nogil:
    cdef Py_ssize_t k
    for k in range(arr.shape[0]):
        if not isfinite(arr[k]) or fabs(arr[k]) > cap:
            return True
    return False


def run_intermittent_segment(
        double[::1] w, double[::1] v,
        double[:, ::1] d1w, double[:, ::1] d2w, double[:, ::1] d4w,
        double[:, ::1] d1v, double[:, ::1] d2v, double[:, ::1] d4v,
        double[::1] lamw, double[::1] lamv, double hw, double hv,
        double[::1] st3w, double[::1] st3v,
        int fkind, double famp, double fomega,
        double[::1] ftabw, double[::1] ftabv,
        double dt, long i0, long nsteps, int regime,
        double th1, double th2, double slope1, double slope2,
        int use_rk4, double blowup_cap, long log_stride,
        double[:, ::1] logs, long snap_stride, double[::1] snap_t,
        double[:, ::1] snaps):
    cdef Py_ssize_t nw = w.shape[0]
    cdef Py_ssize_t nv = v.shape[0]
    cdef long s, i
    cdef Py_ssize_t j, r
    cdef double t, V1, V2, om1, om2, u1 = 0.0, u2 = 0.0
    cdef int status = STATUS_OK
    kw1 = np.empty(nw - 4); kw2 = np.empty(nw - 4)
    kw3 = np.empty(nw - 4); kw4 = np.empty(nw - 4)
    kv1 = np.empty(nv - 4); kv2 = np.empty(nv - 4)
    kv3 = np.empty(nv - 4); kv4 = np.empty(nv - 4)
    wtmp = np.empty(nw); vtmp = np.empty(nv)
    cdef double[::1] k1w = kw1, k2w = kw2, k3w = kw3, k4w = kw4
    cdef double[::1] k1v = kv1, k2v = kv2, k3v = kv3, k4v = kv4
    cdef double[::1] wt = wtmp, vt = vtmp

    for s in range(nsteps):
        i = i0 + s
        t = i * dt
        V1 = 0.0
        for j in range(nw - 1):
            V1 += w[j] * w[j]
        V1 *= 0.5 * hw
        V2 = 0.0
        for j in range(nv - 1):
            V2 += v[j] * v[j]
        V2 *= 0.5 * hv
        th1 += slope1 * dt
        th2 += slope2 * dt
        om1 = 0.0
        for j in range(4):
            om1 += st3w[j] * w[j]
        om2 = 0.0
        for j in range(4):
            om2 += st3v[j] * v[nv - 4 + j]
        if regime == 1:
            u1 = _kappa(V1, om1, th1)
            u2 = 0.0
        else:
            u1 = 0.0
            u2 = -_kappa(V2, om2, th2)
        w[0] = u1; w[1] = u1; w[nw - 1] = 0.0; w[nw - 2] = 0.0
        v[0] = 0.0; v[1] = 0.0; v[nv - 1] = u2; v[nv - 2] = u2
        if i % log_stride == 0:
            r = i // log_stride
            logs[r, 0] = t
            logs[r, 1] = V1
            logs[r, 2] = V2
            logs[r, 3] = th1
            logs[r, 4] = th2
            logs[r, 5] = u1
            logs[r, 6] = u2
        if snap_stride > 0 and i % snap_stride == 0:
            r = i // snap_stride
            snap_t[r] = t
            for j in range(nw):
                snaps[r, j] = w[j]
            for j in range(nv):
                snaps[r, nw + j] = v[j]
        if use_rk4:
            _rhs(w, d1w, d2w, d4w, lamw, fkind, famp, fomega, ftabw, t, k1w)
            _rhs(v, d1v, d2v, d4v, lamv, fkind, famp, fomega, ftabv, t, k1v)
            for j in range(nw):
                wt[j] = w[j]
            for j in range(nv):
                vt[j] = v[j]
            for j in range(2, nw - 2):
                wt[j] = w[j] + 0.5 * dt * k1w[j - 2]
            for j in range(2, nv - 2):
                vt[j] = v[j] + 0.5 * dt * k1v[j - 2]
            _rhs(wt, d1w, d2w, d4w, lamw, fkind, famp, fomega, ftabw, t + 0.5 * dt, k2w)
            _rhs(vt, d1v, d2v, d4v, lamv, fkind, famp, fomega, ftabv, t + 0.5 * dt, k2v)
            for j in range(2, nw - 2):
                wt[j] = w[j] + 0.5 * dt * k2w[j - 2]
            for j in range(2, nv - 2):
                vt[j] = v[j] + 0.5 * dt * k2v[j - 2]
            _rhs(wt, d1w, d2w, d4w, lamw, fkind, famp, fomega, ftabw, t + 0.5 * dt, k3w)
            _rhs(vt, d1v, d2v, d4v, lamv, fkind, famp, fomega, ftabv, t + 0.5 * dt, k3v)
            for j in range(2, nw - 2):
                wt[j] = w[j] + dt * k3w[j - 2]
            for j in range(2, nv - 2):
                vt[j] = v[j] + dt * k3v[j - 2]
            _rhs(wt, d1w, d2w, d4w, lamw, fkind, famp, fomega, ftabw, t + dt, k4w)
            _rhs(vt, d1v, d2v, d4v, lamv, fkind, famp, fomega, ftabv, t + dt, k4v)
            for j in range(2, nw - 2):
                w[j] += (dt / 6.0) * (k1w[j - 2] + 2.0 * k2w[j - 2]
                                      + 2.0 * k3w[j - 2] + k4w[j - 2])
            for j in range(2, nv - 2):
                v[j] += (dt / 6.0) * (k1v[j - 2] + 2.0 * k2v[j - 2]
                                      + 2.0 * k3v[j - 2] + k4v[j - 2])
        else:
            _rhs(w, d1w, d2w, d4w, lamw, fkind, famp, fomega, ftabw, t, k1w)
            _rhs(v, d1v, d2v, d4v, lamv, fkind, famp, fomega, ftabv, t, k1v)
            for j in range(2, nw - 2):
                w[j] += dt * k1w[j - 2]
            for j in range(2, nv - 2):
                v[j] += dt * k1v[j - 2]
        if _state_bad(w, blowup_cap) or _state_bad(v, blowup_cap):
            return th1, th2, u1, u2, STATUS_BLOWUP, i
    return th1, th2, u1, u2, STATUS_OK, i0 + nsteps - 1


def run_full_sensing_segment(
        double[::1] u,
        double[:, ::1] d1, double[:, ::1] d2, double[:, ::1] d4,
        double[::1] lam, double h, double[::1] st3l,
        int fkind, double famp, double fomega, double[::1] ftab,
        double dt, long i0, long nsteps,
        double th, double sigma, double eps_over_sigma,
        int check_enabled, int latched, double delta_jump,
        int use_rk4, double blowup_cap, long log_stride,
        double[:, ::1] logs, long snap_stride, double[::1] snap_t,
        double[:, ::1] snaps):
    cdef Py_ssize_t n = u.shape[0]
    cdef long s, i
    cdef Py_ssize_t j, r
    cdef double t, V, om, u1 = 0.0, V_anchor = 0.0, envelope
    cdef double t0 = i0 * dt
    k1a = np.empty(n - 4); k2a = np.empty(n - 4)
    k3a = np.empty(n - 4); k4a = np.empty(n - 4)
    utmp = np.empty(n)
    cdef double[::1] k1 = k1a, k2 = k2a, k3 = k3a, k4 = k4a
    cdef double[::1] ut = utmp

    for s in range(nsteps):
        i = i0 + s
        t = i * dt
        V = 0.0
        for j in range(n - 1):
            V += u[j] * u[j]
        V *= 0.5 * h
        if s == 0:
            V_anchor = V
        if check_enabled and not latched:
            envelope = V_anchor * exp(-sigma * (t - t0)) + eps_over_sigma
            if V > envelope:
                th += delta_jump
                latched = 1
        om = 0.0
        for j in range(4):
            om += st3l[j] * u[j]
        u1 = _kappa(V, om, th)
        u[0] = u1; u[1] = u1; u[n - 1] = 0.0; u[n - 2] = 0.0
        if i % log_stride == 0:
            r = i // log_stride
            logs[r, 0] = t
            logs[r, 1] = V
            logs[r, 2] = 0.0
            logs[r, 3] = th
            logs[r, 4] = 0.0
            logs[r, 5] = u1
            logs[r, 6] = 0.0
        if snap_stride > 0 and i % snap_stride == 0:
            r = i // snap_stride
            snap_t[r] = t
            for j in range(n):
                snaps[r, j] = u[j]
        if use_rk4:
            _rhs(u, d1, d2, d4, lam, fkind, famp, fomega, ftab, t, k1)
            for j in range(n):
                ut[j] = u[j]
            for j in range(2, n - 2):
                ut[j] = u[j] + 0.5 * dt * k1[j - 2]
            _rhs(ut, d1, d2, d4, lam, fkind, famp, fomega, ftab, t + 0.5 * dt, k2)
            for j in range(2, n - 2):
                ut[j] = u[j] + 0.5 * dt * k2[j - 2]
            _rhs(ut, d1, d2, d4, lam, fkind, famp, fomega, ftab, t + 0.5 * dt, k3)
            for j in range(2, n - 2):
                ut[j] = u[j] + dt * k3[j - 2]
            _rhs(ut, d1, d2, d4, lam, fkind, famp, fomega, ftab, t + dt, k4)
            for j in range(2, n - 2):
                u[j] += (dt / 6.0) * (k1[j - 2] + 2.0 * k2[j - 2]
                                      + 2.0 * k3[j - 2] + k4[j - 2])
        else:
            _rhs(u, d1, d2, d4, lam, fkind, famp, fomega, ftab, t, k1)
            for j in range(2, n - 2):
                u[j] += dt * k1[j - 2]
        if _state_bad(u, blowup_cap):
            return th, bool(latched), u1, STATUS_BLOWUP, i
    return th, bool(latched), u1, STATUS_OK, i0 + nsteps - 1
