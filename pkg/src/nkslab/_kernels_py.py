"""Pure-Python stepping kernels (numpy-vectorized per step).

Semantics must match ``_kernels.pyx`` exactly: same per-step order of
operations (Lyapunov sums, gain ramp, boundary derivative estimates,
feedback, constraint pinning, logging, interior update, blow-up guard), so
that either backend can run underneath the engine.

Per-step order for one segment (fixed regime, fixed gain slopes):
  1. V1, V2 from left-endpoint Riemann sums of the current state
  2. gains ramp by slope * dt
  3. boundary third derivatives from one-sided stencils
  4. feedback evaluation, regime routing
  5. boundary nodes pinned (Dirichlet value + duplicated neighbour)
  6. log/snapshot rows for this step index
  7. interior nodes advance by explicit Euler (or classical RK4 with the
     boundary values held over the step)
  8. blow-up guard on the updated state
"""

import math

import numpy as np

BACKEND_NAME = "python"

FORCING_ZERO = 0
FORCING_SINUSOID = 1
FORCING_TABULATED = 2

STATUS_OK = 0
STATUS_BLOWUP = 1


def _kappa(V, om, th):
    if V <= 0.0:
        return 0.0
    root = V ** (1.0 / 3.0)
    level = (1.0 / 3.0) * (1.0 + 3.0 * th) * root * root
    if abs(om) >= level:
        if om > 0.0:
            return -root
        if om < 0.0:
            return root
        return 0.0
    return -3.0 * (3.0 * th + 1.0) * root


def _forcing_values(fkind, famp, fomega, ftab, t):
    if fkind == FORCING_ZERO:
        return 0.0
    if fkind == FORCING_SINUSOID:
        return famp * math.sin(fomega * t)
    return ftab   # tabulated: per-node array aligned with the interior slice


def run_intermittent_segment(
        w, v, d1w, d2w, d4w, d1v, d2v, d4v, lamw, lamv, hw, hv,
        st3w, st3v, fkind, famp, fomega, ftabw, ftabv,
        dt, i0, nsteps, regime, th1, th2, slope1, slope2,
        use_rk4, blowup_cap, log_stride, logs, snap_stride, snap_t, snaps):
    """Advance both subdomains nsteps; returns (th1, th2, u1, u2, status, stop)."""
    nw = len(w)
    nv = len(v)
    iw = slice(2, nw - 2)
    iv = slice(2, nv - 2)
    d1wi, d2wi, d4wi = d1w[iw], d2w[iw], d4w[iw]
    d1vi, d2vi, d4vi = d1v[iv], d2v[iv], d4v[iv]
    lamwi = lamw[iw]
    lamvi = lamv[iv]
    ftabwi = ftabw[iw] if ftabw is not None else None
    ftabvi = ftabv[iv] if ftabv is not None else None
    u1 = 0.0
    u2 = 0.0

    def rhs_w(state, t):
        f = _forcing_values(fkind, famp, fomega, ftabwi, t)
        return f - state[iw] * (d1wi @ state) - lamwi * (d2wi @ state) - d4wi @ state

    def rhs_v(state, t):
        f = _forcing_values(fkind, famp, fomega, ftabvi, t)
        return f - state[iv] * (d1vi @ state) - lamvi * (d2vi @ state) - d4vi @ state

    for s in range(nsteps):
        i = i0 + s
        t = i * dt
        V1 = 0.5 * hw * float(np.dot(w[:-1], w[:-1]))
        V2 = 0.5 * hv * float(np.dot(v[:-1], v[:-1]))
        th1 += slope1 * dt
        th2 += slope2 * dt
        om1 = float(np.dot(st3w, w[:4]))
        om2 = float(np.dot(st3v, v[-4:]))
        if regime == 1:
            u1 = _kappa(V1, om1, th1)
            u2 = 0.0
        else:
            u1 = 0.0
            u2 = -_kappa(V2, om2, th2)
        w[0] = u1
        w[1] = u1
        w[-1] = 0.0
        w[-2] = 0.0
        v[0] = 0.0
        v[1] = 0.0
        v[-1] = u2
        v[-2] = u2
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
            snaps[r, :nw] = w
            snaps[r, nw:] = v
        if use_rk4:
            k1w, k1v = rhs_w(w, t), rhs_v(v, t)
            ww, vv = w.copy(), v.copy()
            ww[iw] = w[iw] + 0.5 * dt * k1w
            vv[iv] = v[iv] + 0.5 * dt * k1v
            k2w, k2v = rhs_w(ww, t + 0.5 * dt), rhs_v(vv, t + 0.5 * dt)
            ww[iw] = w[iw] + 0.5 * dt * k2w
            vv[iv] = v[iv] + 0.5 * dt * k2v
            k3w, k3v = rhs_w(ww, t + 0.5 * dt), rhs_v(vv, t + 0.5 * dt)
            ww[iw] = w[iw] + dt * k3w
            vv[iv] = v[iv] + dt * k3v
            k4w, k4v = rhs_w(ww, t + dt), rhs_v(vv, t + dt)
            w[iw] += (dt / 6.0) * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
            v[iv] += (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        else:
            w[iw] += dt * rhs_w(w, t)
            v[iv] += dt * rhs_v(v, t)
        bad = (not np.all(np.isfinite(w))) or (not np.all(np.isfinite(v)))
        if bad or max(np.max(np.abs(w)), np.max(np.abs(v))) > blowup_cap:
            return th1, th2, u1, u2, STATUS_BLOWUP, i
    return th1, th2, u1, u2, STATUS_OK, i0 + nsteps - 1


def run_full_sensing_segment(
        u, d1, d2, d4, lam, h, st3l, fkind, famp, fomega, ftab,
        dt, i0, nsteps, th, sigma, eps_over_sigma, check_enabled, latched,
        delta_jump, use_rk4, blowup_cap, log_stride, logs,
        snap_stride, snap_t, snaps):
    """Advance the single full-sensing domain over one check window.

    The envelope anchor is the Lyapunov value at the window's first step;
    on the first violation the gain jumps once and the latch holds until the
    next window.  Returns (th, latched, u1, status, stop).
    """
    n = len(u)
    ii = slice(2, n - 2)
    d1i, d2i, d4i = d1[ii], d2[ii], d4[ii]
    lami = lam[ii]
    ftabi = ftab[ii] if ftab is not None else None
    t0 = i0 * dt
    V_anchor = 0.0
    u1 = 0.0

    def rhs_u(state, t):
        f = _forcing_values(fkind, famp, fomega, ftabi, t)
        return f - state[ii] * (d1i @ state) - lami * (d2i @ state) - d4i @ state

    for s in range(nsteps):
        i = i0 + s
        t = i * dt
        V = 0.5 * h * float(np.dot(u[:-1], u[:-1]))
        if s == 0:
            V_anchor = V
        if check_enabled and not latched:
            envelope = V_anchor * math.exp(-sigma * (t - t0)) + eps_over_sigma
            if V > envelope:
                th += delta_jump
                latched = True
        om = float(np.dot(st3l, u[:4]))
        u1 = _kappa(V, om, th)
        u[0] = u1
        u[1] = u1
        u[-1] = 0.0
        u[-2] = 0.0
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
            snaps[r, :] = u
        if use_rk4:
            k1 = rhs_u(u, t)
            uu = u.copy()
            uu[ii] = u[ii] + 0.5 * dt * k1
            k2 = rhs_u(uu, t + 0.5 * dt)
            uu[ii] = u[ii] + 0.5 * dt * k2
            k3 = rhs_u(uu, t + 0.5 * dt)
            uu[ii] = u[ii] + dt * k3
            k4 = rhs_u(uu, t + dt)
            u[ii] += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        else:
            u[ii] += dt * rhs_u(u, t)
        if (not np.all(np.isfinite(u))) or np.max(np.abs(u)) > blowup_cap:
            return th, bool(latched), u1, STATUS_BLOWUP, i
    return th, bool(latched), u1, STATUS_OK, i0 + nsteps - 1
