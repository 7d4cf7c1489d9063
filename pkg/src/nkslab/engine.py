"""Deterministic closed-loop time integration.

The run is organised as segments between adaptation events (switching
instants for the intermittent modes, check-grid points under full sensing).
Rule evaluation and anchor bookkeeping happen here, through the adaptation
state machine; the per-step work inside a segment runs in a stepping kernel
(compiled when available, pure Python otherwise) with the gain slopes
latched.  Events fire at the first simulation step at or past their instant
and anchors store the Lyapunov values computed at that same step.
"""

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from . import adaptation as ad
from .backend import get_backend
from .errors import BeyondHorizonError, ConfigError, UnstableDtError
from .lyapunov import TrajectoryLog
from .model import SubdomainState
from .rbf import build_derivative_operators, build_grid, make_boundary_stencil
from .schedule import SwitchingSequence

INTERMITTENT_GES = "intermittent_GES"
INTERMITTENT_ISS = "intermittent_ISS"
INTERMITTENT_GUUB = "intermittent_GUUB"
FULL_SENSING_GPA = "full_sensing_GpA"

MODES = (INTERMITTENT_GES, INTERMITTENT_ISS, INTERMITTENT_GUUB, FULL_SENSING_GPA)

_FORCING_KINDS = {"zero": 0, "sinusoid": 1, "tabulated": 2}

_VARIANT_RULES = {
    ad.GES_ALG1: ad.alg1_on_window_start,
    ad.ISS_ALG3: ad.alg3_on_window_start,
    ad.GUUB_ALG4: ad.alg4_on_window_start,
}


@dataclass(frozen=True)
class LambdaSpec:
    kind: str = "constant"          # constant | sampled
    value: float = 0.0
    x_table: tuple | None = None    # sampled profile support points
    f_table: tuple | None = None
    prime_sup: float = 0.0

    def sample(self, nodes: np.ndarray) -> np.ndarray:
        if self.kind == "constant":
            return np.full(len(nodes), self.value)
        if self.kind == "sampled":
            return np.interp(nodes, np.asarray(self.x_table), np.asarray(self.f_table))
        raise ConfigError(f"unknown lambda kind {self.kind!r}")

    @property
    def sup(self) -> float:
        if self.kind == "constant":
            return abs(self.value)
        return float(np.max(np.abs(self.f_table)))


@dataclass(frozen=True)
class ForcingSpec:
    kind: str = "zero"              # zero | sinusoid | tabulated
    amplitude: float = 0.0
    angular_frequency: float = 0.0
    x_table: tuple | None = None
    f_table: tuple | None = None

    @property
    def sup(self) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "sinusoid":
            return abs(self.amplitude)
        return float(np.max(np.abs(self.f_table)))

    def sample(self, nodes: np.ndarray) -> np.ndarray:
        if self.kind == "tabulated":
            return np.interp(nodes, np.asarray(self.x_table), np.asarray(self.f_table))
        return np.zeros(len(nodes))


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str = INTERMITTENT_GES
    Y: float = 0.5
    n_per_subdomain: int = 10
    c: float = 0.4
    dt: float = 1e-7
    t_final: float = 8e-3
    lambda_spec: LambdaSpec = LambdaSpec()
    forcing_spec: ForcingSpec = ForcingSpec()
    amplitude_A: float = 3.0
    schedule: SwitchingSequence | None = None
    adaptation: ad.AdaptationConfig = ad.AdaptationConfig()
    snapshot_stride: int = 100
    blowup_cap: float = 1e9
    output_stride: int = 10
    integrator: str = "euler"       # euler | rk4

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.Y < 1.0:
            raise ConfigError(f"Y={self.Y} must lie strictly inside (0, 1)")
        if self.dt <= 0 or self.t_final <= 0 or self.dt >= self.t_final:
            raise ConfigError("need 0 < dt < t_final")
        if self.blowup_cap <= 0:
            raise ConfigError("blowup_cap must be positive")
        if self.snapshot_stride <= 0 or self.output_stride <= 0:
            raise ConfigError("strides must be positive")
        if self.integrator not in ("euler", "rk4"):
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.mode == FULL_SENSING_GPA:
            if self.adaptation.variant != ad.FULL_SENSING_ALG2:
                raise ConfigError("full-sensing mode requires the variant-2 rule")
        else:
            if self.schedule is None:
                raise ConfigError("intermittent modes need a switching schedule")
            if self.adaptation.variant == ad.FULL_SENSING_ALG2:
                raise ConfigError("variant-2 rule runs only under full sensing")

    def fingerprint(self) -> str:
        # numpy truncates long array reprs, so schedule instants are
        # serialized explicitly
        instants = () if self.schedule is None else tuple(
            float(t) for t in self.schedule.instants)
        payload = (self.mode, self.Y, self.n_per_subdomain, self.c, self.dt,
                   self.t_final, repr(self.lambda_spec), repr(self.forcing_spec),
                   self.amplitude_A, instants, repr(self.adaptation),
                   self.snapshot_stride, self.blowup_cap, self.output_stride,
                   self.integrator)
        return hashlib.sha256(repr(payload).encode()).hexdigest()[:16]


def _n_steps(cfg: ExperimentConfig) -> int:
    return int(math.ceil(cfg.t_final / cfg.dt - 1e-9))


def _step_of(t: float, dt: float) -> int:
    """First simulation step index with step*dt >= t."""
    return int(math.ceil(t / dt - 1e-9))


def _initial_profile(nodes: np.ndarray, amplitude: float) -> np.ndarray:
    return -amplitude * (np.cos(4.0 * np.pi * nodes) - 1.0)


def initial_condition(cfg: ExperimentConfig):
    """Nodal samples of -A (cos(4 pi x) - 1) with homogeneous boundary pins.

    Returns (left state, right state) for the intermittent modes and
    (full-domain state, None) under full sensing.
    """
    if cfg.mode == FULL_SENSING_GPA:
        nodes = np.linspace(0.0, 1.0, cfg.n_per_subdomain)
        u = _initial_profile(nodes, cfg.amplitude_A)
        u[0] = u[1] = 0.0
        u[-1] = u[-2] = 0.0
        return SubdomainState(values=u, time=0.0), None
    xw = np.linspace(0.0, cfg.Y, cfg.n_per_subdomain)
    xv = np.linspace(cfg.Y, 1.0, cfg.n_per_subdomain)
    w = _initial_profile(xw, cfg.amplitude_A)
    v = _initial_profile(xv, cfg.amplitude_A)
    w[0] = w[1] = 0.0
    w[-1] = w[-2] = 0.0
    v[0] = v[1] = 0.0
    v[-1] = v[-2] = 0.0
    return (SubdomainState(values=w, time=0.0), SubdomainState(values=v, time=0.0))


def _check_stability(dt: float, lam_sup: float, ops, label: str):
    norm = float(np.max(np.sum(np.abs(lam_sup * ops.d2 + ops.d4), axis=1)))
    margin = dt * norm
    if margin > 2.0:
        raise UnstableDtError(
            f"dt*||lam*d2 + d4||_inf = {margin:.3f} > 2 on {label}; "
            f"reduce dt below {2.0 / norm:.3e}")
    return margin


def _riemann(values: np.ndarray, h: float) -> float:
    return 0.5 * h * float(np.dot(values[:-1], values[:-1]))


def _forcing_args(spec: ForcingSpec, nodes: np.ndarray):
    kind = _FORCING_KINDS[spec.kind]
    tab = np.ascontiguousarray(spec.sample(nodes))
    return kind, float(spec.amplitude), float(spec.angular_frequency), tab


def _base_meta(cfg: ExperimentConfig, backend, extra: dict) -> dict:
    meta = {
        "fingerprint": cfg.fingerprint(),
        "mode": cfg.mode,
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "sigma": cfg.adaptation.sigma,
        "variant": cfg.adaptation.variant,
        "output_stride": cfg.output_stride,
        "backend": backend.BACKEND_NAME,
        "amplitude_A": cfg.amplitude_A,
        "integrator": cfg.integrator,
    }
    meta.update(extra)
    return meta


def run_closed_loop(cfg: ExperimentConfig, backend=None) -> TrajectoryLog:
    """Simulate the two-subdomain intermittent closed loop."""
    if cfg.mode == FULL_SENSING_GPA:
        return run_full_sensing(cfg, backend=backend)
    kern = backend or get_backend()
    n = cfg.n_per_subdomain
    grid_w = build_grid(0.0, cfg.Y, n, cfg.c)
    grid_v = build_grid(cfg.Y, 1.0, n, cfg.c)
    ops_w = build_derivative_operators(grid_w)
    ops_v = build_derivative_operators(grid_v)
    lam_w = np.ascontiguousarray(cfg.lambda_spec.sample(grid_w.nodes))
    lam_v = np.ascontiguousarray(cfg.lambda_spec.sample(grid_v.nodes))
    _check_stability(cfg.dt, cfg.lambda_spec.sup, ops_w, "left subdomain")
    _check_stability(cfg.dt, cfg.lambda_spec.sup, ops_v, "right subdomain")
    hw, hv = grid_w.spacing, grid_v.spacing
    sten_w = make_boundary_stencil("left", 3, n)
    sten_v = make_boundary_stencil("right", 3, n)
    st3w = np.ascontiguousarray(sten_w.weights / hw**3)
    st3v = np.ascontiguousarray(sten_v.weights / hv**3)
    fk_w = _forcing_args(cfg.forcing_spec, grid_w.nodes)
    fk_v = _forcing_args(cfg.forcing_spec, grid_v.nodes)

    state_w, state_v = initial_condition(cfg)
    w = np.ascontiguousarray(state_w.values)
    v = np.ascontiguousarray(state_v.values)

    steps = _n_steps(cfg)
    seq = cfg.schedule
    if seq.horizon < cfg.t_final - 1e-12:
        raise BeyondHorizonError(
            f"schedule horizon {seq.horizon} does not cover t_final {cfg.t_final}")
    event_steps = []
    for ki, t_i in enumerate(seq.instants, start=1):
        s = _step_of(float(t_i), cfg.dt)
        if s >= steps:
            break
        event_steps.append((s, ki))
    if not event_steps or event_steps[0][0] != 0:
        raise BeyondHorizonError("schedule must open at t=0")

    acfg = cfg.adaptation
    if acfg.delta_per_step:
        acfg = replace(acfg, delta1=acfg.delta1 / cfg.dt, delta2=acfg.delta2 / cfg.dt)
    rule = _VARIANT_RULES[acfg.variant]
    astate = ad.initial_state(acfg)

    n_log = (steps - 1) // cfg.output_stride + 1
    logs = np.zeros((n_log, 7))
    n_snap = (steps - 1) // cfg.snapshot_stride + 1
    snaps = np.zeros((n_snap, 2 * n))
    snap_t = np.zeros(n_snap)

    use_rk4 = 1 if cfg.integrator == "rk4" else 0
    th1, th2 = astate.theta1_hat, astate.theta2_hat
    u1 = u2 = 0.0
    status = 0
    stop = steps - 1
    boundaries = [s for s, _ in event_steps] + [steps]

    for j, (seg_start, ki) in enumerate(event_steps):
        t_event = seg_start * cfg.dt
        V1 = _riemann(w, hw)
        V2 = _riemann(v, hv)
        if ki % 2 == 1:
            kind, cycle = ad.I1, (ki + 1) // 2
            regime = 1
        else:
            kind, cycle = ad.I2, ki // 2
            regime = 2
        astate = replace(astate, theta1_hat=th1, theta2_hat=th2)
        astate = rule(astate, acfg, kind, cycle, t_event, V1, V2)
        seg_end = boundaries[j + 1]
        th1, th2, u1, u2, status, stop = kern.run_intermittent_segment(
            w, v, ops_w.d1, ops_w.d2, ops_w.d4, ops_v.d1, ops_v.d2, ops_v.d4,
            lam_w, lam_v, hw, hv, st3w, st3v,
            fk_w[0], fk_w[1], fk_w[2], fk_w[3], fk_v[3],
            cfg.dt, seg_start, seg_end - seg_start, regime,
            astate.theta1_hat, astate.theta2_hat, astate.slope1, astate.slope2,
            use_rk4, cfg.blowup_cap, cfg.output_stride, logs,
            cfg.snapshot_stride, snap_t, snaps)
        if status != 0:
            break

    meta = _base_meta(cfg, kern, {
        "instants": [float(t) for t in seq.instants],
        "x_nodes": np.concatenate([grid_w.nodes, grid_v.nodes]).tolist(),
        "conditioning": (ops_w.interp_conditioning, ops_v.interp_conditioning),
    })
    return _assemble_log(cfg, logs, snap_t, snaps, steps, status, stop, meta,
                         final_rows=(_riemann(w, hw), _riemann(v, hv), th1, th2, u1, u2))


def run_full_sensing(cfg: ExperimentConfig, backend=None) -> TrajectoryLog:
    """Simulate the single-domain loop with the variant-2 rule on its
    check grid."""
    if cfg.mode != FULL_SENSING_GPA:
        raise ConfigError("run_full_sensing needs mode=full_sensing_GpA")
    kern = backend or get_backend()
    n = cfg.n_per_subdomain
    grid = build_grid(0.0, 1.0, n, cfg.c)
    ops = build_derivative_operators(grid)
    lam = np.ascontiguousarray(cfg.lambda_spec.sample(grid.nodes))
    _check_stability(cfg.dt, cfg.lambda_spec.sup, ops, "full domain")
    h = grid.spacing
    sten = make_boundary_stencil("left", 3, n)
    st3 = np.ascontiguousarray(sten.weights / h**3)
    fk = _forcing_args(cfg.forcing_spec, grid.nodes)

    state, _ = initial_condition(cfg)
    u = np.ascontiguousarray(state.values)

    steps = _n_steps(cfg)
    acfg = cfg.adaptation
    tau = acfg.tau
    window_steps = []
    k = 0
    while True:
        s = _step_of(k * tau, cfg.dt)
        if s >= steps:
            break
        window_steps.append(s)
        k += 1

    n_log = (steps - 1) // cfg.output_stride + 1
    logs = np.zeros((n_log, 7))
    n_snap = (steps - 1) // cfg.snapshot_stride + 1
    snaps = np.zeros((n_snap, n))
    snap_t = np.zeros(n_snap)

    use_rk4 = 1 if cfg.integrator == "rk4" else 0
    th = acfg.theta1_init
    latched = False
    u1 = 0.0
    status = 0
    stop = steps - 1
    boundaries = window_steps + [steps]

    for j, seg_start in enumerate(window_steps):
        seg_end = boundaries[j + 1]
        check_enabled = 1 if j >= 1 else 0   # gains frozen on the first window
        th, latched, u1, status, stop = kern.run_full_sensing_segment(
            u, ops.d1, ops.d2, ops.d4, lam, h, st3,
            fk[0], fk[1], fk[2], fk[3],
            cfg.dt, seg_start, seg_end - seg_start,
            th, acfg.sigma, acfg.epsilon / acfg.sigma,
            check_enabled, 0, acfg.delta1,
            use_rk4, cfg.blowup_cap, cfg.output_stride, logs,
            cfg.snapshot_stride, snap_t, snaps)
        if status != 0:
            break

    meta = _base_meta(cfg, kern, {
        "tau": acfg.tau,
        "epsilon": acfg.epsilon,
        "x_nodes": grid.nodes.tolist(),
        "conditioning": (ops.interp_conditioning,),
    })
    return _assemble_log(cfg, logs, snap_t, snaps, steps, status, stop, meta,
                         final_rows=(_riemann(u, h), 0.0, th, 0.0, u1, 0.0))


def _assemble_log(cfg, logs, snap_t, snaps, steps, status, stop, meta,
                  final_rows) -> TrajectoryLog:
    if status == 0:
        keep = logs
        snap_keep = len(snap_t)
    else:
        keep = logs[: stop // cfg.output_stride + 1]
        snap_keep = stop // cfg.snapshot_stride + 1
    V1f, V2f, th1f, th2f, u1f, u2f = final_rows
    if status == 0:
        terminal = np.array([[steps * cfg.dt, V1f, V2f, th1f, th2f, u1f, u2f]])
        keep = np.vstack([keep, terminal])
    log = TrajectoryLog(
        t=keep[:, 0].copy(), V1=keep[:, 1].copy(), V2=keep[:, 2].copy(),
        theta1_hat=keep[:, 3].copy(), theta2_hat=keep[:, 4].copy(),
        u1=keep[:, 5].copy(), u2=keep[:, 6].copy(),
        snapshot_times=snap_t[:snap_keep].copy(),
        snapshots=snaps[:snap_keep].copy(),
        meta=meta,
        truncated=(status != 0),
        diagnostic="" if status == 0 else
        f"blow-up guard tripped at t={stop * cfg.dt:.6e} (step {stop})",
    )
    return log


def run_batch(cfgs, backend=None):
    """Independent sequential runs; per-run failures become empty truncated
    logs carrying the error text, so siblings always complete."""
    out = []
    for cfg in cfgs:
        try:
            out.append(run_closed_loop(cfg, backend=backend))
        except Exception as exc:
            out.append(TrajectoryLog(
                t=np.empty(0), V1=np.empty(0), V2=np.empty(0),
                theta1_hat=np.empty(0), theta2_hat=np.empty(0),
                u1=np.empty(0), u2=np.empty(0),
                meta={"error": str(exc), "fingerprint": cfg.fingerprint()},
                truncated=True, diagnostic=str(exc)))
    return out
