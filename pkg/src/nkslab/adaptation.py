"""Event-driven gain adaptation.

Four variants share one state machine: the gain estimates ramp at a latched
slope between switching instants (variants 1, 3, 4) or are piecewise
constant with at most one jump per check window (variant 2).  All rules only
ever increase the gains.  Rule evaluation happens at window starts; between
events the state evolves through ``integrate_theta`` only.

Variant 1 triggers on observed Lyapunov decay slower than the prescribed
rate across one full sensing cycle.  Variant 3 adds a forcing allowance
built from the known bound constants; variant 4 replaces those constants
with the anchored gain itself (no forcing knowledge).  Variant 2 checks a
decay envelope on a fixed time grid under full sensing and jumps on the
first violation in a window.
"""

import math
from dataclasses import dataclass, field, replace

from .errors import MissingAnchorError

GES_ALG1 = "GES_Alg1"
FULL_SENSING_ALG2 = "FullSensing_Alg2"
ISS_ALG3 = "ISS_Alg3"
GUUB_ALG4 = "GUUB_Alg4"

VARIANTS = (GES_ALG1, FULL_SENSING_ALG2, ISS_ALG3, GUUB_ALG4)

I1 = "I1"
I2 = "I2"


@dataclass(frozen=True)
class AdaptationConfig:
    variant: str = GES_ALG1
    delta1: float = 0.01
    delta2: float = 0.01
    sigma: float = 100.0
    epsilon: float | None = None       # variant 2
    tau: float | None = None           # variant 2
    C1: float | None = None            # variant 3
    C2: float | None = None            # variant 3
    theta1_init: float = 0.0
    theta2_init: float = 0.0
    # When set, the simulation engine reads the ramp rates as "delta per time
    # step" instead of "delta per unit time" (variants 1, 3, 4 only).
    delta_per_step: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for name in ("delta1", "delta2", "sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.theta1_init < 0 or self.theta2_init < 0:
            raise ValueError("initial gain estimates must be nonnegative")
        if self.variant == FULL_SENSING_ALG2:
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError("variant 2 needs epsilon > 0")
            if self.tau is None or self.tau <= 0:
                raise ValueError("variant 2 needs tau > 0")
        if self.variant == ISS_ALG3:
            if self.C1 is None or self.C2 is None or self.C1 < 0 or self.C2 < 0:
                raise ValueError("variant 3 needs nonnegative C1 and C2")


@dataclass(frozen=True)
class AdaptationState:
    theta1_hat: float = 0.0
    theta2_hat: float = 0.0
    slope1: float = 0.0
    slope2: float = 0.0
    # previous same-regime window-start samples: kind -> (t, V, theta_at_t)
    anchors: dict = field(default_factory=dict)
    last_window_start: float = 0.0
    violation_latched: bool = False


def initial_state(cfg: AdaptationConfig) -> AdaptationState:
    return AdaptationState(theta1_hat=cfg.theta1_init, theta2_hat=cfg.theta2_init)


def integrate_theta(state: AdaptationState, dt: float) -> AdaptationState:
    """Ramp the gains by the latched slopes over one step."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return replace(state,
                   theta1_hat=state.theta1_hat + state.slope1 * dt,
                   theta2_hat=state.theta2_hat + state.slope2 * dt)


def _store_anchor(state: AdaptationState, kind: str, t: float, V: float,
                  theta: float) -> dict:
    anchors = dict(state.anchors)
    anchors[kind] = (t, V, theta)
    return anchors


def _decay_trigger(V_now: float, V_prev: float, sigma: float, dt_cycle: float,
                   allowance: float) -> bool:
    return V_now > V_prev * math.exp(-sigma * dt_cycle) + allowance


def _window_start(state: AdaptationState, cfg: AdaptationConfig, kind: str,
                  k: int, t: float, V1: float, V2: float,
                  allowance_fn) -> AdaptationState:
    """Shared rule shape of variants 1, 3, 4: freeze the other gain's slope,
    compare the fresh Lyapunov sample against the decayed previous-cycle
    anchor plus a variant allowance, and latch this gain's slope."""
    if kind not in (I1, I2):
        raise ValueError(f"window kind must be {I1!r} or {I2!r}")
    V_now = V1 if kind == I1 else V2
    anchor = state.anchors.get(kind)
    if k >= 2 and anchor is None:
        raise MissingAnchorError(f"no anchor for {kind} at cycle k={k}")
    if k < 2 or anchor is None:
        new_slope = 0.0   # first cycle runs with frozen gains
    else:
        t_prev, V_prev, theta_prev = anchor
        dt_cycle = t - t_prev
        allowance = allowance_fn(kind, theta_prev, dt_cycle)
        trigger = _decay_trigger(V_now, V_prev, cfg.sigma, dt_cycle, allowance)
        new_slope = (cfg.delta1 if kind == I1 else cfg.delta2) if trigger else 0.0
    theta_now = state.theta1_hat if kind == I1 else state.theta2_hat
    anchors = _store_anchor(state, kind, t, V_now, theta_now)
    if kind == I1:
        return replace(state, slope1=new_slope, slope2=0.0, anchors=anchors,
                       last_window_start=t)
    return replace(state, slope2=new_slope, slope1=0.0, anchors=anchors,
                   last_window_start=t)


def alg1_on_window_start(state, cfg, kind, k, t, V1, V2) -> AdaptationState:
    """Variant 1: ramp when decay at rate sigma across the cycle failed."""
    return _window_start(state, cfg, kind, k, t, V1, V2,
                         lambda kind_, th_, dtc_: 0.0)


def alg3_on_window_start(state, cfg, kind, k, t, V1, V2) -> AdaptationState:
    """Variant 3: known forcing bound; allowance (C + C^2/4) e^((th_prev+1) dt)."""
    def allowance(kind_, theta_prev, dt_cycle):
        C = cfg.C1 if kind_ == I1 else cfg.C2
        return (C + C * C / 4.0) * math.exp((theta_prev + 1.0) * dt_cycle)
    return _window_start(state, cfg, kind, k, t, V1, V2, allowance)


def alg4_on_window_start(state, cfg, kind, k, t, V1, V2) -> AdaptationState:
    """Variant 4: unknown forcing; the anchored gain itself sets the allowance."""
    def allowance(kind_, theta_prev, dt_cycle):
        return (theta_prev + theta_prev * theta_prev / 4.0) * math.exp(
            (theta_prev + 1.0) * dt_cycle)
    return _window_start(state, cfg, kind, k, t, V1, V2, allowance)


def alg2_on_window_start(state: AdaptationState, t: float) -> AdaptationState:
    """Open a fresh check window at a grid point: clear the jump latch."""
    return replace(state, last_window_start=t, violation_latched=False,
                   slope1=0.0, slope2=0.0)


def alg2_on_tick(state: AdaptationState, cfg: AdaptationConfig, t: float,
                 V_now: float, V_at_window_start: float) -> AdaptationState:
    """Variant 2 envelope check at one instant of the current window.

    On the first violation of V <= V(win) e^(-sigma (t - win)) + eps/sigma
    the gain jumps by delta and the latch suppresses further jumps until the
    next window opens.
    """
    if state.violation_latched:
        return state
    envelope = (V_at_window_start * math.exp(-cfg.sigma * (t - state.last_window_start))
                + cfg.epsilon / cfg.sigma)
    if V_now > envelope:
        return replace(state, theta1_hat=state.theta1_hat + cfg.delta1,
                       violation_latched=True)
    return state
