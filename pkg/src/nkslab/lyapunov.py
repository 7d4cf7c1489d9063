"""Riemann-sum Lyapunov functionals, trajectory logs, and certificate checks.

The checks operationalize the four stability notions as falsifiable
post-hoc tests on logged trajectories: exponential decay with a finite
fitted overshoot (GES), a computable tail bound under full sensing (GpA), a
fitted offset bound (ISS), and an initial-condition-uniform terminal
plateau (GUUB).  Proof-internal overshoot/offset constants are never given
in closed form by the theory, so they appear here only as fitted values.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyLogError, InsufficientLogsError
from .rbf import SpatialGrid

GAMMA_CAP = 1e6          # fitted overshoot above this flags non-decay
UNIFORMITY_RATIO = 2.0   # terminal plateaus must agree within this factor
TAIL_FRACTION = 0.1      # plateau statistics use this trailing share of the horizon


@dataclass
class TrajectoryLog:
    t: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    theta1_hat: np.ndarray
    theta2_hat: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    snapshot_times: np.ndarray = field(default_factory=lambda: np.empty(0))
    snapshots: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    meta: dict = field(default_factory=dict)
    truncated: bool = False
    diagnostic: str = ""

    def __len__(self):
        return len(self.t)

    @property
    def v_total(self) -> np.ndarray:
        return self.V1 + self.V2

    def columns(self) -> tuple:
        return (self.t, self.V1, self.V2, self.theta1_hat, self.theta2_hat,
                self.u1, self.u2)


@dataclass(frozen=True)
class CertificateReport:
    kind: str                # GES | GpA | ISS | GUUB
    gamma: float
    rate: float
    offset: float
    passed: bool
    details: str

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"[{self.kind}] {status}  gamma={self.gamma:.6g}  "
                f"rate={self.rate:.6g}  offset={self.offset:.6g}\n{self.details}")

    def machine_block(self) -> str:
        """Key-value block for scripted consumers."""
        return "\n".join([
            f"kind={self.kind}",
            f"gamma={self.gamma!r}",
            f"rate={self.rate!r}",
            f"offset={self.offset!r}",
            f"passed={int(self.passed)}",
        ])


def riemann_V(state, grid: SpatialGrid) -> float:
    """Half the left-endpoint Riemann sum of the squared nodal values."""
    values = np.asarray(getattr(state, "values", state), dtype=float)
    if len(values) != grid.n:
        raise ValueError(f"state length {len(values)} != grid size {grid.n}")
    dx = grid.spacing
    return float(0.5 * dx * np.dot(values[:-1], values[:-1]))


def fit_decay_rate(log: TrajectoryLog, t_lo: float, t_hi: float) -> float:
    """Least-squares slope of -log(V1+V2) over [t_lo, t_hi]."""
    v = log.v_total
    mask = (log.t >= t_lo) & (log.t <= t_hi) & (v > 0)
    if mask.sum() < 2:
        raise EmptyLogError(f"no positive samples in [{t_lo}, {t_hi}]")
    coeffs = np.polyfit(log.t[mask], np.log(v[mask]), 1)
    return float(-coeffs[0])


def final_cycles_window(instants, n_cycles: int = 2) -> tuple:
    """Time window spanning the final n complete sensing cycles (one cycle =
    one regime-1 window plus the following regime-2 window)."""
    inst = np.asarray(instants, dtype=float)
    span = 2 * n_cycles
    if len(inst) < span + 1:
        raise EmptyLogError(f"schedule too short for {n_cycles} final cycles")
    return float(inst[-1 - span]), float(inst[-1])


def check_ges(log: TrajectoryLog, sigma: float, fit_window: tuple | None = None,
              gamma_cap: float = GAMMA_CAP) -> CertificateReport:
    """Fitted-overshoot exponential decay certificate.

    gamma* is the smallest constant making V1+V2 <= gamma* (V1(0)+V2(0))
    e^(-sigma t) hold on the whole log; the check passes when gamma* is
    finite and below the cap.  The fitted rate over the requested window is
    reported for reference.
    """
    if len(log) == 0:
        raise EmptyLogError("empty trajectory log")
    v0 = log.V1[0] + log.V2[0]
    if v0 <= 0:
        raise EmptyLogError("initial Lyapunov value must be positive")
    envelope = np.exp(sigma * log.t) / v0
    gamma_star = float(np.max(log.v_total * envelope))
    rate = np.nan
    if fit_window is not None:
        rate = fit_decay_rate(log, *fit_window)
    passed = bool(np.isfinite(gamma_star) and gamma_star <= gamma_cap
                  and not log.truncated)
    details = (f"gamma*={gamma_star:.6g} (cap {gamma_cap:.0e}); "
               f"fitted rate={rate:.6g} vs prescribed sigma={sigma:.6g}")
    if log.truncated:
        details += f"; log truncated: {log.diagnostic}"
    return CertificateReport("GES", gamma_star, rate, 0.0, passed, details)


def gpa_tail_bound(sigma: float, epsilon: float, tau: float) -> float:
    """Certified full-sensing tail bound (1/(1-e^(-sigma tau))) eps/sigma
    plus the in-window offset eps/sigma."""
    geo = 1.0 / (1.0 - np.exp(-sigma * tau))
    return float(geo * epsilon / sigma + epsilon / sigma)


def check_gpa(log: TrajectoryLog, sigma: float, epsilon: float, tau: float,
              tolerance: float = 0.2) -> CertificateReport:
    """Practical-attractivity check: the trailing maximum of V (over the
    last tenth of the horizon, the computable stand-in for the limsup) must
    not exceed the certified tail bound within tolerance."""
    if len(log) == 0:
        raise EmptyLogError("empty trajectory log")
    bound = gpa_tail_bound(sigma, epsilon, tau)
    t_cut = log.t[-1] - TAIL_FRACTION * (log.t[-1] - log.t[0])
    tail = log.v_total[log.t >= t_cut]
    tail_max = float(np.max(tail))
    passed = bool(tail_max <= bound * (1.0 + tolerance) and not log.truncated)
    rate = np.nan
    details = (f"tail max {tail_max:.6g} vs bound {bound:.6g} "
               f"(tolerance {tolerance:.0%})")
    if log.truncated:
        details += f"; log truncated: {log.diagnostic}"
    return CertificateReport("GpA", tail_max / bound if bound > 0 else np.inf,
                             rate, bound, passed, details)


def check_iss(log: TrajectoryLog, sigma: float,
              gamma_cap: float = GAMMA_CAP) -> CertificateReport:
    """Fitted input-to-state certificate: the offset is the terminal plateau
    and gamma* is fitted on the plateau-subtracted transient."""
    if len(log) == 0:
        raise EmptyLogError("empty trajectory log")
    v0 = log.V1[0] + log.V2[0]
    if v0 <= 0:
        raise EmptyLogError("initial Lyapunov value must be positive")
    t_cut = log.t[-1] - TAIL_FRACTION * (log.t[-1] - log.t[0])
    offset = float(np.mean(log.v_total[log.t >= t_cut]))
    excess = np.maximum(log.v_total - offset, 0.0)
    gamma_star = float(np.max(excess * np.exp(sigma * log.t) / v0))
    passed = bool(np.isfinite(gamma_star) and gamma_star <= gamma_cap
                  and not log.truncated)
    details = f"fitted offset={offset:.6g}, gamma*={gamma_star:.6g} (cap {gamma_cap:.0e})"
    return CertificateReport("ISS", gamma_star, np.nan, offset, passed, details)


def check_ultimate_bound(logs, uniformity_ratio: float = UNIFORMITY_RATIO
                         ) -> CertificateReport:
    """Uniform ultimate bound across runs with different initial amplitudes.

    The common bound r is the largest trailing maximum; per-log reaching
    times are the earliest instants after which V1+V2 stays below r.  Passes
    when every log completed and the terminal plateaus (trailing means)
    agree pairwise within the uniformity ratio.
    """
    logs = list(logs)
    if len(logs) < 2:
        raise InsufficientLogsError("need at least two logs with distinct amplitudes")
    plateaus = []
    tail_maxes = []
    for log in logs:
        if len(log) == 0:
            raise EmptyLogError("empty trajectory log in batch")
        t_cut = log.t[-1] - TAIL_FRACTION * (log.t[-1] - log.t[0])
        tail = log.v_total[log.t >= t_cut]
        plateaus.append(float(np.mean(tail)))
        tail_maxes.append(float(np.max(tail)))
    r = max(tail_maxes)
    reach_times = []
    for log in logs:
        v = log.v_total
        above = np.nonzero(v > r)[0]
        reach_times.append(float(log.t[above[-1] + 1]) if len(above) and
                           above[-1] + 1 < len(v) else float(log.t[0]))
    ratio = max(plateaus) / min(plateaus) if min(plateaus) > 0 else np.inf
    blown = [log.truncated for log in logs]
    passed = bool(ratio <= uniformity_ratio and not any(blown))
    details = (f"plateaus {['%.6g' % p for p in plateaus]} ratio={ratio:.3f} "
               f"(cap {uniformity_ratio}); r={r:.6g}; "
               f"reach times {['%.4g' % t for t in reach_times]}")
    if any(blown):
        details += "; blown-up runs: " + ", ".join(
            log.diagnostic for log in logs if log.truncated)
    return CertificateReport("GUUB", ratio, np.nan, r, passed, details)
