"""Executable forms of the supporting lemmas and explicit proof constants.

Each bound ships with an independent numerical oracle: quadrature for the
derivative-interpolation inequality, batched Runge-Kutta integration for the
square-root comparison lemma, and a worst-case recurrence simulator for the
switched-sequence envelope.  A bound that fails to dominate its oracle
indicates an implementation bug, not a lemma failure.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpecError, QuadratureError


@dataclass(frozen=True)
class NominalCoefficients:
    theta1: float
    theta2: float
    C1: float
    C2: float
    theta_full: float
    C_full: float

    @classmethod
    def from_problem(cls, lambda_sup: float, lambda_prime_sup: float,
                     f_sup: float, Y: float) -> "NominalCoefficients":
        th1, th2 = nominal_theta(lambda_sup, lambda_prime_sup, Y)
        c1, c2 = nominal_C(f_sup, Y)
        return cls(theta1=th1, theta2=th2, C1=c1, C2=c2,
                   theta_full=nominal_theta_full(lambda_sup, lambda_prime_sup),
                   C_full=math.sqrt(2.0) * f_sup)


@dataclass(frozen=True)
class SequenceEnvelopeSpec:
    M: float
    psi: float
    sigma: float
    N_star: int
    T_lower: float
    T_upper: float
    bad_indices: frozenset = frozenset()

    def __post_init__(self):
        if self.T_lower > self.T_upper:
            raise ValueError("T_lower must not exceed T_upper")
        if len(self.bad_indices) != self.N_star:
            raise ValueError("bad_indices cardinality must equal N_star")


def _check_Y(Y: float):
    if not 0.0 < Y < 1.0:
        raise ValueError(f"junction point Y={Y} must lie strictly inside (0, 1)")


def nominal_theta(lambda_sup: float, lambda_prime_sup: float, Y: float) -> tuple:
    """Nominal Lyapunov growth coefficients of the two subdomains:
    |lam'| + 2 (|lam| + 1/2)((|lam| + 1/2) + 12/len^2) with len = Y and 1-Y."""
    _check_Y(Y)
    if lambda_sup < 0 or lambda_prime_sup < 0:
        raise ValueError("sup norms must be nonnegative")
    half = lambda_sup + 0.5
    theta1 = lambda_prime_sup + 2.0 * half * (half + 12.0 / Y**2)
    theta2 = lambda_prime_sup + 2.0 * half * (half + 12.0 / (1.0 - Y)**2)
    return float(theta1), float(theta2)


def nominal_theta_full(lambda_sup: float, lambda_prime_sup: float) -> float:
    """Full-sensing growth coefficient (unit-length domain, 12/len^2 = 12)."""
    half = lambda_sup + 0.5
    return float(lambda_prime_sup + 2.0 * half * (half + 12.0))


def nominal_C(f_sup: float, Y: float) -> tuple:
    """Forcing coefficients sqrt(2 Y) |f| and sqrt(2 (1-Y)) |f|."""
    _check_Y(Y)
    if f_sup < 0:
        raise ValueError("forcing sup norm must be nonnegative")
    return float(math.sqrt(2.0 * Y) * f_sup), float(math.sqrt(2.0 * (1.0 - Y)) * f_sup)


def halperin_pitt_check(u, du, d2u, a: float, b: float, epsilon: float,
                        n_points: int = 2001) -> tuple:
    """Quadrature check of the derivative-interpolation inequality

        int (u')^2 <= [1/eps + 12/(b-a)^2] int u^2 + eps int (u'')^2.

    u, du, d2u are callables (scalar or vectorized) or pre-sampled arrays on
    the uniform n_points grid over [a, b]; supplying the derivatives keeps
    differentiation error out of the check, so only the composite-trapezoid
    quadrature error enters.  Returns (lhs, rhs, holds).
    """
    if n_points < 10:
        raise QuadratureError(f"need at least 10 quadrature points, got {n_points}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    x = np.linspace(a, b, n_points)

    def sample(fn):
        if isinstance(fn, np.ndarray) or not callable(fn):
            vals = np.asarray(fn, dtype=float)
            if vals.shape != x.shape:
                raise QuadratureError(
                    f"sampled input of length {vals.size} does not match the "
                    f"{n_points}-point grid")
            return vals
        try:
            vals = np.asarray(fn(x), dtype=float)
            if vals.shape == x.shape:
                return vals
        except Exception:
            pass
        return np.asarray([fn(xi) for xi in x], dtype=float)

    u_vals = sample(u)
    du_vals = sample(du)
    d2u_vals = sample(d2u)
    lhs = float(np.trapezoid(du_vals**2, x))
    rhs = float((1.0 / epsilon + 12.0 / (b - a) ** 2) * np.trapezoid(u_vals**2, x)
                + epsilon * np.trapezoid(d2u_vals**2, x))
    return lhs, rhs, bool(lhs <= rhs)


def gronwall_sqrt_bound(V0: float, theta: float, C: float, delta: float,
                        t: float) -> float:
    """Comparison bound for dV/dt <= theta V + C sqrt(V):

        V(t) <= V(0) e^((theta+delta) t)
                + (C^2 / 4 delta) / (theta + delta) (e^((theta+delta) t) - 1).
    """
    if min(V0, theta, C, t) < 0:
        raise ValueError("V0, theta, C, t must be nonnegative")
    if delta <= 0:
        raise ValueError("delta must be positive")
    rate = theta + delta
    growth = math.exp(rate * t)
    return float(V0 * growth + (C * C / (4.0 * delta)) / rate * (growth - 1.0))


def gronwall_reference(V0, theta, C, t: float, n_steps: int = 20000) -> np.ndarray:
    """Batched classical Runge-Kutta integration of dV/dt = theta V + C sqrt(V)
    (the equality worst case); inputs broadcast elementwise."""
    V = np.array(V0, dtype=float, copy=True)
    theta = np.asarray(theta, dtype=float)
    C = np.asarray(C, dtype=float)
    h = t / n_steps

    def f(v):
        return theta * v + C * np.sqrt(np.maximum(v, 0.0))

    for _ in range(n_steps):
        k1 = f(V)
        k2 = f(V + 0.5 * h * k1)
        k3 = f(V + 0.5 * h * k2)
        k4 = f(V + h * k3)
        V = V + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return V


def sequence_envelope_bound(spec: SequenceEnvelopeSpec, V0: float, i: int) -> float:
    """Envelope e^((sigma+psi) N* T_hi) (V0 e^(-sigma T_i) + eta_inf) with
    eta_inf = (1/(1-e^(-sigma T_lo))) (M + M^2/4) e^(psi T_hi).

    Only the index is known here, so the decay term uses the slowest
    admissible clock T_i = i T_lo, which dominates every sequence obeying
    the dwell bounds.
    """
    if spec.sigma * spec.T_lower <= 0:
        raise DegenerateSpecError("sigma * T_lower must be positive")
    if V0 < 0 or i < 0:
        raise ValueError("V0 and i must be nonnegative")
    eta_inf = (1.0 / (1.0 - math.exp(-spec.sigma * spec.T_lower))
               * (spec.M + spec.M**2 / 4.0) * math.exp(spec.psi * spec.T_upper))
    lead = math.exp((spec.sigma + spec.psi) * spec.N_star * spec.T_upper)
    return float(lead * (V0 * math.exp(-spec.sigma * i * spec.T_lower) + eta_inf))


def simulate_envelope_recurrence(spec: SequenceEnvelopeSpec, V0: float,
                                 gaps) -> np.ndarray:
    """Worst-case recurrence values V(T_0), V(T_1), ... taking every step at
    equality: bad steps multiply (V + M^2/4) by e^(psi gap), good steps decay
    at rate sigma plus the (M + M^2/4) e^(psi gap) offset."""
    gaps = np.asarray(gaps, dtype=float)
    out = np.empty(len(gaps) + 1)
    out[0] = V0
    v = V0
    for j, gap in enumerate(gaps):
        if j in spec.bad_indices:
            v = (v + spec.M**2 / 4.0) * math.exp(spec.psi * gap)
        else:
            v = v * math.exp(-spec.sigma * gap) + (spec.M + spec.M**2 / 4.0) * math.exp(spec.psi * gap)
        out[j + 1] = v
    return out


def m_bounds(variant: str, theta1: float, theta2: float, C1: float, C2: float,
             sigma: float, dwell: tuple, delta1: float, delta2: float) -> tuple:
    """Explicit gain-excursion bounds (M1, M2).

    decay variant ("GES"):
        M = theta + (sigma (T1_hi + T2_hi) + theta T_hi) / T_lo + 2 delta T_hi
    forcing variants ("ISS", "GUUB"):
        M = theta + C + ((theta + 1) T'_hi + sigma (T1_hi + T2_hi)) / T_lo
            + 1 + 2 delta T_hi
    where T'_hi is the opposite regime's upper dwell bound.
    """
    t1_lo, t1_hi, t2_lo, t2_hi = dwell
    if min(t1_lo, t1_hi, t2_lo, t2_hi) <= 0:
        raise ValueError("dwell bounds must be positive")
    both = sigma * (t1_hi + t2_hi)
    if variant == "GES":
        m1 = theta1 + (both + theta1 * t1_hi) / t1_lo + 2.0 * delta1 * t1_hi
        m2 = theta2 + (both + theta2 * t2_hi) / t2_lo + 2.0 * delta2 * t2_hi
    elif variant in ("ISS", "GUUB"):
        m1 = (theta1 + C1 + ((theta1 + 1.0) * t2_hi + both) / t1_lo
              + 1.0 + 2.0 * delta1 * t1_hi)
        m2 = (theta2 + C2 + ((theta2 + 1.0) * t1_hi + both) / t2_lo
              + 1.0 + 2.0 * delta2 * t2_hi)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return float(m1), float(m2)
