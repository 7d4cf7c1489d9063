"""Discontinuous boundary feedback and the input assignment per regime.

The feedback is sign-based when the boundary third derivative is large
relative to the threshold l(V, th) = (1/3)(1 + 3 th) V^(2/3), and a gain-
scheduled push otherwise; both branches scale with the cube root of the
Lyapunov value, which keeps the input bounded and vanishing with the state.
The resulting boundary dissipation P(u, omega) = u^3/3 + u omega satisfies
P <= -th V on either branch.
"""

from dataclasses import dataclass

from .schedule import SENSE1, SENSE2

FULL_SENSING = "FullSensing"


@dataclass(frozen=True)
class ControlDecision:
    u1: float
    u2: float
    regime: str


def _sign(x: float) -> float:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def threshold_l(V: float, theta_hat: float) -> float:
    """Branch threshold (1/3)(1 + 3 theta_hat) V^(2/3)."""
    if V < 0:
        raise ValueError(f"negative Lyapunov value {V}")
    if theta_hat < 0:
        raise ValueError(f"negative gain estimate {theta_hat}")
    root = V ** (1.0 / 3.0)
    return (1.0 / 3.0) * (1.0 + 3.0 * theta_hat) * root * root


def kappa(V: float, omega: float, theta_hat: float) -> float:
    """-sign(omega) V^(1/3) when |omega| >= l(V, theta_hat), else
    -3 (3 theta_hat + 1) V^(1/3).  Ties take the sign branch."""
    if V < 0:
        raise ValueError(f"negative Lyapunov value {V}")
    if theta_hat < 0:
        raise ValueError(f"negative gain estimate {theta_hat}")
    root = V ** (1.0 / 3.0)
    level = (1.0 / 3.0) * (1.0 + 3.0 * theta_hat) * root * root
    if abs(omega) >= level:
        return -_sign(omega) * root
    return -3.0 * (3.0 * theta_hat + 1.0) * root


def dissipation_P(u: float, omega: float) -> float:
    """Boundary dissipation functional u^3/3 + u*omega."""
    return u * u * u / 3.0 + u * omega


def assign_inputs(regime: str, V1: float, V2: float, w_xxx_0: float,
                  v_xxx_1: float, theta1_hat: float, theta2_hat: float) -> ControlDecision:
    """Route the feedback to the controlled end for the active regime.

    Tiny negative Lyapunov values (quadrature round-off) are clamped to zero
    before the feedback is evaluated.
    """
    V1 = max(V1, 0.0)
    V2 = max(V2, 0.0)
    if regime == SENSE1:
        return ControlDecision(u1=kappa(V1, w_xxx_0, theta1_hat), u2=0.0, regime=regime)
    if regime == SENSE2:
        return ControlDecision(u1=0.0, u2=-kappa(V2, v_xxx_1, theta2_hat), regime=regime)
    if regime == FULL_SENSING:
        return ControlDecision(u1=kappa(V1, w_xxx_0, theta1_hat), u2=0.0, regime=regime)
    raise ValueError(f"unknown regime {regime!r}")
