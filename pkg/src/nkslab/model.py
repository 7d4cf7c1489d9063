"""Semi-discrete noisy Kuramoto-Sivashinsky dynamics on one subdomain.

The evolved quantity is the vector of nodal values.  Four nodes are
algebraically pinned by the boundary conditions (the physical boundary node
and its neighbour on each side); only the remaining interior nodes carry
dynamics.  The Dirichlet value at the controlled end is the boundary input;
the zero-slope conditions are enforced by duplicating the boundary value
into the adjacent node, which zeroes the two-point one-sided derivative
estimate used everywhere else in the package.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonFiniteRhsError
from .rbf import DerivativeOperators, SpatialGrid

LEFT_OF_Y = "left-of-Y"
RIGHT_OF_Y = "right-of-Y"


@dataclass(frozen=True)
class SubdomainState:
    values: np.ndarray
    time: float = 0.0


@dataclass(frozen=True)
class SubdomainModel:
    grid: SpatialGrid
    ops: DerivativeOperators
    lambda_values: np.ndarray
    lambda_sup: float
    lambda_prime_sup: float
    forcing: Callable[[float, float], float]
    forcing_sup: float | None   # None marks an unknown bound
    side: str = LEFT_OF_Y

    def __post_init__(self):
        if len(self.lambda_values) != self.grid.n:
            raise ValueError("lambda profile length must match the grid")
        if self.lambda_sup < float(np.max(np.abs(self.lambda_values))) - 1e-12:
            raise ValueError("lambda_sup below the sampled profile's maximum")


@dataclass(frozen=True)
class BoundaryInput:
    dirichlet_control: float = 0.0


def zero_forcing(x: float, t: float) -> float:
    return 0.0


def make_model(grid, ops, lambda_values, lambda_prime_sup=0.0, forcing=zero_forcing,
               forcing_sup=0.0, side=LEFT_OF_Y) -> SubdomainModel:
    lambda_values = np.asarray(lambda_values, dtype=float)
    return SubdomainModel(
        grid=grid,
        ops=ops,
        lambda_values=lambda_values,
        lambda_sup=float(np.max(np.abs(lambda_values))),
        lambda_prime_sup=float(lambda_prime_sup),
        forcing=forcing,
        forcing_sup=forcing_sup,
        side=side,
    )


def pinned_indices(n: int) -> tuple:
    """The four boundary-constrained nodes: both ends plus their neighbours."""
    return (0, 1, n - 2, n - 1)


def apply_boundary_constraints(state: SubdomainState, model: SubdomainModel,
                               control: BoundaryInput) -> SubdomainState:
    """Pin the boundary nodes for the current control value.

    Left subdomain (w on (0, Y)):   w(0) = u1, w_x(0) = 0, w(Y) = w_x(Y) = 0,
    so nodes 0 and 1 take u1 and the last two nodes take 0.  The right
    subdomain mirrors this with v(1) = u2 and zeros at the Y side.
    Idempotent for a fixed control.
    """
    values = np.array(state.values, dtype=float, copy=True)
    u = float(control.dirichlet_control)
    if model.side == LEFT_OF_Y:
        values[0] = u
        values[1] = u
        values[-1] = 0.0
        values[-2] = 0.0
    else:
        values[-1] = u
        values[-2] = u
        values[0] = 0.0
        values[1] = 0.0
    return SubdomainState(values=values, time=state.time)


def rhs(state: SubdomainState, model: SubdomainModel, t: float) -> np.ndarray:
    """Time derivative f(x,t) - w w_x - lambda(x) w_xx - w_xxxx at interior
    nodes; pinned nodes get zero (they are algebraic)."""
    w = np.asarray(state.values, dtype=float)
    n = len(w)
    d1w = model.ops.d1 @ w
    d2w = model.ops.d2 @ w
    d4w = model.ops.d4 @ w
    x = model.grid.nodes
    out = np.zeros(n)
    for j in range(2, n - 2):
        out[j] = (model.forcing(float(x[j]), t)
                  - w[j] * d1w[j]
                  - model.lambda_values[j] * d2w[j]
                  - d4w[j])
    if not np.all(np.isfinite(out)):
        raise NonFiniteRhsError(f"non-finite right-hand side at t={t}")
    return out
