"""Mesh-free multiquadric collocation machinery for one subdomain.

Nodes are uniform on a closed interval.  Differentiation matrices come from
the Hardy multiquadric basis sqrt(r^2 + c^2) augmented with {1, x}, so that
constants and linears are differentiated exactly; without the augmentation
the d1-on-constant residual at 10 nodes is ~1e-3, far above what the rest of
the package tolerates.  The bordered system is factorized with partial
pivoting in extended precision: the interpolation matrix conditioning at the
default shape parameter is ~1e9-1e12 and a double-precision solve leaves a
round-off floor in d4 comparable to its truncation error.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGridError, SingularInterpolationError

TOL_DERIV_CONST = 1e-6   # |d_k . constant| tolerance, absolute
TOL_POLY = 1e-6          # low-degree reproduction tolerance, relative
CONDITIONING_CAP = 1e12  # above this the interpolation matrix is not trusted


@dataclass(frozen=True)
class SpatialGrid:
    nodes: np.ndarray
    shape_parameter_c: float
    subdomain: tuple

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        return float(self.nodes[1] - self.nodes[0])


@dataclass(frozen=True)
class DerivativeOperators:
    d1: np.ndarray
    d2: np.ndarray
    d4: np.ndarray
    interp_conditioning: float


@dataclass(frozen=True)
class BoundaryStencil:
    side: str                 # "left" or "right"
    order: int                # derivative order, 1 or 3
    weights: np.ndarray       # dimensionless; divide by spacing**order on use
    node_indices: np.ndarray


def build_grid(a: float, b: float, n: int, c: float) -> SpatialGrid:
    """Uniform grid of n nodes on [a, b] with multiquadric shape parameter c."""
    if a >= b:
        raise InvalidGridError(f"invalid interval: a={a} >= b={b}")
    if n < 6:
        raise InvalidGridError(f"too few nodes: n={n} < 6")
    if c <= 0:
        raise InvalidGridError(f"invalid shape parameter: c={c} <= 0")
    nodes = np.linspace(a, b, n)
    return SpatialGrid(nodes=nodes, shape_parameter_c=float(c), subdomain=(float(a), float(b)))


def multiquadric(r: float, c: float) -> float:
    """Hardy multiquadric sqrt(r^2 + c^2)."""
    return float(np.sqrt(r * r + c * c))


def _basis_derivative_blocks(x: np.ndarray, c: float):
    """Multiquadric values and x-derivatives up to fourth order at the nodes.

    With s = sqrt(r^2 + c^2) and r = x - x_j:
        phi   = s
        phi'  = r / s
        phi'' = c^2 / s^3
        phi''''= 3 c^2 (4 r^2 - c^2) / s^7
    """
    r = x[:, None] - x[None, :]
    s = np.sqrt(r * r + c * c)
    b0 = s
    b1 = r / s
    b2 = c * c / s**3
    b4 = 3.0 * c * c * (4.0 * r * r - c * c) / s**7
    return b0, b1, b2, b4


def _solve_extended(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Dense LU with partial pivoting in extended precision; rhs is (n, k)."""
    a = a.astype(np.longdouble).copy()
    rhs = rhs.astype(np.longdouble).copy()
    n = a.shape[0]
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            rhs[[col, piv]] = rhs[[piv, col]]
        factors = a[col + 1:, col] / a[col, col]
        a[col + 1:, col:] -= factors[:, None] * a[col, col:]
        rhs[col + 1:] -= factors[:, None] * rhs[col]
    out = np.zeros_like(rhs)
    for i in range(n - 1, -1, -1):
        out[i] = (rhs[i] - a[i, i + 1:] @ out[i + 1:]) / a[i, i]
    return out


def build_derivative_operators(grid: SpatialGrid) -> DerivativeOperators:
    """Assemble dense differentiation matrices mapping nodal values to nodal
    derivative values of the interpolant.

    The interpolation system is the multiquadric block bordered by the
    monomials {1, x} and their moment conditions.  Each D_k solves
    D_k . [A P; P^T 0] = [B_k P^(k)] and keeps the first n columns, which is
    the standard collocation differentiation-matrix assembly.  Raises when
    the (un-augmented) interpolation matrix conditioning exceeds the cap.
    """
    x = grid.nodes
    n = grid.n
    c = grid.shape_parameter_c
    b0, b1, b2, b4 = _basis_derivative_blocks(x, c)

    conditioning = float(np.linalg.cond(b0))
    if not np.isfinite(conditioning) or conditioning > CONDITIONING_CAP:
        raise SingularInterpolationError(
            f"interpolation matrix conditioning {conditioning:.3e} exceeds "
            f"cap {CONDITIONING_CAP:.0e} (n={n}, c={c})"
        )

    poly = np.column_stack([np.ones(n), x])
    bordered = np.zeros((n + 2, n + 2))
    bordered[:n, :n] = b0
    bordered[:n, n:] = poly
    bordered[n:, :n] = poly.T

    def diff_matrix(bk: np.ndarray, order: int) -> np.ndarray:
        pk = np.zeros((n, 2))
        if order == 1:
            pk[:, 1] = 1.0
        rhs = np.hstack([bk, pk])
        full = _solve_extended(bordered, rhs.T).T
        return np.ascontiguousarray(full[:, :n], dtype=np.float64)

    return DerivativeOperators(
        d1=diff_matrix(b1, 1),
        d2=diff_matrix(b2, 2),
        d4=diff_matrix(b4, 4),
        interp_conditioning=conditioning,
    )


def make_boundary_stencil(side: str, order: int, n: int) -> BoundaryStencil:
    """Minimal one-sided stencil: 2 points for first derivatives (the forward
    and backward Euler estimates), 4 points for third derivatives.

    The minimal stencil of order k is the k-th one-sided difference, whose
    weights are the alternating binomial coefficients (exact integers), in
    ascending node order for either side.
    """
    if order not in (1, 3):
        raise ValueError(f"unsupported stencil order {order}")
    npts = order + 1
    weights = np.array([(-1.0) ** (order - j) * math.comb(order, j)
                        for j in range(npts)])
    if side == "left":
        idx = np.arange(npts)
    elif side == "right":
        idx = np.arange(n - npts, n)
    else:
        raise ValueError(f"unknown side {side!r}")
    return BoundaryStencil(side=side, order=order, weights=weights, node_indices=idx)


def boundary_derivative(state, stencil: BoundaryStencil, spacing: float) -> float:
    """One-sided finite-difference derivative estimate at a boundary node."""
    values = np.asarray(getattr(state, "values", state), dtype=float)
    if stencil.node_indices.max() >= len(values) or stencil.node_indices.min() < 0:
        raise IndexError(
            f"stencil indices {stencil.node_indices} out of range for state of "
            f"length {len(values)}"
        )
    return float(np.dot(stencil.weights, values[stencil.node_indices]) / spacing**stencil.order)
