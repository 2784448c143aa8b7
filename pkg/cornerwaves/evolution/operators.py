"""Energy inner product, the evolution operator A and the norms built from them."""
import math
from typing import List, Optional

import numpy as np

from cornerwaves.core.errors import DimensionError
from cornerwaves.dno.operator import DtnOperator
from cornerwaves.evolution.state import Forcing, WaveState
from cornerwaves.traces.fields import TraceField
from cornerwaves.traces.weight import BoundaryWeight, weighted_derivative

# highest order with an acceptance claim
STABLE_ORDER = 2
# time step of the central differences used for forcing derivatives
FORCING_FD_STEP = 1e-4


def _check(op: DtnOperator, *states: WaveState) -> None:
    for U in states:
        if U.grid.n_nodes != op.n:
            raise DimensionError(f"state has {U.grid.n_nodes} trace nodes, operator has {op.n}")


def x_inner(op: DtnOperator, g: float, U: WaveState, V: WaveState) -> float:
    """g zeta_U^T M zeta_V + psi_U^T S psi_V."""
    _check(op, U, V)
    potential = float(U.psi.values @ op.apply_schur(V.psi.values))
    elevation = float(U.zeta.values @ (op.mass @ V.zeta.values))
    return g * elevation + potential


def x_norm(op: DtnOperator, g: float, U: WaveState) -> float:
    return math.sqrt(max(0.0, x_inner(op, g, U, U)))


def energy(op: DtnOperator, g: float, U: WaveState) -> float:
    """Mechanical energy with unit fluid density: half the squared X-norm."""
    return 0.5 * max(0.0, x_inner(op, g, U, U))


def apply_A(op: DtnOperator, g: float, U: WaveState) -> WaveState:
    """A U = (-M^-1 S psi, g zeta)."""
    _check(op, U)
    dn = op.solve_mass(op.apply_schur(U.psi.values))
    return WaveState(TraceField(op.grid, -dn), U.zeta * g, U.t)


def _forcing_derivative(forcing: Forcing, grid, t: float, order: int) -> WaveState:
    """d^order F / dt^order at t by nested central differences."""
    if order == 0:
        return forcing.state(grid, t)
    d = FORCING_FD_STEP * (1.0 + abs(t))
    plus = _forcing_derivative(forcing, grid, t + d, order - 1)
    minus = _forcing_derivative(forcing, grid, max(t - d, 0.0), order - 1)
    return (plus - minus) * (1.0 / (t + d - max(t - d, 0.0)))


def time_derivatives(op: DtnOperator, g: float, U: WaveState, n: int,
                     forcing: Optional[Forcing] = None) -> List[WaveState]:
    """[U, dU/dt, ..., d^n U/dt^n] along dU/dt = -A U + F."""
    out = [U]
    for level in range(n):
        nxt = -apply_A(op, g, out[-1])
        if forcing is not None and not forcing.is_zero:
            nxt = nxt + _forcing_derivative(forcing, U.grid, U.t, level)
        out.append(nxt)
    return out


def _check_order(n: int, experimental: bool) -> None:
    if n < 0:
        raise ValueError(f"norm order must be non-negative, got {n}")
    if n > STABLE_ORDER and not experimental:
        raise ValueError(f"orders above {STABLE_ORDER} are experimental; pass experimental=True")


def triple_norm(op: DtnOperator, g: float, U: WaveState, n: int,
                forcing: Optional[Forcing] = None, experimental: bool = False) -> float:
    """Sum of the X-norms of the first n time derivatives."""
    _check_order(n, experimental)
    return float(sum(x_norm(op, g, D) for D in time_derivatives(op, g, U, n, forcing)))


def weighted_norm_Nn(op: DtnOperator, g: float, w: BoundaryWeight, U: WaveState, n: int,
                     forcing: Optional[Forcing] = None, experimental: bool = False) -> float:
    """Sum over j + l <= n of |(rho d/dx)^j d^l U/dt^l|_X.

    Without forcing d^l U/dt^l = (-A)^l U.
    """
    _check_order(n, experimental)
    total = 0.0
    for level, D in enumerate(time_derivatives(op, g, U, n, forcing)):
        V = D
        for j in range(n - level + 1):
            if j:
                V = V.map(lambda field: weighted_derivative(field, w))
            total += x_norm(op, g, V)
    return float(total)


def surface_integral(op: DtnOperator, field: TraceField) -> float:
    """Integral over the free surface of a trace field."""
    return float(np.sum(op.mass @ field.values))
