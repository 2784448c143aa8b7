"""Corner weight rho on the free surface and the operators built on it.

rho equals the distance r to the nearest corner endpoint for r <= rho0/2,
is capped at rho0 for r >= 3 rho0/2, and follows the quadratic
r - (r - rho0/2)^2 / (2 rho0) in between (C1 and 1-Lipschitz). Truncation
walls are not corners.
"""
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse.linalg as spla

from cornerwaves.core.errors import DimensionError, GeometryError
from cornerwaves.core.logger import log_event
from cornerwaves.dno.operator import DtnOperator, dtn_apply
from cornerwaves.fem.assembly import assemble_line_mass, assemble_line_stiffness
from cornerwaves.geometry.domain import DomainSpec, min_straight_radius
from cornerwaves.meshing.trace_grid import TraceComponent, TraceGrid
from cornerwaves.traces.fields import FieldLike, TraceField, as_values

MAX_COMMUTATOR_ORDER = 3


def weight_profile(r: np.ndarray, rho0: float) -> np.ndarray:
    """rho as a function of the distance r to the nearest corner.

    The blend makes rho(rho0) = 7 rho0 / 8; rho reaches rho0 only at
    r = 3 rho0 / 2, not at r = rho0.
    """
    r = np.asarray(r, dtype=float)
    blend = r - (r - 0.5 * rho0) ** 2 / (2.0 * rho0)
    out = np.where(r <= 0.5 * rho0, r, blend)
    return np.where(r >= 1.5 * rho0, rho0, out)


def _corner_positions(comp: TraceComponent) -> List[float]:
    ends = []
    if comp.corner_ends[0]:
        ends.append(float(comp.x[0]))
    if comp.corner_ends[1]:
        ends.append(float(comp.x[-1]))
    return ends


def _distance(x: np.ndarray, corners: List[float]) -> np.ndarray:
    if not corners:
        return np.full_like(x, math.inf, dtype=float)
    return np.min(np.abs(np.asarray(x, dtype=float)[:, None] - np.asarray(corners)[None, :]), axis=1)


def _element_square_means(comp: TraceComponent, corners: List[float], rho0: float) -> np.ndarray:
    """Exact mean of rho^2 over each element (rho^2 is piecewise quartic)."""
    xi, wi = np.polynomial.legendre.leggauss(3)
    xi, wi = 0.5 * (xi + 1.0), 0.5 * wi
    breaks = []
    for c in corners:
        breaks.extend([c - 1.5 * rho0, c - 0.5 * rho0, c, c + 0.5 * rho0, c + 1.5 * rho0])
    if len(corners) == 2:
        breaks.append(0.5 * (corners[0] + corners[1]))
    breaks = np.asarray(sorted(breaks))
    means = np.empty(len(comp.x) - 1)
    for e, (lo, hi) in enumerate(zip(comp.x[:-1], comp.x[1:])):
        cuts = np.concatenate([[lo], breaks[(breaks > lo) & (breaks < hi)], [hi]])
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            pts = a + (b - a) * xi
            rho = weight_profile(_distance(pts, corners), rho0)
            total += (b - a) * float(wi @ rho ** 2)
        means[e] = total / (hi - lo)
    return means


@dataclass(frozen=True, eq=False)
class BoundaryWeight:
    """Nodal rho on a trace grid plus the per-element means of rho^2."""
    grid: TraceGrid
    rho0: float
    values: np.ndarray
    square_means: Tuple[np.ndarray, ...]

    def field(self) -> TraceField:
        return TraceField(self.grid, self.values)

    def parts(self) -> List[np.ndarray]:
        return self.grid.split(self.values)


def build_weight(grid: TraceGrid, rho0: float, spec: Optional[DomainSpec] = None) -> BoundaryWeight:
    """Weight for a trace grid; with a spec, rho0 is checked against the corner radii."""
    if not rho0 > 0:
        raise GeometryError(f"rho0 must be positive, got {rho0}")
    if spec is not None:
        limit = 0.5 * min_straight_radius(spec)
        if rho0 > limit * (1.0 + 1e-12):
            raise GeometryError(f"rho0 too large: {rho0:.6g} > half the smallest corner radius {limit:.6g}")
    values, squares = [], []
    for comp in grid.components:
        corners = _corner_positions(comp)
        values.append(weight_profile(_distance(comp.x, corners), rho0))
        squares.append(_element_square_means(comp, corners, rho0))
    w = BoundaryWeight(grid=grid, rho0=float(rho0), values=np.concatenate(values), square_means=tuple(squares))
    log_event("traces", "weight_built", {"rho0": float(rho0), "components": len(grid.components)})
    return w


def _check_grid(f_grid: TraceGrid, w: BoundaryWeight) -> None:
    if f_grid.n_nodes != w.grid.n_nodes:
        raise DimensionError(f"field has {f_grid.n_nodes} nodes, weight has {w.grid.n_nodes}")


def projected_derivative(x: np.ndarray, values: np.ndarray) -> np.ndarray:
    """L2 projection onto P1 of the elementwise derivative of a P1 function."""
    h = np.diff(x)
    slope = np.diff(values) / h
    rhs = np.zeros(len(x))
    rhs[:-1] += 0.5 * slope * h
    rhs[1:] += 0.5 * slope * h
    return spla.spsolve(assemble_line_mass(x).tocsc(), rhs)


def weighted_derivative(f: FieldLike, w: BoundaryWeight) -> TraceField:
    """Nodal rho times the projected derivative, component by component."""
    values = as_values(f, w.grid)
    out = [rho * projected_derivative(comp.x, part)
           for comp, part, rho in zip(w.grid.components, w.grid.split(values), w.parts())]
    return TraceField(w.grid, np.concatenate(out))


def weighted_derivative_power(f: FieldLike, w: BoundaryWeight, j: int) -> TraceField:
    """(rho d/dx)^j f."""
    field = TraceField(w.grid, as_values(f, w.grid))
    for _ in range(j):
        field = weighted_derivative(field, w)
    return field


def smooth_Keps(f: FieldLike, eps: float, w: BoundaryWeight) -> TraceField:
    """Solve (M + eps D_rho) u = M f per component; D_rho has coefficient rho^2."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    values = as_values(f, w.grid)
    out = []
    for comp, part, sq in zip(w.grid.components, w.grid.split(values), w.square_means):
        M = assemble_line_mass(comp.x)
        D = assemble_line_stiffness(comp.x, sq)
        out.append(spla.spsolve((M + eps * D).tocsc(), M @ part))
    return TraceField(w.grid, np.concatenate(out))


def commutator_apply(op: DtnOperator, w: BoundaryWeight, j: int, psi: FieldLike) -> TraceField:
    """[(rho d/dx)^j, G0] psi = (rho d/dx)^j G0 psi - G0 (rho d/dx)^j psi."""
    if not 1 <= j <= MAX_COMMUTATOR_ORDER:
        raise ValueError(f"commutator order must be in 1..{MAX_COMMUTATOR_ORDER}, got {j}")
    _check_grid(op.grid, w)
    left = weighted_derivative_power(dtn_apply(op, psi), w, j)
    right = dtn_apply(op, weighted_derivative_power(psi, w, j))
    return left - right
