"""Fitted singular exponent at a mixed corner."""
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from cornerwaves.core.errors import GeometryError, MeshGenerationError
from cornerwaves.core.logger import log_event
from cornerwaves.fem.assembly import FemSystem, assemble, element_gradients, triangle_areas
from cornerwaves.fem.solvers import solve_mixed
from cornerwaves.geometry.domain import CornerPoint, DomainSpec
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.meshing.mesh import Mesh

# the fitting ring must span at least this ratio of radii
MIN_RING_RATIO = 10.0
BINS = 12


@dataclass
class ExponentFit:
    nu: float
    target: float
    r_inner: float
    r_outer: float
    radii: List[float] = field(default_factory=list)
    gradients: List[float] = field(default_factory=list)

    @property
    def relative_error(self) -> float:
        return abs(self.nu - self.target) / self.target


def analytic_exponent(omega: float) -> float:
    """nu = pi / (2 omega) for Dirichlet on one side, Neumann on the other."""
    return math.pi / (2.0 * omega)


def corner_exponent_fit(spec: DomainSpec, mesh: Mesh, psi: Callable[[np.ndarray], np.ndarray],
                        params: GradingParams, system: Optional[FemSystem] = None,
                        corner: Optional[CornerPoint] = None) -> ExponentFit:
    """Least-squares slope of log |grad phi| against log r over [2 h_min, rho0/2], plus one.

    phi is the harmonic extension of psi. Triangles are binned
    logarithmically by centroid distance to the corner; each bin contributes
    its area-weighted RMS gradient. The corner defaults to the leftmost
    mixed corner (the apex of the built-in sector).
    """
    if corner is None:
        corners = sorted(spec.mixed_corners(), key=lambda c: (c.x, c.z))
        if not corners:
            raise GeometryError("exponent fit needs a mixed corner")
        corner = corners[0]
    params = params.resolve(spec)
    r_inner = 2.0 * params.h_min
    r_outer = 0.5 * params.rho0
    if r_outer < MIN_RING_RATIO * r_inner:
        raise MeshGenerationError(
            f"fitting ring too thin: [{r_inner:.3g}, {r_outer:.3g}] spans less than a factor {MIN_RING_RATIO:g}; "
            f"refine h0 or raise the grading exponent"
        )

    system = system if system is not None else assemble(mesh)
    phi = solve_mixed(system, system.grid.sample(psi))
    grads = element_gradients(mesh, phi.values)
    areas = triangle_areas(mesh)
    r = np.hypot(*(mesh.centroids() - np.array([corner.x, corner.z])).T)

    edges = np.geomspace(r_inner, r_outer, BINS + 1)
    radii, values = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (r >= lo) & (r < hi)
        if not np.any(sel):
            continue
        w = areas[sel]
        rms = math.sqrt(float(np.sum(w * (grads[sel] ** 2).sum(axis=1)) / w.sum()))
        if rms > 0:
            radii.append(math.sqrt(lo * hi))
            values.append(rms)
    if len(radii) < 3:
        raise MeshGenerationError(f"only {len(radii)} populated bins in the fitting ring")

    slope, _ = np.polyfit(np.log(radii), np.log(values), 1)
    fit = ExponentFit(nu=float(slope + 1.0), target=analytic_exponent(corner.angle),
                      r_inner=r_inner, r_outer=r_outer, radii=radii, gradients=values)
    log_event("verify", "corner_fit", {"angle": corner.angle, "nu": fit.nu, "target": fit.target})
    return fit
