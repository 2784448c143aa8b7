"""Rellich identity check for discrete potentials.

For u with Laplace(u) = f and a smooth vector field alpha:

  int_Gamma |grad u|^2 alpha.n - 2 int_Gamma (n.grad u)(alpha.grad u)
    = int_Omega div(alpha) |grad u|^2 - 2 d_i alpha_j d_i u d_j u - 2 (alpha.grad u) f

alpha is affine, so the volume terms are exact per triangle and the boundary
terms exact per edge with the one-sided gradient of the adjacent triangle.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from cornerwaves.core.errors import ConfigError
from cornerwaves.fem.assembly import FemSystem, element_gradients, triangle_areas
from cornerwaves.fem.solvers import PotentialField


class AffineField(BaseModel):
    """alpha(x, z) = offset + matrix @ (x, z)."""
    offset: Tuple[float, float] = Field(default=(0.0, 0.0))
    matrix: Tuple[Tuple[float, float], Tuple[float, float]] = Field(default=((0.0, 0.0), (0.0, 0.0)))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.offset)[None, :] + points @ np.asarray(self.matrix).T

    @property
    def jacobian(self) -> np.ndarray:
        """J[i, j] = d alpha_i / d x_j."""
        return np.asarray(self.matrix, dtype=float)

    @property
    def divergence(self) -> float:
        return float(np.trace(self.jacobian))


NAMED_FIELDS: Dict[str, AffineField] = {
    "e_x": AffineField(offset=(1.0, 0.0)),
    "e_z": AffineField(offset=(0.0, 1.0)),
    "-e_z": AffineField(offset=(0.0, -1.0)),
    "position": AffineField(matrix=((1.0, 0.0), (0.0, 1.0))),
}


def affine_field(alpha: Union[str, dict, AffineField]) -> AffineField:
    """Named field id, an {'offset', 'matrix'} mapping, or an AffineField."""
    if isinstance(alpha, AffineField):
        return alpha
    if isinstance(alpha, str):
        try:
            return NAMED_FIELDS[alpha]
        except KeyError:
            raise ConfigError(f"unknown vector field '{alpha}' (known: {', '.join(sorted(NAMED_FIELDS))})")
    return AffineField.model_validate(alpha)


def _boundary_edge_triangles(system: FemSystem) -> Tuple[np.ndarray, np.ndarray]:
    """Adjacent triangle and outward unit normal per boundary edge."""
    mesh = system.mesh
    owner: Dict[Tuple[int, int], Tuple[int, int, int]] = {}
    for t, tri in enumerate(mesh.triangles):
        for k in range(3):
            p, q = int(tri[k]), int(tri[(k + 1) % 3])
            owner[(min(p, q), max(p, q))] = (t, p, q)
    tris = np.empty(len(mesh.boundary_edges), dtype=np.int64)
    normals = np.empty((len(mesh.boundary_edges), 2))
    for e, (i, j) in enumerate(mesh.boundary_edges):
        t, p, q = owner[(min(int(i), int(j)), max(int(i), int(j)))]
        d = mesh.vertices[q] - mesh.vertices[p]
        tris[e] = t
        # counter-clockwise triangles: the outward normal is d rotated clockwise
        normals[e] = np.array([d[1], -d[0]]) / np.hypot(d[0], d[1])
    return tris, normals


@dataclass(frozen=True)
class RellichTerms:
    boundary: float
    volume: float
    energy: float

    @property
    def residual(self) -> float:
        return abs(self.boundary - self.volume) / self.energy if self.energy > 0 else abs(self.boundary - self.volume)


def rellich_terms(system: FemSystem, phi: Union[PotentialField, np.ndarray], alpha,
                  f: Optional[np.ndarray] = None) -> RellichTerms:
    mesh = system.mesh
    u = phi.values if isinstance(phi, PotentialField) else np.asarray(phi, dtype=float)
    field = affine_field(alpha)
    grads = element_gradients(mesh, u)
    areas = triangle_areas(mesh)
    J = field.jacobian

    sq = (grads ** 2).sum(axis=1)
    # sum_ij d_i alpha_j d_i u d_j u = g^T J^T g
    mixed = np.einsum("ti,ji,tj->t", grads, J, grads)
    volume = float(np.sum(areas * (field.divergence * sq - 2.0 * mixed)))
    if f is not None:
        f = np.asarray(f, dtype=float)
        tri = mesh.triangles
        v = mesh.vertices[tri]
        # edge-midpoint rule: exact for the quadratic (alpha . grad u) f
        total = np.zeros(len(tri))
        for k in range(3):
            mid = 0.5 * (v[:, k] + v[:, (k + 1) % 3])
            f_mid = 0.5 * (f[tri[:, k]] + f[tri[:, (k + 1) % 3]])
            total += (field(mid) * grads).sum(axis=1) * f_mid
        volume -= 2.0 * float(np.sum(areas * total / 3.0))

    tris, normals = _boundary_edge_triangles(system)
    p = mesh.vertices[mesh.boundary_edges[:, 0]]
    q = mesh.vertices[mesh.boundary_edges[:, 1]]
    lengths = np.linalg.norm(q - p, axis=1)
    a_mid = field(0.5 * (p + q))
    g = grads[tris]
    boundary = float(np.sum(lengths * (
        (g ** 2).sum(axis=1) * (a_mid * normals).sum(axis=1)
        - 2.0 * (normals * g).sum(axis=1) * (a_mid * g).sum(axis=1)
    )))
    energy = float(np.sum(areas * sq))
    return RellichTerms(boundary=boundary, volume=volume, energy=energy)


def rellich_residual(system: FemSystem, phi: Union[PotentialField, np.ndarray], alpha,
                     f: Optional[np.ndarray] = None) -> float:
    """|boundary side - volume side| / int |grad u|^2."""
    return rellich_terms(system, phi, alpha, f).residual
