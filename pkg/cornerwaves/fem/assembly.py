"""P1 assembly: stiffness, volume mass, boundary mass, basis integrals."""
import threading
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from cornerwaves.core.logger import log_event
from cornerwaves.meshing.mesh import Mesh
from cornerwaves.meshing.trace_grid import TraceGrid, boundary_trace_grid


def element_stiffness(p0, p1, p2) -> np.ndarray:
    """3x3 P1 stiffness of one triangle."""
    b = np.array([p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]], dtype=float)
    c = np.array([p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]], dtype=float)
    area = 0.5 * (b[1] * c[2] - b[2] * c[1])
    return (np.outer(b, b) + np.outer(c, c)) / (4.0 * area)


def _triangle_geometry(mesh: Mesh):
    v = mesh.vertices[mesh.triangles]
    x, y = v[:, :, 0], v[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area = 0.5 * (b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1])
    return b, c, area


def assemble_stiffness(mesh: Mesh) -> sp.csr_matrix:
    b, c, area = _triangle_geometry(mesh)
    local = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) / (4.0 * area[:, None, None])
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    K = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return ((K + K.T) * 0.5).tocsr()


def assemble_volume_mass(mesh: Mesh) -> sp.csr_matrix:
    _, _, area = _triangle_geometry(mesh)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = area[:, None, None] * ref[None, :, :]
    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_area_vector(mesh: Mesh) -> np.ndarray:
    _, _, area = _triangle_geometry(mesh)
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, mesh.triangles.ravel(), np.repeat(area / 3.0, 3))
    return out


def element_gradients(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Constant gradient of a P1 field on every triangle, shape (n_triangles, 2)."""
    b, c, area = _triangle_geometry(mesh)
    u = np.asarray(values, dtype=float)[mesh.triangles]
    return np.stack([(b * u).sum(axis=1), (c * u).sum(axis=1)], axis=1) / (2.0 * area[:, None])


def triangle_areas(mesh: Mesh) -> np.ndarray:
    return _triangle_geometry(mesh)[2]


def assemble_line_mass(x: np.ndarray) -> sp.csr_matrix:
    """1D P1 mass on nodes x: l/6 * [[2, 1], [1, 2]] per element."""
    h = np.diff(x)
    n = len(x)
    main = np.zeros(n)
    main[:-1] += h / 3.0
    main[1:] += h / 3.0
    off = h / 6.0
    return sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="csr")


def assemble_line_stiffness(x: np.ndarray, coefficient: np.ndarray) -> sp.csr_matrix:
    """1D P1 stiffness; coefficient holds the elementwise mean of the diffusion coefficient."""
    h = np.diff(x)
    k = coefficient / h
    n = len(x)
    main = np.zeros(n)
    main[:-1] += k
    main[1:] += k
    return sp.diags([-k, main, -k], [-1, 0, 1], shape=(n, n), format="csr")


def assemble_boundary_mass(grid: TraceGrid) -> sp.csr_matrix:
    """Block-diagonal 1D mass over all Dirichlet components, in trace order."""
    return sp.block_diag([assemble_line_mass(c.x) for c in grid.components], format="csr")


@dataclass
class FemSystem:
    """Assembled P1 system with the Dirichlet / free split of the vertices.

    gamma lists the mesh vertex of every trace dof (TraceGrid order); free
    holds the remaining vertices (interior and Neumann boundary).
    """
    mesh: Mesh
    grid: TraceGrid
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    boundary_mass: sp.csr_matrix
    area_vector: np.ndarray
    gamma: np.ndarray
    free: np.ndarray
    _factor: object = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n_trace(self) -> int:
        return len(self.gamma)

    @cached_property
    def K_ff(self) -> sp.csr_matrix:
        return self.stiffness[self.free][:, self.free]

    @cached_property
    def K_fg(self) -> sp.csr_matrix:
        return self.stiffness[self.free][:, self.gamma]

    @cached_property
    def K_gg(self) -> sp.csr_matrix:
        return self.stiffness[self.gamma][:, self.gamma]

    def free_factor(self):
        """Sparse LU of the free-free block, computed once."""
        with self._lock:
            if self._factor is None:
                self._factor = spla.splu(self.K_ff.tocsc())
            return self._factor

    def boundary_basis_integrals(self) -> np.ndarray:
        return np.asarray(self.boundary_mass.sum(axis=1)).ravel()

    def extend_trace(self, trace_values: np.ndarray, free_values: np.ndarray) -> np.ndarray:
        full = np.empty(self.mesh.n_vertices)
        full[self.gamma] = trace_values
        full[self.free] = free_values
        return full


def assemble(mesh: Mesh, grid: TraceGrid | None = None) -> FemSystem:
    """Assemble stiffness, masses and the dof split for a mesh."""
    grid = grid if grid is not None else boundary_trace_grid(mesh)
    K = assemble_stiffness(mesh)
    gamma = grid.node_ids.astype(np.int64)
    is_gamma = np.zeros(mesh.n_vertices, dtype=bool)
    is_gamma[gamma] = True
    free = np.flatnonzero(~is_gamma)
    system = FemSystem(
        mesh=mesh,
        grid=grid,
        stiffness=K,
        mass=assemble_volume_mass(mesh),
        boundary_mass=assemble_boundary_mass(grid),
        area_vector=assemble_area_vector(mesh),
        gamma=gamma,
        free=free,
    )
    log_event("elliptic", "system_assembled", {
        "vertices": mesh.n_vertices,
        "trace_nodes": int(len(gamma)),
        "nnz": int(K.nnz),
    })
    return system
