"""Mixed (harmonic extension) and Neumann solves on an assembled system."""
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import DimensionError, NeumannCompatibilityError, SolverError
from cornerwaves.core.logger import log_error
from cornerwaves.fem.assembly import FemSystem
from cornerwaves.traces.fields import FieldLike, as_values


@dataclass(frozen=True)
class PotentialField:
    """Nodal potential over all mesh vertices."""
    values: np.ndarray
    residual: float = 0.0
    iterations: int = 0

    def trace(self, system: FemSystem) -> np.ndarray:
        return self.values[system.gamma]


def jacobi_preconditioner(A: sp.spmatrix) -> spla.LinearOperator:
    inv = 1.0 / A.diagonal()
    return spla.LinearOperator(A.shape, matvec=lambda r: inv * r, dtype=float)


def conjugate_gradient(A, rhs: np.ndarray, tol: float, maxiter: int, M=None, x0=None) -> tuple[np.ndarray, int]:
    iterations = 0

    def count(_):
        nonlocal iterations
        iterations += 1

    x, info = spla.cg(A, rhs, x0=x0, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=count)
    if info != 0:
        residual = float(np.linalg.norm(rhs - A @ x) / max(np.linalg.norm(rhs), 1e-300))
        raise SolverError(
            f"conjugate gradients did not converge after {iterations} iterations (residual {residual:.3e})",
            residual=residual, iterations=iterations,
        )
    return x, iterations


def solve_free(system: FemSystem, rhs: np.ndarray, tol: float | None = None,
               method: str | None = None) -> tuple[np.ndarray, float, int]:
    """Solve K_ff u = rhs; returns (u, relative residual, iterations)."""
    settings = get_settings()
    tol = settings.solver_tol if tol is None else tol
    method = method or settings.linear_solver
    norm = float(np.linalg.norm(rhs))
    if norm == 0.0:
        return np.zeros_like(rhs), 0.0, 0
    A = system.K_ff
    if method == "direct":
        u = system.free_factor().solve(rhs)
        iterations = 0
    else:
        u, iterations = conjugate_gradient(A, rhs, tol, settings.solver_maxiter, M=jacobi_preconditioner(A))
    residual = float(np.linalg.norm(rhs - A @ u) / norm)
    return u, residual, iterations


def solve_mixed(system: FemSystem, psi: FieldLike, tol: float | None = None) -> PotentialField:
    """Discrete harmonic extension: equals psi on the Dirichlet nodes, K u = 0 on the free ones."""
    trace = as_values(psi, system.grid)
    rhs = -(system.K_fg @ trace)
    try:
        u_free, residual, iterations = solve_free(system, rhs, tol)
    except SolverError as exc:
        log_error("elliptic", exc, {"action": "solve_mixed", "residual": exc.residual})
        raise
    return PotentialField(values=system.extend_trace(trace, u_free), residual=residual, iterations=iterations)


def neumann_defect(system: FemSystem, f: np.ndarray, g: np.ndarray) -> float:
    """Discrete |int_Omega f - int_GammaD g|."""
    return abs(float(system.area_vector @ f) - float(system.boundary_basis_integrals() @ g))


def solve_neumann(system: FemSystem, f: np.ndarray | None, g: FieldLike | None,
                  tol: float | None = None) -> PotentialField:
    """Solve Laplace(u) = f, du/dn = g on the surface, du/dn = 0 elsewhere; zero-mean gauge.

    f is given by nodal values over all vertices, g by trace values.
    """
    n = system.mesh.n_vertices
    f = np.zeros(n) if f is None else np.asarray(f, dtype=float).reshape(-1)
    if f.shape[0] != n:
        raise DimensionError(f"volume load has {f.shape[0]} values, mesh has {n} vertices")
    g = np.zeros(system.n_trace) if g is None else as_values(g, system.grid)

    defect = neumann_defect(system, f, g)
    scale = float(np.linalg.norm(f) + np.linalg.norm(g))
    if defect > 1e-10 * max(scale, 1e-300) and defect > 0.0:
        exc = NeumannCompatibilityError(defect)
        log_error("elliptic", exc, {"action": "solve_neumann"})
        raise exc

    settings = get_settings()
    tol = settings.solver_tol if tol is None else tol
    rhs = -(system.mass @ f)
    rhs[system.gamma] += system.boundary_mass @ g
    # remove the round-off component along the constants
    rhs -= rhs.sum() / n
    norm = float(np.linalg.norm(rhs))
    if norm == 0.0:
        return PotentialField(values=np.zeros(n))

    w = system.area_vector
    K = system.stiffness
    if settings.linear_solver == "direct":
        saddle = sp.bmat([[K, sp.csr_matrix(w[:, None])], [sp.csr_matrix(w[None, :]), None]], format="csc")
        u = spla.splu(saddle).solve(np.concatenate([rhs, [0.0]]))[:n]
        iterations = 0
    else:
        w_unit = w / np.linalg.norm(w)
        A = spla.LinearOperator((n, n), matvec=lambda v: K @ v + w_unit * (w_unit @ v), dtype=float)
        diag = K.diagonal() + w_unit * w_unit
        M = spla.LinearOperator((n, n), matvec=lambda r: r / diag, dtype=float)
        try:
            u, iterations = conjugate_gradient(A, rhs, tol, settings.solver_maxiter, M=M)
        except SolverError as exc:
            log_error("elliptic", exc, {"action": "solve_neumann"})
            raise
    u = u - (w @ u) / w.sum()
    residual = float(np.linalg.norm(rhs - K @ u) / norm)
    return PotentialField(values=u, residual=residual, iterations=iterations)


def dirichlet_energy(system: FemSystem, phi: PotentialField | np.ndarray) -> float:
    """phi^T K phi, clipped at zero against round-off."""
    values = phi.values if isinstance(phi, PotentialField) else np.asarray(phi, dtype=float)
    return max(0.0, float(values @ (system.stiffness @ values)))


def l2_error(system: FemSystem, phi: PotentialField | np.ndarray,
             exact: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> float:
    """L2(Omega) distance between phi and the P1 interpolant of exact(x, z)."""
    values = phi.values if isinstance(phi, PotentialField) else np.asarray(phi, dtype=float)
    v = system.mesh.vertices
    diff = values - exact(v[:, 0], v[:, 1])
    return float(np.sqrt(max(0.0, diff @ (system.mass @ diff))))
