"""Discrete Dirichlet-Neumann operator as a Schur complement on the surface dofs."""
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import DimensionError, SolverError
from cornerwaves.core.logger import log_error, log_event
from cornerwaves.core.parallel import ordered_map
from cornerwaves.fem.assembly import FemSystem
from cornerwaves.fem.solvers import solve_free
from cornerwaves.meshing.trace_grid import TraceGrid
from cornerwaves.traces.fields import FieldLike, TraceField, as_values

# columns per block solve in the dense build
SCHUR_BLOCK = 64


@dataclass
class DtnOperator:
    """S (dense or matrix-free) with the boundary mass M on the same trace grid."""
    system: FemSystem
    mass: sp.csr_matrix
    schur: Optional[np.ndarray] = None
    _mass_factor: object = field(default=None, repr=False)

    @property
    def grid(self) -> TraceGrid:
        return self.system.grid

    @property
    def n(self) -> int:
        return self.system.n_trace

    @property
    def dense(self) -> bool:
        return self.schur is not None

    def apply_schur(self, psi: np.ndarray) -> np.ndarray:
        """S psi for a trace vector or a (n, k) block."""
        if self.schur is not None:
            return self.schur @ psi
        psi = np.asarray(psi, dtype=float)
        if psi.ndim == 2:
            return np.column_stack([self.apply_schur(psi[:, k]) for k in range(psi.shape[1])])
        sysm = self.system
        u_free, _, _ = solve_free(sysm, -(sysm.K_fg @ psi))
        return sysm.K_gg @ psi + sysm.K_fg.T @ u_free

    def solve_mass(self, rhs: np.ndarray) -> np.ndarray:
        if self._mass_factor is None:
            self._mass_factor = spla.splu(self.mass.tocsc())
        return self._mass_factor.solve(np.asarray(rhs, dtype=float))

    def dense_schur(self) -> np.ndarray:
        if self.schur is not None:
            return self.schur
        return self.apply_schur(np.eye(self.n))

    def as_linear_operator(self) -> spla.LinearOperator:
        return spla.LinearOperator((self.n, self.n), matvec=self.apply_schur, dtype=float)


def _dense_schur(system: FemSystem, threads: int | None) -> np.ndarray:
    factor = system.free_factor()
    K_fg = system.K_fg.tocsc()
    n = system.n_trace
    blocks = [(start, min(start + SCHUR_BLOCK, n)) for start in range(0, n, SCHUR_BLOCK)]

    def solve_block(bounds: Tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        return factor.solve(K_fg[:, lo:hi].toarray())

    X = np.hstack(ordered_map(solve_block, blocks, threads))
    S = system.K_gg.toarray() - K_fg.T @ X
    S = 0.5 * (S + S.T)
    # project out round-off along the constants
    P = np.eye(n) - np.full((n, n), 1.0 / n)
    return P @ S @ P


def build(system: FemSystem, mode: str | None = None, threads: int | None = None) -> DtnOperator:
    """Build the discrete Dirichlet-Neumann operator.

    Dense mode eliminates the free dofs with one sparse LU and block
    back-substitutions; it falls back to matrix-free above
    settings.dense_limit trace nodes.
    """
    settings = get_settings()
    mode = mode or settings.schur_mode
    if mode == "dense" and system.n_trace > settings.dense_limit:
        log_event("dno", "dense_limit_exceeded", {"trace_nodes": system.n_trace, "limit": settings.dense_limit})
        mode = "matrix-free"

    schur = None
    if mode == "dense":
        try:
            schur = _dense_schur(system, threads)
        except RuntimeError as exc:
            log_error("dno", exc, {"action": "build"})
            raise SolverError(f"Schur complement build failed: {exc}") from exc
    op = DtnOperator(system=system, mass=system.boundary_mass, schur=schur)
    log_event("dno", "schur_built", {"mode": mode, "trace_nodes": system.n_trace})
    return op


def dtn_form(op: DtnOperator, psi: FieldLike, psi2: FieldLike) -> float:
    """psi^T S psi2."""
    a = as_values(psi, op.grid)
    b = as_values(psi2, op.grid)
    return float(a @ op.apply_schur(b))


def dtn_apply(op: DtnOperator, psi: FieldLike) -> TraceField:
    """L2 representative M^-1 S psi of the weak normal derivative."""
    values = as_values(psi, op.grid)
    return TraceField(op.grid, op.solve_mass(op.apply_schur(values)))


def _orient(vectors: np.ndarray) -> np.ndarray:
    """Fix eigenvector signs: largest-magnitude entry positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def dtn_spectrum(op: DtnOperator, k: int) -> List[Tuple[float, np.ndarray]]:
    """Smallest k eigenpairs of S v = lambda M v, M-orthonormal, ascending."""
    if not 1 <= k <= op.n:
        raise DimensionError(f"requested {k} eigenpairs from {op.n} trace nodes")
    if op.dense:
        vals, vecs = sla.eigh(op.schur, op.mass.toarray(), subset_by_index=[0, k - 1])
    else:
        if k >= op.n - 1:
            vals, vecs = sla.eigh(op.dense_schur(), op.mass.toarray(), subset_by_index=[0, k - 1])
        else:
            minv = spla.LinearOperator((op.n, op.n), matvec=op.solve_mass, dtype=float)
            try:
                vals, vecs = spla.eigsh(op.as_linear_operator(), k=k, M=op.mass, Minv=minv, which="SA",
                                        tol=1e-12, maxiter=50 * op.n)
            except spla.ArpackNoConvergence as exc:
                log_error("dno", exc, {"action": "dtn_spectrum", "k": k})
                raise SolverError(f"eigensolver did not converge: {exc}") from exc
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
    vecs = _orient(vecs)
    return [(float(vals[i]), vecs[:, i]) for i in range(k)]


def analytic_rectangle_eigenvalue(n: int, length: float = math.pi, depth: float = 1.0) -> float:
    """k tanh(k depth) with k = n pi / length (closed tank, Neumann walls)."""
    k = n * math.pi / length
    return k * math.tanh(k * depth)


def spectrum_rows(op: DtnOperator, modes: int, rectangle: Optional[Tuple[float, float]] = None) -> List[dict]:
    """Rows for the spectrum CSV; index 0 is the constant mode.

    rectangle = (length, depth) enables the analytic column.
    """
    rows = []
    for i, (lam, _) in enumerate(dtn_spectrum(op, min(modes + 1, op.n))):
        analytic = None
        rel = None
        if rectangle is not None:
            analytic = analytic_rectangle_eigenvalue(i, *rectangle)
            rel = abs(lam - analytic) / analytic if analytic > 0 else abs(lam)
        rows.append({"index": i, "lambda": lam, "analytic_lambda": analytic, "rel_error": rel})
    return rows
