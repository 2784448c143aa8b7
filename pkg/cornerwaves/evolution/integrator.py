"""Crank-Nicolson time stepping of the linear surface system.

dzeta/dt - G0 psi = f,  dpsi/dt + g zeta = g_src, i.e. dU/dt + A U = F.
Each step solves (I + dt/2 A) U+ = (I - dt/2 A) U + dt F(t + dt/2), reduced to
one symmetric positive definite trace solve for psi+ and an explicit update
of zeta+. The Bernoulli constant is zero.
"""
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import ConfigError, SolverError
from cornerwaves.core.logger import log_error, log_event
from cornerwaves.dno.operator import DtnOperator, dtn_spectrum
from cornerwaves.evolution.operators import energy, surface_integral, weighted_norm_Nn, x_norm
from cornerwaves.evolution.state import EvolveConfig, Forcing, WaveState
from cornerwaves.fem.solvers import conjugate_gradient
from cornerwaves.traces.seminorms import weighted_mean
from cornerwaves.traces.weight import BoundaryWeight

ZERO_MASS_TOL = 1e-10
# relative slack of the discrete energy estimate
BOUND_SLACK = 1e-6

TRAJECTORY_COLUMNS = ["step", "t", "energy", "mass_zeta", "mass_psi", "x_norm", "N1", "N2"]


class CrankNicolson:
    """Stepper for a fixed (operator, g, dt); factors M + dt^2 g / 4 S once."""

    def __init__(self, op: DtnOperator, g: float, dt: float, tol: Optional[float] = None):
        if not dt > 0:
            raise ConfigError(f"dt must be positive, got {dt}")
        self.op = op
        self.g = float(g)
        self.dt = float(dt)
        self.tol = get_settings().solver_tol if tol is None else tol
        self.shift = self.dt * self.dt * self.g / 4.0
        self._chol = None
        if op.dense:
            try:
                self._chol = sla.cho_factor(op.mass.toarray() + self.shift * op.schur)
            except np.linalg.LinAlgError as exc:
                log_error("evolution", exc, {"action": "factor", "dt": dt})
                raise SolverError(f"trace system is not positive definite: {exc}") from exc

    def _dn(self, psi: np.ndarray) -> np.ndarray:
        return self.op.solve_mass(self.op.apply_schur(psi))

    def _trace_solve(self, rhs: np.ndarray) -> np.ndarray:
        if self._chol is not None:
            return sla.cho_solve(self._chol, rhs)
        n = self.op.n
        mass = self.op.mass
        A = spla.LinearOperator((n, n), matvec=lambda v: mass @ v + self.shift * self.op.apply_schur(v), dtype=float)
        diag = mass.diagonal()
        precond = spla.LinearOperator((n, n), matvec=lambda r: r / diag, dtype=float)
        x, _ = conjugate_gradient(A, rhs, self.tol, get_settings().solver_maxiter, M=precond)
        return x

    def step(self, U: WaveState, F_mid: Optional[WaveState] = None) -> WaveState:
        dt, g = self.dt, self.g
        zeta, psi = U.zeta.values, U.psi.values
        r1 = zeta + 0.5 * dt * self._dn(psi)
        r2 = psi - 0.5 * dt * g * zeta
        if F_mid is not None:
            r1 = r1 + dt * F_mid.zeta.values
            r2 = r2 + dt * F_mid.psi.values
        psi_new = self._trace_solve(self.op.mass @ (r2 - 0.5 * dt * g * r1))
        zeta_new = r1 + 0.5 * dt * self._dn(psi_new)
        return WaveState.from_values(U.grid, zeta_new, psi_new, U.t + dt)


def step_cn(op: DtnOperator, g: float, U: WaveState, dt: float,
            F_mid: Optional[WaveState] = None, stepper: Optional[CrankNicolson] = None) -> WaveState:
    """One Crank-Nicolson step; pass a stepper to reuse its factorization."""
    stepper = stepper if stepper is not None else CrankNicolson(op, g, dt)
    return stepper.step(U, F_mid)


@dataclass
class Trajectory:
    """Per-step monitored quantities plus optional snapshots."""
    rows: List[Dict[str, Optional[float]]] = field(default_factory=list)
    snapshots: List[WaveState] = field(default_factory=list)
    final: Optional[WaveState] = None
    bound_ok: bool = True

    def column(self, name: str) -> np.ndarray:
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows], dtype=float)

    def relative_energy_drift(self) -> float:
        e = self.column("energy")
        return float(np.max(np.abs(e - e[0])) / e[0]) if e[0] > 0 else float(np.max(np.abs(e)))

    def __len__(self) -> int:
        return len(self.rows)


def _zero_mass_defects(op: DtnOperator, U: WaveState) -> tuple[float, float]:
    zeta_mass = abs(surface_integral(op, U.zeta))
    psi_mass = abs(weighted_mean(U.psi) * _total_length(op))
    return zeta_mass, psi_mass


def _total_length(op: DtnOperator) -> float:
    return float(sum(c.length for c in op.grid.components))


def _require_zero_mass(op: DtnOperator, U: WaveState, what: str) -> None:
    scale = 1.0 + float(np.abs(U.zeta.values).max() + np.abs(U.psi.values).max())
    zeta_mass, psi_mass = _zero_mass_defects(op, U)
    if max(zeta_mass, psi_mass) > ZERO_MASS_TOL * scale:
        raise ConfigError(
            f"zero-mass mode requires zero-mean {what}: |int zeta| = {zeta_mass:.3e}, "
            f"|sum |I_j| psi_j| = {psi_mass:.3e}"
        )


def _row(op, g, U, step, weight, orders, bound) -> Dict[str, Optional[float]]:
    zeta_mass = surface_integral(op, U.zeta)
    psi_mean = weighted_mean(U.psi)
    row: Dict[str, Optional[float]] = {
        "step": step,
        "t": U.t,
        "energy": energy(op, g, U),
        "mass_zeta": zeta_mass,
        "mass_psi": psi_mean * _total_length(op),
        "x_norm": x_norm(op, g, U),
        "N1": None,
        "N2": None,
        "psi_mean": psi_mean,
        "bound": bound,
    }
    if weight is not None:
        for n in range(1, orders + 1):
            row[f"N{n}"] = weighted_norm_Nn(op, g, weight, U, n)
    return row


def evolve(op: DtnOperator, g: float, U0: WaveState, forcing: Optional[Forcing], cfg: EvolveConfig,
           weight: Optional[BoundaryWeight] = None) -> Trajectory:
    """Run cfg.steps Crank-Nicolson steps from U0, recording one row per time level.

    The weighted norms N1, N2 are recorded when a weight is given. The
    running bound |U(0)|_X + sum dt |F(t_mid)|_X is carried in the 'bound'
    column and checked every step.
    """
    forcing = forcing if forcing is not None else Forcing.zero()
    if cfg.zero_mass_mode:
        _require_zero_mass(op, U0, "initial data")

    stepper = CrankNicolson(op, g, cfg.dt, cfg.solver_tol)
    bound = x_norm(op, g, U0)
    traj = Trajectory()
    traj.rows.append(_row(op, g, U0, 0, weight, cfg.monitor_orders, bound))
    if cfg.snapshot_every:
        traj.snapshots.append(U0)
    log_event("evolution", "run_started", {"dt": cfg.dt, "steps": cfg.steps, "trace_nodes": op.n})

    U = U0
    for n in range(1, cfg.steps + 1):
        F_mid = None
        if not forcing.is_zero:
            F_mid = forcing.state(U.grid, U.t + 0.5 * cfg.dt)
            if cfg.zero_mass_mode:
                _require_zero_mass(op, F_mid, f"forcing at step {n}")
            bound += cfg.dt * x_norm(op, g, F_mid)
        try:
            U = stepper.step(U, F_mid)
        except SolverError as exc:
            log_error("evolution", exc, {"action": "step", "step": n})
            raise SolverError(f"step {n} failed: {exc}", residual=exc.residual,
                              iterations=exc.iterations, step=n) from exc
        row = _row(op, g, U, n, weight, cfg.monitor_orders, bound)
        if row["x_norm"] > bound * (1.0 + BOUND_SLACK) + 1e-14:
            traj.bound_ok = False
        traj.rows.append(row)
        if cfg.snapshot_every and n % cfg.snapshot_every == 0:
            traj.snapshots.append(U)

    traj.final = U
    log_event("evolution", "run_finished", {
        "steps": cfg.steps,
        "energy_drift": traj.relative_energy_drift(),
        "bound_ok": traj.bound_ok,
    })
    return traj


def standing_mode_frequency(op: DtnOperator, g: float, mode: int = 1) -> float:
    """sqrt(g lambda) for the given discrete DtN eigenvalue."""
    lam, _ = dtn_spectrum(op, mode + 1)[mode]
    return math.sqrt(g * max(lam, 0.0))


def discrete_cn_frequency(omega: float, dt: float) -> float:
    """Frequency actually realised by Crank-Nicolson for a mode of frequency omega."""
    return 2.0 * math.atan(0.5 * omega * dt) / dt
