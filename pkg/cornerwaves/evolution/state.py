"""State, forcing and run configuration for the surface evolution."""
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from cornerwaves.core.errors import DimensionError
from cornerwaves.meshing.trace_grid import TraceGrid
from cornerwaves.traces.fields import TraceField

TraceSource = Callable[[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class WaveState:
    """U = (zeta, psi) at time t, both on the same trace grid."""
    zeta: TraceField
    psi: TraceField
    t: float = 0.0

    def __post_init__(self):
        if self.zeta.grid.n_nodes != self.psi.grid.n_nodes:
            raise DimensionError(
                f"zeta has {self.zeta.grid.n_nodes} nodes, psi has {self.psi.grid.n_nodes}"
            )

    @property
    def grid(self) -> TraceGrid:
        return self.psi.grid

    @classmethod
    def zeros(cls, grid: TraceGrid, t: float = 0.0) -> "WaveState":
        return cls(TraceField.zeros(grid), TraceField.zeros(grid), t)

    @classmethod
    def from_values(cls, grid: TraceGrid, zeta, psi, t: float = 0.0) -> "WaveState":
        return cls(TraceField(grid, zeta), TraceField(grid, psi), t)

    def __add__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.zeta + other.zeta, self.psi + other.psi, self.t)

    def __sub__(self, other: "WaveState") -> "WaveState":
        return WaveState(self.zeta - other.zeta, self.psi - other.psi, self.t)

    def __mul__(self, scalar: float) -> "WaveState":
        return WaveState(self.zeta * scalar, self.psi * scalar, self.t)

    __rmul__ = __mul__

    def __neg__(self) -> "WaveState":
        return WaveState(-self.zeta, -self.psi, self.t)

    def map(self, fn: Callable[[TraceField], TraceField]) -> "WaveState":
        """Apply the same trace operator to both components."""
        return WaveState(fn(self.zeta), fn(self.psi), self.t)


class Forcing:
    """Source terms F = (f, g_src) as functions of time returning trace values.

    Either source may be None (zero). from_samples builds piecewise-linear
    interpolants in time from sampled traces.
    """

    def __init__(self, f: Optional[TraceSource] = None, g_src: Optional[TraceSource] = None,
                 t_end: Optional[float] = None):
        self.f = f
        self.g_src = g_src
        self.t_end = t_end

    @property
    def is_zero(self) -> bool:
        return self.f is None and self.g_src is None

    @classmethod
    def zero(cls) -> "Forcing":
        return cls()

    @classmethod
    def from_samples(cls, times: Sequence[float], f_samples=None, g_samples=None) -> "Forcing":
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise DimensionError("forcing sample times must be increasing with at least two entries")

        def interpolant(samples):
            if samples is None:
                return None
            data = np.asarray(samples, dtype=float)
            if data.shape[0] != len(times):
                raise DimensionError(f"{data.shape[0]} forcing samples for {len(times)} times")

            def at(t: float) -> np.ndarray:
                k = int(np.clip(np.searchsorted(times, t) - 1, 0, len(times) - 2))
                theta = (t - times[k]) / (times[k + 1] - times[k])
                return (1.0 - theta) * data[k] + theta * data[k + 1]
            return at

        return cls(interpolant(f_samples), interpolant(g_samples), t_end=float(times[-1]))

    def state(self, grid: TraceGrid, t: float) -> WaveState:
        """F(t) as a WaveState-shaped pair."""
        if self.t_end is not None and t > self.t_end * (1.0 + 1e-12) + 1e-12:
            raise DimensionError(f"forcing defined up to t = {self.t_end}, requested {t}")
        zeta = np.zeros(grid.n_nodes) if self.f is None else np.asarray(self.f(t), dtype=float)
        psi = np.zeros(grid.n_nodes) if self.g_src is None else np.asarray(self.g_src(t), dtype=float)
        return WaveState.from_values(grid, zeta, psi, t)


class EvolveConfig(BaseModel):
    """Time stepping parameters."""
    dt: float = Field(gt=0.0, description="Time step")
    steps: int = Field(ge=1, description="Number of steps; T = dt * steps")
    zero_mass_mode: bool = Field(default=False, description="Require and monitor zero-mean data")
    bernoulli_zero: Literal[True] = Field(default=True, description="Bernoulli constant fixed to zero")
    solver_tol: Optional[float] = Field(default=None, gt=0.0, description="Trace solve tolerance (matrix-free)")
    snapshot_every: int = Field(default=0, ge=0, description="Keep a state snapshot every k steps (0: off)")
    monitor_orders: int = Field(default=2, ge=0, le=2, description="Highest weighted norm order recorded per step")

    @property
    def t_final(self) -> float:
        return self.dt * self.steps
