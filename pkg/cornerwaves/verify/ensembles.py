"""Seeded random fields for the diagnostic ensembles.

Two families:

* white noise smoothed by m damped Jacobi sweeps (m in {0, 2, 8}), rough to
  smooth, on trace grids or over mesh vertices;
* smooth random trigonometric series, per trace component with random
  component constants, or over the bounding box of the fluid domain. These
  depend only on the seed and the geometry, not on the mesh, so the same
  sample can be compared across refinements.

Every sample draws from its own stream spawned from the master seed.
"""
import math
from typing import List, Optional, Sequence

import numpy as np

from cornerwaves.core.parallel import ordered_map
from cornerwaves.fem.assembly import FemSystem
from cornerwaves.meshing.trace_grid import TraceGrid
from cornerwaves.traces.fields import TraceField

JACOBI_SWEEPS = (0, 2, 8)
JACOBI_DAMPING = 2.0 / 3.0


def sample_streams(seed: int, n: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def jacobi_smooth_chain(values: np.ndarray, sweeps: int) -> np.ndarray:
    """Damped Jacobi sweeps of the chain graph Laplacian (one component)."""
    v = np.asarray(values, dtype=float).copy()
    if len(v) < 2:
        return v
    for _ in range(sweeps):
        avg = np.empty_like(v)
        avg[1:-1] = 0.5 * (v[:-2] + v[2:])
        avg[0] = v[1]
        avg[-1] = v[-2]
        v = v + JACOBI_DAMPING * (avg - v)
    return v


def jacobi_trace_field(grid: TraceGrid, rng: np.random.Generator, sweeps: int) -> TraceField:
    noise = rng.standard_normal(grid.n_nodes)
    parts = [jacobi_smooth_chain(p, sweeps) for p in grid.split(noise)]
    return TraceField(grid, np.concatenate(parts))


def jacobi_trace_ensemble(grid: TraceGrid, seed: int, n: int,
                          sweeps: Sequence[int] = JACOBI_SWEEPS) -> List[TraceField]:
    """n samples cycling through the sweep counts."""
    streams = sample_streams(seed, n)
    return [jacobi_trace_field(grid, rng, sweeps[k % len(sweeps)]) for k, rng in enumerate(streams)]


def jacobi_volume_field(system: FemSystem, rng: np.random.Generator, sweeps: int) -> np.ndarray:
    """Vertex white noise smoothed with the stiffness matrix."""
    K = system.stiffness
    inv_diag = 1.0 / K.diagonal()
    v = rng.standard_normal(system.mesh.n_vertices)
    for _ in range(sweeps):
        v = v - JACOBI_DAMPING * inv_diag * (K @ v)
    return v


def jacobi_volume_ensemble(system: FemSystem, seed: int, n: int, sweeps: int = 1) -> List[np.ndarray]:
    return [jacobi_volume_field(system, rng, sweeps) for rng in sample_streams(seed, n)]


class TrigSample:
    """Random component constants plus a decaying cosine/sine series per component."""

    def __init__(self, rng: np.random.Generator, n_components: int, modes: int = 6, decay: float = 1.5):
        self.constants = rng.standard_normal(n_components)
        self.cos = rng.standard_normal((n_components, modes))
        self.sin = rng.standard_normal((n_components, modes))
        self.scale = 1.0 / np.arange(1, modes + 1) ** decay

    def evaluate(self, grid: TraceGrid, zero_constants: bool = False) -> TraceField:
        parts = []
        for k, comp in enumerate(grid.components):
            a, b = comp.interval
            s = (comp.x - a) / (b - a)
            arg = math.pi * np.outer(s, np.arange(1, len(self.scale) + 1))
            series = np.cos(arg) @ (self.cos[k] * self.scale) + np.sin(arg) @ (self.sin[k] * self.scale)
            parts.append(series + (0.0 if zero_constants else self.constants[k]))
        return TraceField(grid, np.concatenate(parts))


def trig_samples(seed: int, n: int, n_components: int, modes: int = 6, decay: float = 1.5) -> List[TrigSample]:
    return [TrigSample(rng, n_components, modes, decay) for rng in sample_streams(seed, n)]


def trig_trace_ensemble(grid: TraceGrid, seed: int, n: int, modes: int = 6, decay: float = 1.5,
                        threads: Optional[int] = None) -> List[TraceField]:
    samples = trig_samples(seed, n, len(grid.components), modes, decay)
    return ordered_map(lambda s: s.evaluate(grid), samples, threads)


class VolumeTrigSample:
    """Random cosine series in x and z over the domain's bounding box."""

    def __init__(self, rng: np.random.Generator, modes: int = 4, decay: float = 2.0):
        k = np.arange(modes + 1)
        self.coeffs = rng.standard_normal((modes + 1, modes + 1)) / (1.0 + k[:, None] + k[None, :]) ** decay

    def evaluate(self, vertices: np.ndarray) -> np.ndarray:
        # corners are mesh vertices, so the box does not move under refinement
        lo, hi = vertices.min(axis=0), vertices.max(axis=0)
        s = (vertices - lo) / (hi - lo)
        k = np.arange(self.coeffs.shape[0])
        cx = np.cos(math.pi * np.outer(s[:, 0], k))
        cz = np.cos(math.pi * np.outer(s[:, 1], k))
        return np.einsum("im,mn,in->i", cx, self.coeffs, cz)


def trig_volume_ensemble(system: FemSystem, seed: int, n: int, modes: int = 4,
                         decay: float = 2.0) -> List[np.ndarray]:
    vertices = system.mesh.vertices
    return [VolumeTrigSample(rng, modes, decay).evaluate(vertices) for rng in sample_streams(seed, n)]
