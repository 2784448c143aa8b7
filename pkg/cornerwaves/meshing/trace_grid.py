"""Ordered 1D grid of free-surface nodes, one block per Dirichlet component."""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from cornerwaves.core.errors import MeshGenerationError
from cornerwaves.meshing.mesh import MARK_DIRICHLET, MARK_WETTED, Mesh


@dataclass(frozen=True)
class TraceComponent:
    """Nodes of one Dirichlet interval, sorted by abscissa."""
    index: int
    node_ids: np.ndarray
    x: np.ndarray
    interval: Tuple[float, float]
    window: Tuple[float, float]
    originally_unbounded: bool = False
    # per endpoint: True if it is a corner (weight vanishes), False for a truncation wall
    corner_ends: Tuple[bool, bool] = (True, True)

    @property
    def size(self) -> int:
        return len(self.node_ids)

    @property
    def length(self) -> float:
        return self.interval[1] - self.interval[0]

    @property
    def element_lengths(self) -> np.ndarray:
        return np.diff(self.x)


@dataclass(frozen=True)
class TraceGrid:
    """Concatenation of all components; trace dof k lives at offsets[j] + local index."""
    components: Tuple[TraceComponent, ...]

    @property
    def n_nodes(self) -> int:
        return sum(c.size for c in self.components)

    @property
    def offsets(self) -> np.ndarray:
        sizes = [c.size for c in self.components]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @property
    def node_ids(self) -> np.ndarray:
        return np.concatenate([c.node_ids for c in self.components])

    @property
    def x(self) -> np.ndarray:
        return np.concatenate([c.x for c in self.components])

    def component(self, j: int) -> TraceComponent:
        """1-based lookup."""
        for comp in self.components:
            if comp.index == j:
                return comp
        raise KeyError(f"no component {j}")

    def slices(self) -> List[slice]:
        off = self.offsets
        return [slice(int(off[k]), int(off[k + 1])) for k in range(len(self.components))]

    def split(self, values: np.ndarray) -> List[np.ndarray]:
        values = np.asarray(values)
        return [values[s] for s in self.slices()]

    def sample(self, fn) -> np.ndarray:
        """Nodal values of fn(x) (vectorised) on the whole grid."""
        return np.asarray(fn(self.x), dtype=float)

    def sample_per_component(self, fns) -> np.ndarray:
        """Nodal values with a separate function per component."""
        return np.concatenate([np.asarray(fn(c.x), dtype=float) for fn, c in zip(fns, self.components)])


def boundary_trace_grid(mesh: Mesh) -> TraceGrid:
    """Collect dirichlet-tagged boundary vertices into ordered components."""
    markers = mesh.edge_markers
    dirichlet = (markers >= MARK_DIRICHLET) & (markers < MARK_WETTED)
    indices = sorted({int(m) - MARK_DIRICHLET for m in markers[dirichlet]})
    if not indices:
        raise MeshGenerationError("mesh has no Dirichlet boundary")

    spec = mesh.domain
    components = []
    for j in indices:
        edge_sel = mesh.boundary_edges[markers == MARK_DIRICHLET + j]
        nodes = np.unique(edge_sel.ravel())
        x = mesh.vertices[nodes, 0]
        order = np.argsort(x, kind="stable")
        nodes, x = nodes[order], x[order]
        if np.any(np.diff(x) <= 0):
            raise MeshGenerationError(f"component {j} nodes are not strictly ordered")
        if len(nodes) != len(edge_sel) + 1:
            raise MeshGenerationError(f"component {j} is not a simple chain of edges")

        interval = (float(x[0]), float(x[-1]))
        window = interval
        unbounded = False
        corner_ends = (True, True)
        if spec is not None:
            iv = spec.dirichlet_intervals[j - 1]
            interval, window, unbounded = (iv.a, iv.b), iv.window, iv.originally_unbounded
            trunc = spec.truncation
            corner_ends = (
                not (j == 1 and trunc is not None and trunc.was_unbounded_left),
                not (j == len(spec.dirichlet_intervals) and trunc is not None and trunc.was_unbounded_right),
            )
        components.append(TraceComponent(
            index=j, node_ids=nodes, x=x, interval=interval, window=window,
            originally_unbounded=unbounded, corner_ends=corner_ends,
        ))
    return TraceGrid(components=tuple(components))


def with_windows(grid: TraceGrid, windows: dict) -> TraceGrid:
    """Copy of the grid with replaced averaging windows (component index -> (lo, hi))."""
    comps = []
    for c in grid.components:
        w = windows.get(c.index)
        comps.append(c if w is None else TraceComponent(
            index=c.index, node_ids=c.node_ids, x=c.x, interval=c.interval, window=tuple(w),
            originally_unbounded=c.originally_unbounded, corner_ends=c.corner_ends,
        ))
    return TraceGrid(components=tuple(comps))


def line_grid(node_sets, windows: dict | None = None, unbounded: dict | None = None) -> TraceGrid:
    """Trace grid straight from abscissae, without a mesh (node ids are positions)."""
    windows = windows or {}
    unbounded = unbounded or {}
    comps = []
    start = 0
    for j, xs in enumerate(node_sets, start=1):
        x = np.asarray(xs, dtype=float)
        interval = (float(x[0]), float(x[-1]))
        comps.append(TraceComponent(
            index=j, node_ids=np.arange(start, start + len(x)), x=x, interval=interval,
            window=tuple(windows.get(j, interval)), originally_unbounded=bool(unbounded.get(j, False)),
        ))
        start += len(x)
    return TraceGrid(components=tuple(comps))
