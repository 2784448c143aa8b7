"""Piecewise-linear fields on the free-surface trace grid."""
from dataclasses import dataclass
from typing import Callable, List, Union

import numpy as np

from cornerwaves.core.errors import DimensionError
from cornerwaves.meshing.trace_grid import TraceGrid


@dataclass(frozen=True, eq=False)
class TraceField:
    """Nodal values on a TraceGrid, stored in trace order (components concatenated)."""
    grid: TraceGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.grid.n_nodes:
            raise DimensionError(f"field has {values.shape[0]} values, grid has {self.grid.n_nodes} nodes")
        if not np.all(np.isfinite(values)):
            raise DimensionError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: TraceGrid) -> "TraceField":
        return cls(grid, np.zeros(grid.n_nodes))

    @classmethod
    def constant(cls, grid: TraceGrid, c: float) -> "TraceField":
        return cls(grid, np.full(grid.n_nodes, float(c)))

    @classmethod
    def from_function(cls, grid: TraceGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "TraceField":
        return cls(grid, grid.sample(fn))

    def component(self, j: int) -> np.ndarray:
        """Values on component j (1-based)."""
        for comp, s in zip(self.grid.components, self.grid.slices()):
            if comp.index == j:
                return self.values[s]
        raise KeyError(f"no component {j}")

    def parts(self) -> List[np.ndarray]:
        return self.grid.split(self.values)

    def with_values(self, values: np.ndarray) -> "TraceField":
        return TraceField(self.grid, values)

    def _other(self, other) -> np.ndarray | float:
        if isinstance(other, TraceField):
            if other.grid is not self.grid and other.grid.n_nodes != self.grid.n_nodes:
                raise DimensionError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other) -> "TraceField":
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other) -> "TraceField":
        return self.with_values(self.values - self._other(other))

    def __rsub__(self, other) -> "TraceField":
        return self.with_values(self._other(other) - self.values)

    def __mul__(self, scalar: float) -> "TraceField":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "TraceField":
        return self.with_values(self.values / float(scalar))

    def __neg__(self) -> "TraceField":
        return self.with_values(-self.values)


FieldLike = Union[TraceField, np.ndarray]


def as_values(field: FieldLike, grid: TraceGrid) -> np.ndarray:
    """Nodal array of a TraceField or raw array, checked against the grid."""
    values = field.values if isinstance(field, TraceField) else np.asarray(field, dtype=float).reshape(-1)
    if values.shape[0] != grid.n_nodes:
        raise DimensionError(f"expected {grid.n_nodes} trace values, got {values.shape[0]}")
    return values
