"""Corner grading law and graded sampling of boundary segments."""
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cornerwaves.core.errors import GeometryError
from cornerwaves.geometry.catalog import default_rho0
from cornerwaves.geometry.domain import DomainSpec


class GradingParams(BaseModel):
    """Mesh size control: h ~ h0 * (r / rho0)^(1 - 1/beta) inside the corner region."""
    model_config = ConfigDict(frozen=True)

    h0: float = Field(default=0.1, gt=0, description="Target interior edge length")
    grading_exponent: float = Field(default=3.0, ge=1.0, le=4.0, description="beta_g; 1 means uniform")
    rho0: Optional[float] = Field(default=None, gt=0, description="Corner-region radius; None picks the largest admissible")

    def resolve(self, spec: DomainSpec) -> "GradingParams":
        """Fill rho0 from the geometry and check 0 < rho0 <= R^(c)/2."""
        if not spec.straight_corner_radius:
            raise GeometryError("domain has no corners to grade toward")
        limit = 0.5 * min(spec.straight_corner_radius)
        rho0 = self.rho0 if self.rho0 is not None else default_rho0(spec)
        if rho0 > limit * (1.0 + 1e-12):
            raise GeometryError(f"rho0 = {rho0:.6g} exceeds half the smallest straight corner radius ({limit:.6g})")
        return self.model_copy(update={"rho0": rho0})

    @property
    def h_min(self) -> float:
        """Self-consistent edge length at the corner itself."""
        if self.rho0 is None:
            raise GeometryError("rho0 unresolved")
        beta = self.grading_exponent
        return min(self.h0, self.h0 * (self.h0 / self.rho0) ** (beta - 1.0))


class SizeField:
    """Target edge length as a function of position."""

    def __init__(self, params: GradingParams, centres: Sequence[Tuple[float, float]]):
        if params.rho0 is None:
            raise GeometryError("GradingParams must be resolved before building a size field")
        self.params = params
        self.centres = np.asarray(centres, dtype=float).reshape(-1, 2)
        self._power = 1.0 - 1.0 / params.grading_exponent
        self._h_min = params.h_min

    def distance(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if len(self.centres) == 0:
            return np.full(len(points), np.inf)
        diff = points[:, None, :] - self.centres[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=2)).min(axis=1)

    def size_at_distance(self, r: np.ndarray) -> np.ndarray:
        p = self.params
        scaled = np.minimum(1.0, np.asarray(r, dtype=float) / p.rho0)
        return np.maximum(self._h_min, p.h0 * scaled ** self._power)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.size_at_distance(self.distance(points))


def graded_samples(start, end, size: SizeField) -> np.ndarray:
    """Points on the segment [start, end] spaced by the size field (endpoints included).

    The count is ceil(integral of ds / h); nodes split that integral evenly,
    so every edge is at most one local size long.
    """
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = float(np.linalg.norm(end - start))
    h_min = size.params.h_min
    smallest = max(min(h_min / 20.0, length / 10.0), 1e-14)
    geometric = np.geomspace(smallest, length, 400)
    t = np.unique(np.concatenate([
        np.linspace(0.0, length, 2001),
        geometric,
        length - geometric,
    ]))
    t = t[(t >= 0.0) & (t <= length)]
    points = start + np.outer(t / length, end - start)
    density = 1.0 / size(points)
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(t))])
    total = cumulative[-1]
    count = max(1, math.ceil(total - 1e-9))
    targets = np.linspace(0.0, total, count + 1)
    s = np.interp(targets, cumulative, t)
    s[0], s[-1] = 0.0, length
    samples = start + np.outer(s / length, end - start)
    samples[0], samples[-1] = start, end
    return samples
