"""Geometry -> mesh -> assembled system -> DtN operator -> weight, in one place."""
from dataclasses import dataclass
from typing import Optional

from cornerwaves.dno.operator import DtnOperator, build
from cornerwaves.fem.assembly import FemSystem, assemble
from cornerwaves.geometry.domain import DomainSpec
from cornerwaves.meshing.generator import generate
from cornerwaves.meshing.grading import GradingParams
from cornerwaves.meshing.mesh import Mesh
from cornerwaves.traces.weight import BoundaryWeight, build_weight


@dataclass
class Problem:
    """Everything derived from one (geometry, grading) pair."""
    spec: DomainSpec
    params: GradingParams
    mesh: Mesh
    system: FemSystem
    op: DtnOperator
    weight: BoundaryWeight

    @property
    def gravity(self) -> float:
        return self.spec.gravity

    @property
    def grid(self):
        return self.system.grid


def build_problem(spec: DomainSpec, params: Optional[GradingParams] = None, mode: Optional[str] = None,
                  threads: Optional[int] = None) -> Problem:
    """Mesh the domain, assemble, build the DtN operator and the corner weight."""
    params = (params or GradingParams()).resolve(spec)
    mesh = generate(spec, params)
    system = assemble(mesh)
    op = build(system, mode=mode, threads=threads)
    weight = build_weight(system.grid, params.rho0, spec)
    return Problem(spec=spec, params=params, mesh=mesh, system=system, op=op, weight=weight)
