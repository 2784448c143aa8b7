"""Report schema for diagnostic suites."""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field


class CheckRecord(BaseModel):
    """One measured quantity against its target."""
    name: str = Field(description="Check name, unique within a report")
    value: Optional[float] = Field(default=None, description="Measured value (None if the check crashed)")
    bound: Optional[float] = Field(default=None, description="Tolerance or target the value is compared with")
    passed: bool = Field(description="Whether the value meets the bound")
    detail: Optional[str] = Field(default=None, description="Comparison, extra numbers or the error message")


class SuiteReport(BaseModel):
    """Result of run_suite; deterministic given suite, geometry, parameters and seed."""
    suite: str = Field(description="Suite name")
    geometry: str = Field(description="Geometry id")
    mesh_params: Dict[str, float] = Field(default_factory=dict, description="Resolved grading parameters")
    seed: int = Field(description="Master seed of every random ensemble")
    checks: List[CheckRecord] = Field(default_factory=list, description="Check records sorted by name")
    tables: Dict[str, List[dict]] = Field(default_factory=dict, description="Auxiliary tables (spectra, fits)")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> List[CheckRecord]:
        return [c for c in self.checks if not c.passed]

    def sorted(self) -> "SuiteReport":
        return self.model_copy(update={"checks": sorted(self.checks, key=lambda c: c.name)})

    def merged(self, other: "SuiteReport") -> "SuiteReport":
        """Union of two reports (used by the 'all' suite)."""
        tables = dict(self.tables)
        tables.update(other.tables)
        return self.model_copy(update={"checks": self.checks + other.checks, "tables": tables}).sorted()
