"""Geometry ingestion: built-in ids, JSON documents, JSON strings and dicts."""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from cornerwaves.core.errors import GeometryError
from cornerwaves.core.logger import log_event
from cornerwaves.geometry.catalog import BUILTINS, builtin_domain
from cornerwaves.geometry.domain import DomainSpec, make_domain, validate

Point = Tuple[float, float]


class IntervalEntry(BaseModel):
    """A Dirichlet interval given as an object instead of a bare [a, b] pair."""
    model_config = ConfigDict(extra="forbid")

    a: float
    b: float
    average_window: Optional[Point] = None


class ObjectEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    arc: List[Point] = Field(min_length=2, description="Wetted polyline from (b_j, 0) to (a_{j+1}, 0)")


class TruncationEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    left: bool = False
    right: bool = False


class GeometryDocument(BaseModel):
    """On-disk geometry format."""
    model_config = ConfigDict(extra="forbid")

    name: str = "custom"
    gravity: float = Field(default=1.0, gt=0)
    dirichlet_intervals: List[Union[Point, IntervalEntry]] = Field(min_length=1)
    objects: List[ObjectEntry] = Field(default_factory=list)
    bottom: List[Point] = Field(min_length=2)
    truncation: TruncationEntry = Field(default_factory=TruncationEntry)

    def to_domain(self) -> DomainSpec:
        intervals, windows = [], {}
        for j, entry in enumerate(self.dirichlet_intervals, start=1):
            if isinstance(entry, IntervalEntry):
                intervals.append((entry.a, entry.b))
                if entry.average_window is not None:
                    windows[j] = entry.average_window
            else:
                intervals.append(tuple(entry))
        return make_domain(
            intervals=intervals,
            bottom=list(self.bottom),
            arcs=[list(o.arc) for o in self.objects],
            gravity=self.gravity,
            truncate_left=self.truncation.left,
            truncate_right=self.truncation.right,
            windows=windows,
            name=self.name,
        )


def domain_schema_help() -> str:
    """Usage text for the geometry argument."""
    return (
        "geometry: a built-in id (" + ", ".join(sorted(BUILTINS)) + "), a JSON file path, or inline JSON:\n"
        "  {\n"
        '    "name": "custom",\n'
        '    "gravity": 1.0,\n'
        '    "dirichlet_intervals": [[a1, b1], {"a": a2, "b": b2, "average_window": [lo, hi]}],\n'
        '    "objects": [{"arc": [[b1, 0], [x, z], ..., [a2, 0]]}],\n'
        '    "bottom": [[x_left, z], ..., [x_right, z]],\n'
        '    "truncation": {"left": false, "right": false}\n'
        "  }\n"
        "Intervals lie on z = 0 and are listed left to right; object j joins the\n"
        "right end of interval j to the left end of interval j+1. The bottom runs\n"
        "from below the left end of the surface to below (or up to) its right end.\n"
        "A truncated side marks an originally unbounded component closed by a\n"
        "vertical Neumann wall."
    )


def _document(data: Dict[str, Any]) -> DomainSpec:
    try:
        doc = GeometryDocument.model_validate(data)
    except ValidationError as exc:
        raise GeometryError(f"invalid geometry document: {exc}") from exc
    return doc.to_domain()


def load_domain(source: Union[str, Path, Dict[str, Any], DomainSpec], **params) -> DomainSpec:
    """Resolve a geometry argument into a validated DomainSpec.

    params are keyword overrides for built-in geometries and must be empty
    otherwise.
    """
    if isinstance(source, DomainSpec):
        spec = source
    elif isinstance(source, dict):
        spec = _document(source)
    else:
        text = str(source).strip()
        if text in BUILTINS:
            spec = builtin_domain(text, **params)
            params = {}
        elif text.startswith("{"):
            try:
                spec = _document(json.loads(text))
            except json.JSONDecodeError as exc:
                raise GeometryError(f"inline geometry is not valid JSON: {exc}") from exc
        else:
            path = Path(text)
            if not path.is_file():
                raise GeometryError(f"geometry '{text}' is neither a built-in id nor an existing file")
            try:
                data = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise GeometryError(f"{path}: not valid JSON: {exc}") from exc
            spec = _document(data)
    if params:
        raise GeometryError(f"geometry parameters {sorted(params)} only apply to built-in ids")

    report = validate(spec)
    if not report.ok:
        raise GeometryError(f"geometry '{spec.name}' is not admissible: " + "; ".join(report.messages()))
    log_event("domain", "domain_loaded", {"name": spec.name, "components": len(spec.dirichlet_intervals),
                                           "corners": len(spec.corners)})
    return spec
