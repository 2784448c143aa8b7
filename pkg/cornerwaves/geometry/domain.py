"""Fluid-domain geometry: Dirichlet intervals, wetted arcs, bottom, corners.

The boundary is stored as data (intervals on z = 0, object polylines, a
bottom polyline) and turned into a closed counter-clockwise polygon on
demand. Corners are polygon vertices where the boundary is not straight,
excluding the junctions created by truncation walls.
"""
import math
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from cornerwaves.core.errors import GeometryError

Point = Tuple[float, float]
CornerKind = Literal["surface-contact", "bottom-emergence", "neumann"]
SegmentTag = Literal["dirichlet", "wetted", "bottom", "wall", "truncation"]

# Coordinates closer than this are treated as the same point.
POINT_TOL = 1e-9
ANGLE_TOL = 1e-10


class CornerPoint(BaseModel):
    """A non-smooth boundary point with its interior fluid angle."""
    model_config = ConfigDict(frozen=True)

    x: float = Field(description="Horizontal coordinate")
    z: float = Field(description="Vertical coordinate (0 on the free surface)")
    angle: float = Field(description="Interior fluid angle in radians")
    side: Optional[Literal["left", "right"]] = Field(
        default=None, description="Contact side: 'left' ends a Dirichlet interval, 'right' starts one"
    )
    kind: CornerKind = Field(description="surface-contact | bottom-emergence | neumann")

    @property
    def mixed(self) -> bool:
        """True for corners between the free surface and a Neumann boundary."""
        return self.kind != "neumann"


class DirichletInterval(BaseModel):
    """One connected component of the free surface."""
    model_config = ConfigDict(frozen=True)

    a: float = Field(description="Left endpoint")
    b: float = Field(description="Right endpoint")
    component_index: int = Field(description="1-based component number, left to right")
    originally_unbounded: bool = Field(default=False, description="Truncated half-line")
    average_window: Optional[Point] = Field(default=None, description="Window for the component average")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def window(self) -> Point:
        if self.average_window is not None:
            return self.average_window
        return (self.a, self.b)


class Truncation(BaseModel):
    """Where an unbounded configuration was closed by a vertical Neumann wall."""
    model_config = ConfigDict(frozen=True)

    was_unbounded_left: bool = False
    was_unbounded_right: bool = False
    left_wall_x: Optional[float] = None
    right_wall_x: Optional[float] = None


class BoundarySegment(BaseModel):
    """A straight piece of the counter-clockwise boundary polygon."""
    model_config = ConfigDict(frozen=True)

    start: Point
    end: Point
    tag: SegmentTag
    index: int = Field(default=0, description="Component (dirichlet) or object (wetted) number")

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


class DomainSpec(BaseModel):
    """Geometric description of the fluid domain."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(default="custom", description="Geometry id for reports")
    gravity: float = Field(default=1.0, description="Gravitational acceleration g")
    dirichlet_intervals: List[DirichletInterval]
    wetted_arcs: List[List[Point]] = Field(default_factory=list, description="Object j from (b_j,0) to (a_{j+1},0)")
    bottom: List[Point] = Field(description="Bottom polyline, left to right")
    corners: List[CornerPoint] = Field(default_factory=list)
    truncation: Optional[Truncation] = None
    straight_corner_radius: List[float] = Field(default_factory=list, description="R^(c) per corner")

    def boundary_segments(self) -> List[BoundarySegment]:
        """Closed counter-clockwise boundary: bottom, right closure, top (right to left), left closure."""
        segments: List[BoundarySegment] = []
        intervals = self.dirichlet_intervals
        trunc = self.truncation or Truncation()

        for p, q in zip(self.bottom[:-1], self.bottom[1:]):
            segments.append(BoundarySegment(start=p, end=q, tag="bottom"))

        right_top = (intervals[-1].b, 0.0)
        if not _same_point(self.bottom[-1], right_top):
            tag = "truncation" if trunc.was_unbounded_right else "wall"
            segments.append(BoundarySegment(start=self.bottom[-1], end=right_top, tag=tag))

        for pos in range(len(intervals) - 1, -1, -1):
            interval = intervals[pos]
            segments.append(BoundarySegment(
                start=(interval.b, 0.0), end=(interval.a, 0.0),
                tag="dirichlet", index=interval.component_index,
            ))
            if pos > 0:
                arc = self.wetted_arcs[pos - 1]
                reversed_arc = list(reversed(arc))
                for p, q in zip(reversed_arc[:-1], reversed_arc[1:]):
                    segments.append(BoundarySegment(start=p, end=q, tag="wetted", index=pos))

        left_top = (intervals[0].a, 0.0)
        if not _same_point(self.bottom[0], left_top):
            tag = "truncation" if trunc.was_unbounded_left else "wall"
            segments.append(BoundarySegment(start=left_top, end=self.bottom[0], tag=tag))
        return segments

    def mixed_corners(self) -> List[CornerPoint]:
        """Corners adjacent to the free surface (the ones the weight vanishes at)."""
        return [c for c in self.corners if c.mixed]

    def translated(self, dx: float) -> "DomainSpec":
        """Horizontal rigid translation (the free surface stays at z = 0)."""
        def shift(p: Point) -> Point:
            return (p[0] + dx, p[1])

        trunc = None
        if self.truncation is not None:
            t = self.truncation
            trunc = t.model_copy(update={
                "left_wall_x": None if t.left_wall_x is None else t.left_wall_x + dx,
                "right_wall_x": None if t.right_wall_x is None else t.right_wall_x + dx,
            })
        return self.model_copy(update={
            "dirichlet_intervals": [
                iv.model_copy(update={
                    "a": iv.a + dx, "b": iv.b + dx,
                    "average_window": None if iv.average_window is None
                    else (iv.average_window[0] + dx, iv.average_window[1] + dx),
                })
                for iv in self.dirichlet_intervals
            ],
            "wetted_arcs": [[shift(p) for p in arc] for arc in self.wetted_arcs],
            "bottom": [shift(p) for p in self.bottom],
            "corners": [c.model_copy(update={"x": c.x + dx}) for c in self.corners],
            "truncation": trunc,
        })


class Violation(BaseModel):
    """One violated invariant."""
    code: str
    message: str
    location: Optional[Point] = None


class ValidationReport(BaseModel):
    """Result of validate(): empty violation list on success."""
    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> List[str]:
        return [v.message for v in self.violations]


def _same_point(p: Point, q: Point, tol: float = POINT_TOL) -> bool:
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def interior_angle(prev: Point, vertex: Point, nxt: Point) -> float:
    """Interior angle at vertex of a counter-clockwise polygon, in (0, 2*pi)."""
    a = math.atan2(prev[1] - vertex[1], prev[0] - vertex[0])
    b = math.atan2(nxt[1] - vertex[1], nxt[0] - vertex[0])
    return (a - b) % (2.0 * math.pi)


def _polygon_vertices(segments: List[BoundarySegment]) -> List[Tuple[Point, BoundarySegment, BoundarySegment]]:
    """Each polygon vertex with its incoming and outgoing segment."""
    out = []
    n = len(segments)
    for i in range(n):
        incoming = segments[i - 1]
        outgoing = segments[i]
        out.append((outgoing.start, incoming, outgoing))
    return out


def derive_corners(segments: List[BoundarySegment]) -> List[Tuple[CornerPoint, float]]:
    """Corners of the polygon with their straight radius R^(c).

    Vertices touching a truncation wall are not corners; neither are vertices
    where the boundary continues straight (angle pi) with the same tag.
    """
    corners = []
    for vertex, incoming, outgoing in _polygon_vertices(segments):
        if "truncation" in (incoming.tag, outgoing.tag):
            continue
        angle = interior_angle(incoming.start, vertex, outgoing.end)
        tags = {incoming.tag, outgoing.tag}
        if "dirichlet" in tags and len(tags) == 1:
            continue
        if "dirichlet" in tags:
            other = outgoing.tag if incoming.tag == "dirichlet" else incoming.tag
            kind: CornerKind = "bottom-emergence" if other == "bottom" else "surface-contact"
            # The top is walked right to left: an outgoing Dirichlet segment starts at b_j.
            side = "left" if outgoing.tag == "dirichlet" else "right"
        else:
            if abs(angle - math.pi) <= ANGLE_TOL:
                continue
            kind = "neumann"
            side = None
        radius = min(incoming.length, outgoing.length)
        corners.append((CornerPoint(x=vertex[0], z=vertex[1], angle=angle, side=side, kind=kind), radius))
    return corners


def make_domain(
    intervals: List[Point],
    bottom: List[Point],
    arcs: List[List[Point]] | None = None,
    gravity: float = 1.0,
    truncate_left: bool = False,
    truncate_right: bool = False,
    windows: dict[int, Point] | None = None,
    name: str = "custom",
) -> DomainSpec:
    """Build a DomainSpec, deriving corners, straight radii and default windows.

    A truncated (originally unbounded) end component averages over the half
    of its interval adjacent to its finite corner unless a window is given.
    """
    arcs = [list(map(tuple, arc)) for arc in (arcs or [])]
    windows = windows or {}
    n = len(intervals)
    dirichlet = []
    for j, (a, b) in enumerate(intervals, start=1):
        unbounded = (j == 1 and truncate_left) or (j == n and truncate_right)
        window = windows.get(j)
        if window is None and unbounded:
            mid = 0.5 * (a + b)
            if j == 1 and truncate_left and not (j == n and truncate_right):
                window = (mid, b)
            elif j == n and truncate_right and not (j == 1 and truncate_left):
                window = (a, mid)
            else:
                quarter = 0.25 * (b - a)
                window = (mid - quarter, mid + quarter)
        dirichlet.append(DirichletInterval(
            a=float(a), b=float(b), component_index=j,
            originally_unbounded=unbounded,
            average_window=window if window is not None else (float(a), float(b)),
        ))

    truncation = None
    if truncate_left or truncate_right:
        truncation = Truncation(
            was_unbounded_left=truncate_left,
            was_unbounded_right=truncate_right,
            left_wall_x=float(intervals[0][0]) if truncate_left else None,
            right_wall_x=float(intervals[-1][1]) if truncate_right else None,
        )

    draft = DomainSpec(
        name=name,
        gravity=gravity,
        dirichlet_intervals=dirichlet,
        wetted_arcs=arcs,
        bottom=[tuple(map(float, p)) for p in bottom],
        truncation=truncation,
    )
    try:
        derived = derive_corners(draft.boundary_segments())
    except IndexError as exc:
        raise GeometryError(f"cannot close boundary of '{name}': {exc}") from exc
    return draft.model_copy(update={
        "corners": [c for c, _ in derived],
        "straight_corner_radius": [r for _, r in derived],
    })


def _segments_intersect(s: BoundarySegment, t: BoundarySegment) -> bool:
    """Proper or touching intersection of two closed segments."""
    def orient(p: Point, q: Point, r: Point) -> float:
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    def on_segment(p: Point, q: Point, r: Point) -> bool:
        return (min(p[0], q[0]) - POINT_TOL <= r[0] <= max(p[0], q[0]) + POINT_TOL
                and min(p[1], q[1]) - POINT_TOL <= r[1] <= max(p[1], q[1]) + POINT_TOL)

    p1, p2, q1, q2 = s.start, s.end, t.start, t.end
    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    eps = 1e-14
    if abs(d1) <= eps and on_segment(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_segment(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_segment(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_segment(p1, p2, q2):
        return True
    return False


def _structural_violations(spec: DomainSpec) -> List[Violation]:
    out: List[Violation] = []
    intervals = spec.dirichlet_intervals
    if spec.gravity <= 0 or not math.isfinite(spec.gravity):
        out.append(Violation(code="gravity", message=f"gravity must be positive, got {spec.gravity}"))
    if not intervals:
        out.append(Violation(code="empty-dirichlet", message="empty Dirichlet boundary"))
        return out

    for pos, iv in enumerate(intervals, start=1):
        if iv.component_index != pos:
            out.append(Violation(code="component-index",
                                 message=f"component index {iv.component_index} at position {pos}",
                                 location=(iv.a, 0.0)))
        if not iv.b > iv.a:
            out.append(Violation(code="interval-length",
                                 message=f"interval length must be positive: [{iv.a}, {iv.b}]",
                                 location=(iv.a, 0.0)))
        lo, hi = iv.window
        if not (iv.a - POINT_TOL <= lo < hi <= iv.b + POINT_TOL):
            out.append(Violation(code="average-window",
                                 message=f"average window ({lo}, {hi}) not a positive sub-interval of [{iv.a}, {iv.b}]",
                                 location=(lo, 0.0)))
        elif not iv.originally_unbounded and (abs(lo - iv.a) > POINT_TOL or abs(hi - iv.b) > POINT_TOL):
            out.append(Violation(code="average-window",
                                 message=f"bounded component {iv.component_index} must average over its full interval",
                                 location=(lo, 0.0)))
    for left, right in zip(intervals[:-1], intervals[1:]):
        if not left.b < right.a:
            out.append(Violation(code="interval-ordering",
                                 message=f"interval ordering violated between components "
                                         f"{left.component_index} and {right.component_index}",
                                 location=(right.a, 0.0)))

    if len(spec.wetted_arcs) != len(intervals) - 1:
        out.append(Violation(code="wetted-arc",
                             message=f"expected {len(intervals) - 1} wetted arcs, got {len(spec.wetted_arcs)}"))
    else:
        for j, arc in enumerate(spec.wetted_arcs, start=1):
            if len(arc) < 2:
                out.append(Violation(code="wetted-arc", message=f"wetted arc {j} needs at least two points"))
                continue
            if not _same_point(arc[0], (intervals[j - 1].b, 0.0)) or not _same_point(arc[-1], (intervals[j].a, 0.0)):
                out.append(Violation(code="wetted-arc",
                                     message=f"wetted arc {j} must run from the end of component {j} "
                                             f"to the start of component {j + 1}",
                                     location=tuple(arc[0])))
            for p in arc[1:-1]:
                if not p[1] < 0:
                    out.append(Violation(code="wetted-arc",
                                         message=f"wetted arc {j} leaves the fluid side (z >= 0)",
                                         location=tuple(p)))

    bottom = spec.bottom
    if len(bottom) < 2:
        out.append(Violation(code="bottom", message="bottom needs at least two points"))
        return out
    for p, q in zip(bottom[:-1], bottom[1:]):
        if not q[0] > p[0]:
            out.append(Violation(code="bottom", message="bottom abscissae must increase strictly", location=tuple(q)))
    for p in bottom[1:-1]:
        if not p[1] < 0:
            out.append(Violation(code="bottom", message="bottom must lie below the surface", location=tuple(p)))
    for end, top in ((bottom[0], (intervals[0].a, 0.0)), (bottom[-1], (intervals[-1].b, 0.0))):
        if not (_same_point(end, top) or end[1] < 0):
            out.append(Violation(code="closure",
                                 message="bottom end must meet the surface interval end or lie below it",
                                 location=tuple(end)))

    trunc = spec.truncation or Truncation()
    first, last = intervals[0], intervals[-1]
    if trunc.was_unbounded_left:
        if _same_point(bottom[0], (first.a, 0.0)) or abs(bottom[0][0] - first.a) > POINT_TOL:
            out.append(Violation(code="truncation", message="left truncation needs a vertical wall",
                                 location=(first.a, 0.0)))
        if trunc.left_wall_x is not None and abs(trunc.left_wall_x - first.a) > POINT_TOL:
            out.append(Violation(code="truncation", message="left wall position does not match component 1"))
    if trunc.was_unbounded_right:
        if _same_point(bottom[-1], (last.b, 0.0)) or abs(bottom[-1][0] - last.b) > POINT_TOL:
            out.append(Violation(code="truncation", message="right truncation needs a vertical wall",
                                 location=(last.b, 0.0)))
        if trunc.right_wall_x is not None and abs(trunc.right_wall_x - last.b) > POINT_TOL:
            out.append(Violation(code="truncation", message="right wall position does not match the last component"))
    for iv in intervals:
        expected = ((iv is first and trunc.was_unbounded_left) or (iv is last and trunc.was_unbounded_right))
        if iv.originally_unbounded != expected:
            out.append(Violation(code="truncation",
                                 message=f"component {iv.component_index} unbounded flag disagrees with truncation",
                                 location=(iv.a, 0.0)))
    return out


def _angle_range_violation(corner: CornerPoint, angle: float) -> Violation | None:
    if corner.mixed and not (0.0 < angle < math.pi):
        return Violation(code="corner-angle", message=f"corner angle out of (0,π): {angle:.12g}",
                         location=(corner.x, corner.z))
    if not corner.mixed and not (0.0 < angle < 2.0 * math.pi):
        return Violation(code="corner-angle", message=f"corner angle out of (0,2π): {angle:.12g}",
                         location=(corner.x, corner.z))
    return None


def validate(spec: DomainSpec) -> ValidationReport:
    """Check every geometric invariant; violations are returned, never raised."""
    violations = _structural_violations(spec)
    for corner in spec.corners:
        bad = _angle_range_violation(corner, corner.angle)
        if bad is not None:
            violations.append(bad)
        if corner.kind == "surface-contact" and corner.z != 0.0:
            violations.append(Violation(code="corner-surface",
                                        message="surface-contact corner off the surface",
                                        location=(corner.x, corner.z)))
    if violations:
        return ValidationReport(violations=violations)

    segments = spec.boundary_segments()
    for i, s in enumerate(segments):
        if s.length <= POINT_TOL:
            violations.append(Violation(code="degenerate-segment", message="zero-length boundary segment",
                                        location=s.start))
        for k in range(i + 2, len(segments)):
            if i == 0 and k == len(segments) - 1:
                continue
            if _segments_intersect(s, segments[k]):
                violations.append(Violation(code="self-intersection",
                                            message=f"boundary self-intersection ({s.tag} / {segments[k].tag})",
                                            location=s.start))

    derived = derive_corners(segments)
    if len(spec.straight_corner_radius) != len(spec.corners):
        violations.append(Violation(code="straight-radius",
                                    message="straight_corner_radius must have one entry per corner"))
    stored = list(zip(spec.corners, spec.straight_corner_radius))
    for computed, radius in derived:
        match = next((c for c in spec.corners if _same_point((c.x, c.z), (computed.x, computed.z))), None)
        if match is None:
            violations.append(Violation(code="missing-corner", message="corner missing from the domain corner list",
                                        location=(computed.x, computed.z)))
            continue
        bad = _angle_range_violation(match, computed.angle)
        if bad is not None:
            violations.append(bad)
        if abs(match.angle - computed.angle) > ANGLE_TOL:
            violations.append(Violation(code="corner-angle",
                                        message=f"corner angle mismatch: stored {match.angle:.12g}, "
                                                f"computed {computed.angle:.12g}",
                                        location=(match.x, match.z)))
    for corner, r in stored:
        if not r > 0:
            violations.append(Violation(code="straight-radius", message="straight radius must be positive",
                                        location=(corner.x, corner.z)))
    return ValidationReport(violations=violations)


def _incident_segments(spec: DomainSpec, corner: CornerPoint) -> Tuple[BoundarySegment, BoundarySegment]:
    for vertex, incoming, outgoing in _polygon_vertices(spec.boundary_segments()):
        if _same_point(vertex, (corner.x, corner.z)):
            return incoming, outgoing
    raise GeometryError(f"corner ({corner.x}, {corner.z}) is not a boundary vertex")


def corner_angles(spec: DomainSpec) -> List[Tuple[CornerPoint, float]]:
    """Angle at every corner computed from its two incident straight segments."""
    out = []
    for idx, corner in enumerate(spec.corners):
        incoming, outgoing = _incident_segments(spec, corner)
        radius = spec.straight_corner_radius[idx] if idx < len(spec.straight_corner_radius) else 0.0
        shortest = min(incoming.length, outgoing.length)
        if shortest < radius - POINT_TOL:
            raise GeometryError(
                f"incident segment at corner ({corner.x}, {corner.z}) shorter than R^(c): "
                f"{shortest:.6g} < {radius:.6g}"
            )
        out.append((corner, interior_angle(incoming.start, (corner.x, corner.z), outgoing.end)))
    return out


def dirichlet_length(spec: DomainSpec) -> float:
    return sum(iv.length for iv in spec.dirichlet_intervals)


def min_straight_radius(spec: DomainSpec) -> float:
    if not spec.straight_corner_radius:
        raise GeometryError("domain has no corners")
    return min(spec.straight_corner_radius)
