"""Built-in example geometries."""
import math
from typing import Callable, Dict, Optional, Tuple

from cornerwaves.core.errors import GeometryError
from cornerwaves.geometry.domain import DomainSpec, make_domain


def rectangle(length: float = math.pi, depth: float = 1.0, gravity: float = 1.0) -> DomainSpec:
    """Closed tank [0, length] x [-depth, 0] with the whole top free."""
    return make_domain(
        intervals=[(0.0, length)],
        bottom=[(0.0, -depth), (length, -depth)],
        gravity=gravity,
        name="rectangle",
    )


def one_object(gravity: float = 1.0, wall_x: float = -3.0) -> DomainSpec:
    """Half-line truncated at wall_x, one trapezoidal hull, emerging beach on the right."""
    hull = [(-0.6, 0.0), (-0.3, -0.3), (0.3, -0.3), (0.6, 0.0)]
    return make_domain(
        intervals=[(wall_x, -0.6), (0.6, 3.0)],
        arcs=[hull],
        bottom=[(wall_x, -1.0), (2.0, -1.0), (3.0, 0.0)],
        gravity=gravity,
        truncate_left=True,
        name="one-object",
    )


def two_object(gravity: float = 1.0) -> DomainSpec:
    """Bounded basin with beaches on both sides and two hulls (three surface components)."""
    box = [(-1.5, 0.0), (-1.5, -0.3), (-0.5, -0.3), (-0.5, 0.0)]
    trapezoid = [(0.5, 0.0), (0.8, -0.3), (1.2, -0.3), (1.5, 0.0)]
    return make_domain(
        intervals=[(-3.0, -1.5), (-0.5, 0.5), (1.5, 3.0)],
        arcs=[box, trapezoid],
        bottom=[(-3.0, 0.0), (-2.0, -1.0), (2.0, -1.0), (3.0, 0.0)],
        gravity=gravity,
        name="two-object",
    )


def sector(omega: float = 0.75 * math.pi, radius: float = 1.0, gravity: float = 1.0) -> DomainSpec:
    """Single mixed corner of opening omega at the origin.

    The free surface is [0, radius]; a straight wall leaves the origin at
    angle omega below the surface, and a coarse polygonal arc of the same
    radius closes the domain back to (radius, 0).
    """
    if not 0.0 < omega < math.pi:
        raise GeometryError(f"sector opening must lie in (0, pi), got {omega}")
    pieces = max(2, math.ceil(omega / (math.pi / 4.0)))
    arc = [
        (radius * math.cos(theta), -radius * math.sin(theta))
        for theta in (omega * (1.0 - k / pieces) for k in range(pieces + 1))
    ]
    arc[-1] = (radius, 0.0)
    # the wall from the apex to arc[0] is the left closure
    return make_domain(
        intervals=[(0.0, radius)],
        bottom=arc,
        gravity=gravity,
        name="sector",
    )


def emerging_beach(gravity: float = 1.0, flat: float = 3.0, depth: float = 1.0) -> DomainSpec:
    """Wall on the left, flat bottom, slope-1 beach rising to the shoreline."""
    shore = flat + depth
    return make_domain(
        intervals=[(0.0, shore)],
        bottom=[(0.0, -depth), (flat, -depth), (shore, 0.0)],
        gravity=gravity,
        name="emerging-beach",
    )


BUILTINS: Dict[str, Callable[..., DomainSpec]] = {
    "rectangle": rectangle,
    "one-object": one_object,
    "two-object": two_object,
    "sector": sector,
    "emerging-beach": emerging_beach,
}


def builtin_domain(name: str, **params) -> DomainSpec:
    """Look up a built-in geometry by id and build it with keyword overrides."""
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise GeometryError(f"unknown built-in geometry '{name}' (known: {', '.join(sorted(BUILTINS))})")
    return factory(**params)


def default_rho0(spec: DomainSpec, cap: float = 0.25) -> float:
    """Largest admissible corner-region radius, capped for desk-scale meshes."""
    return min(cap, 0.5 * min(spec.straight_corner_radius))


def rectangle_dimensions(spec: DomainSpec) -> Optional[Tuple[float, float]]:
    """(length, depth) when the domain is a closed rectangular tank, else None."""
    if len(spec.dirichlet_intervals) != 1 or spec.wetted_arcs or spec.truncation is not None:
        return None
    if len(spec.bottom) != 2:
        return None
    (x0, z0), (x1, z1) = spec.bottom
    iv = spec.dirichlet_intervals[0]
    if abs(z0 - z1) > 1e-12 or z0 >= 0 or abs(x0 - iv.a) > 1e-12 or abs(x1 - iv.b) > 1e-12:
        return None
    return iv.b - iv.a, -z0
