"""Corner-graded constrained Delaunay meshing via meshpy's Triangle bindings."""
import math
from typing import Dict, List, Tuple

import meshpy.triangle as triangle
import numpy as np

from cornerwaves.config.settings import get_settings
from cornerwaves.core.errors import GeometryError, MeshGenerationError
from cornerwaves.core.logger import log_event
from cornerwaves.geometry.domain import DomainSpec, interior_angle, validate
from cornerwaves.meshing.grading import GradingParams, SizeField, graded_samples
from cornerwaves.meshing.mesh import SEGMENT_MARKERS, Mesh, check_mesh, mesh_quality

# Input corners sharper than this (degrees) are outside Triangle's quality guarantee.
SHARP_INPUT_ANGLE = 60.0


def _boundary_pslg(spec: DomainSpec, size: SizeField):
    """Graded boundary points, closed facet loop, facet markers, and polygon-vertex angles."""
    segments = spec.boundary_segments()
    points: List[np.ndarray] = []
    facets: List[Tuple[int, int]] = []
    markers: List[int] = []
    vertex_ids: List[int] = []

    for seg in segments:
        samples = graded_samples(seg.start, seg.end, size)
        base = len(points)
        vertex_ids.append(base)
        # the end point of each segment is the start of the next one
        points.extend(samples[:-1])
        marker = SEGMENT_MARKERS[seg.tag] + (seg.index if seg.tag in ("dirichlet", "wetted") else 0)
        for k in range(len(samples) - 1):
            facets.append((base + k, base + k + 1))
            markers.append(marker)
    n = len(points)
    facets = [(i, j % n) for i, j in facets]

    angles = []
    for pos, seg in enumerate(segments):
        prev = segments[pos - 1]
        angles.append(math.degrees(interior_angle(prev.start, seg.start, seg.end)))
    return np.asarray(points), facets, markers, vertex_ids, angles


def generate(spec: DomainSpec, params: GradingParams) -> Mesh:
    """Triangulate the domain with edges graded toward every corner."""
    report = validate(spec)
    if not report.ok:
        raise GeometryError("invalid domain: " + "; ".join(report.messages()))
    params = params.resolve(spec)
    settings = get_settings()

    centres = [(c.x, c.z) for c in spec.corners]
    size = SizeField(params, centres)
    points, facets, markers, vertex_ids, input_angles = _boundary_pslg(spec, size)

    info = triangle.MeshInfo()
    info.set_points([tuple(p) for p in points])
    info.set_facets(facets, facet_markers=markers)

    area_factor = math.sqrt(3.0) / 4.0

    def needs_refinement(vertices, area):
        centroid = np.sum(np.array(vertices), axis=0) / 3.0
        h = float(size(centroid[None, :])[0])
        return bool(area > area_factor * h * h)

    try:
        built = triangle.build(
            info,
            refinement_func=needs_refinement,
            min_angle=settings.min_angle,
            allow_boundary_steiner=True,
        )
    except Exception as exc:
        raise MeshGenerationError(f"triangulation failed: {exc}") from exc

    vertices = np.array(built.points, dtype=float)
    triangles = np.array(built.elements, dtype=np.int64)
    v = vertices[triangles]
    signed = (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1]) - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0])
    flip = signed < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    edges = np.array(built.facets, dtype=np.int64).reshape(-1, 2)
    edge_markers = np.array(built.facet_markers, dtype=np.int64).reshape(-1)
    keep = edge_markers > 0
    edges, edge_markers = edges[keep], edge_markers[keep]

    corner_xy = np.array([(c.x, c.z) for c in spec.corners], dtype=float).reshape(-1, 2)
    if len(corner_xy):
        dist = np.sqrt(((vertices[:, None, :] - corner_xy[None, :, :]) ** 2).sum(axis=2))
        missing = int(np.count_nonzero(dist.min(axis=0) > 1e-12))
        if missing:
            raise MeshGenerationError(f"{missing} corners are not mesh vertices")
        corner_distance = dist.min(axis=1)
        corner_distance[corner_distance <= 1e-12] = 0.0
    else:
        corner_distance = np.full(len(vertices), np.inf)

    mesh = Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=edges,
        edge_markers=edge_markers,
        corner_distance=corner_distance,
        domain=spec,
    )

    sharp = [vid for vid, ang in zip(vertex_ids, input_angles) if ang < SHARP_INPUT_ANGLE]
    check_mesh(mesh, settings.min_angle, exempt_vertices=np.asarray(sharp, dtype=np.int64))

    quality = mesh_quality(mesh)
    log_event("mesh", "mesh_generated", {
        "geometry": spec.name,
        "h0": params.h0,
        "grading_exponent": params.grading_exponent,
        "rho0": params.rho0,
        **quality,
    })
    return mesh


def resolved_params(spec: DomainSpec, params: GradingParams) -> Dict[str, float]:
    """Grading parameters with rho0 and h_min filled in, for reports."""
    p = params.resolve(spec)
    return {"h0": p.h0, "grading_exponent": p.grading_exponent, "rho0": p.rho0, "h_min": p.h_min}
