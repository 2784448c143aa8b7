"""Triangle mesh container with tagged boundary edges."""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from cornerwaves.core.errors import MeshGenerationError
from cornerwaves.geometry.domain import DomainSpec

# Facet markers. Dirichlet and wetted markers carry the component/object number.
MARK_BOTTOM = 2
MARK_WALL = 3
MARK_TRUNCATION = 4
MARK_DIRICHLET = 100
MARK_WETTED = 200

SEGMENT_MARKERS = {
    "bottom": MARK_BOTTOM,
    "wall": MARK_WALL,
    "truncation": MARK_TRUNCATION,
    "dirichlet": MARK_DIRICHLET,
    "wetted": MARK_WETTED,
}


def marker_to_tag(marker: int) -> Tuple[str, int]:
    """Boundary tag and component/object index for a facet marker."""
    if marker >= MARK_WETTED:
        return "neumann-wetted", marker - MARK_WETTED
    if marker >= MARK_DIRICHLET:
        return "dirichlet", marker - MARK_DIRICHLET
    if marker == MARK_BOTTOM:
        return "neumann-bottom", 0
    if marker == MARK_WALL:
        return "neumann-wall", 0
    if marker == MARK_TRUNCATION:
        return "neumann-truncation", 0
    raise MeshGenerationError(f"unknown boundary marker {marker}")


def tag_to_marker(tag: str, index: int) -> int:
    table = {
        "neumann-wetted": MARK_WETTED + index,
        "dirichlet": MARK_DIRICHLET + index,
        "neumann-bottom": MARK_BOTTOM,
        "neumann-wall": MARK_WALL,
        "neumann-truncation": MARK_TRUNCATION,
    }
    if tag not in table:
        raise MeshGenerationError(f"unknown boundary tag '{tag}'")
    return table[tag]


@dataclass(frozen=True)
class Mesh:
    """Conforming P1 triangulation of the fluid domain.

    Triangles are counter-clockwise. Boundary edges are vertex pairs with a
    facet marker (see marker_to_tag). corner_distance holds each vertex's
    distance to the nearest domain corner.
    """
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_markers: np.ndarray
    corner_distance: np.ndarray
    domain: Optional[DomainSpec] = field(default=None, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edge_tags(self) -> List[Tuple[str, int]]:
        return [marker_to_tag(int(m)) for m in self.edge_markers]

    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.boundary_edges[:, 0]]
        q = self.vertices[self.boundary_edges[:, 1]]
        return np.linalg.norm(q - p, axis=1)

    def signed_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def triangle_angles(self) -> np.ndarray:
        """Interior angles in degrees, shape (n_triangles, 3)."""
        v = self.vertices[self.triangles]
        angles = np.empty((len(v), 3))
        for k in range(3):
            a = v[:, (k + 1) % 3] - v[:, k]
            b = v[:, (k + 2) % 3] - v[:, k]
            cos = (a * b).sum(axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles[:, k] = np.degrees(np.arccos(np.clip(cos, -1.0, 1.0)))
        return angles

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)


def mesh_quality(mesh: Mesh) -> Dict[str, float]:
    """Summary numbers for logs and reports."""
    lengths = mesh.edge_lengths()
    v = mesh.vertices[mesh.triangles]
    all_edges = np.concatenate([
        np.linalg.norm(v[:, 1] - v[:, 0], axis=1),
        np.linalg.norm(v[:, 2] - v[:, 1], axis=1),
        np.linalg.norm(v[:, 0] - v[:, 2], axis=1),
    ])
    return {
        "vertices": float(mesh.n_vertices),
        "triangles": float(mesh.n_triangles),
        "min_angle_deg": float(mesh.triangle_angles().min()),
        "max_edge": float(all_edges.max()),
        "min_boundary_edge": float(lengths.min()),
        "max_boundary_edge": float(lengths.max()),
    }


def check_mesh(mesh: Mesh, min_angle: float, exempt_vertices: np.ndarray | None = None) -> None:
    """Raise MeshGenerationError unless the structural and quality invariants hold.

    Triangles touching an exempt vertex (a boundary corner sharper than the
    quality threshold allows) are left out of the angle check.
    """
    areas = mesh.signed_areas()
    if np.any(areas <= 0.0):
        raise MeshGenerationError(f"{int((areas <= 0).sum())} triangles with non-positive area")

    edge_count: Dict[Tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for k in range(3):
            i, j = int(tri[k]), int(tri[(k + 1) % 3])
            key = (min(i, j), max(i, j))
            edge_count[key] = edge_count.get(key, 0) + 1
    free_edges = {e for e, c in edge_count.items() if c == 1}
    tagged = {(min(int(i), int(j)), max(int(i), int(j))) for i, j in mesh.boundary_edges}
    if free_edges != tagged:
        raise MeshGenerationError(
            f"boundary tagging inconsistent: {len(free_edges - tagged)} untagged boundary edges, "
            f"{len(tagged - free_edges)} tagged interior edges"
        )

    angles = mesh.triangle_angles().min(axis=1)
    if exempt_vertices is not None and len(exempt_vertices):
        touching = np.isin(mesh.triangles, exempt_vertices).any(axis=1)
        angles = angles[~touching]
    if len(angles) and angles.min() < min_angle - 1e-6:
        raise MeshGenerationError(
            f"quality threshold unreachable: minimum angle {angles.min():.3f} deg < {min_angle:.3f} deg"
        )
