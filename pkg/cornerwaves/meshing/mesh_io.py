"""Plain-text mesh format `corner-waves-mesh v1`.

    corner-waves-mesh v1
    vertices <n>
    <x> <z> <corner_distance>          (n lines)
    triangles <m>
    <i> <j> <k>                         (m lines, counter-clockwise)
    edges <k>
    <i> <j> <tag> <index>               (k lines)

Floats are written with 17 significant digits; indices are 0-based.
"""
from pathlib import Path
from typing import List

import numpy as np

from cornerwaves.core.errors import MeshGenerationError
from cornerwaves.meshing.mesh import Mesh, marker_to_tag, tag_to_marker

HEADER = "corner-waves-mesh v1"


def dump_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    lines: List[str] = [HEADER, f"vertices {mesh.n_vertices}"]
    for (x, z), d in zip(mesh.vertices, mesh.corner_distance):
        lines.append(f"{x:.17g} {z:.17g} {d:.17g}")
    lines.append(f"triangles {mesh.n_triangles}")
    lines.extend(f"{i} {j} {k}" for i, j, k in mesh.triangles)
    lines.append(f"edges {len(mesh.boundary_edges)}")
    for (i, j), marker in zip(mesh.boundary_edges, mesh.edge_markers):
        tag, index = marker_to_tag(int(marker))
        lines.append(f"{i} {j} {tag} {index}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _block(lines: List[str], pos: int, name: str) -> tuple[int, int]:
    parts = lines[pos].split() if pos < len(lines) else []
    if len(parts) != 2 or parts[0] != name:
        raise MeshGenerationError(f"expected '{name} <count>' at line {pos + 1}")
    return int(parts[1]), pos + 1


def load_mesh(path: str | Path) -> Mesh:
    """Read a mesh written by dump_mesh (no domain attached)."""
    lines = [ln.strip() for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines or lines[0] != HEADER:
        raise MeshGenerationError(f"not a corner-waves mesh file: {path}")
    try:
        n, pos = _block(lines, 1, "vertices")
        vert = np.array([[float(t) for t in lines[pos + k].split()] for k in range(n)], dtype=float).reshape(n, 3)
        pos += n
        m, pos = _block(lines, pos, "triangles")
        tris = np.array([[int(t) for t in lines[pos + k].split()] for k in range(m)], dtype=np.int64).reshape(m, 3)
        pos += m
        k_edges, pos = _block(lines, pos, "edges")
        edges, markers = [], []
        for k in range(k_edges):
            i, j, tag, index = lines[pos + k].split()
            edges.append((int(i), int(j)))
            markers.append(tag_to_marker(tag, int(index)))
    except (ValueError, IndexError) as exc:
        raise MeshGenerationError(f"malformed mesh file {path}: {exc}") from exc

    return Mesh(
        vertices=vert[:, :2].copy(),
        triangles=tris,
        boundary_edges=np.array(edges, dtype=np.int64).reshape(-1, 2),
        edge_markers=np.array(markers, dtype=np.int64),
        corner_distance=vert[:, 2].copy(),
    )
