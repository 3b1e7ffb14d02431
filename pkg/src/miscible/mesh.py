"""Structured simplicial meshes of the unit square and unit cube.

Each grid square is split along its lower-left to upper-right diagonal;
each grid cube is split into the six tetrahedra that share the main cube
diagonal (Kuhn subdivision).  Facets (edges in 2D, triangular faces in 3D)
carry a global orientation fixed by ascending vertex indices, and every
(cell, local facet) incidence stores the sign relating the cell's outward
normal to that global orientation.  This is the bookkeeping H(div)
elements need to share normal fluxes consistently between cells.

Vertices are numbered lexicographically in (x, y[, z]), cells and facets
in a fixed traversal order, so two builds with the same arguments produce
identical tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Mesh",
    "build_structured_mesh",
    "enumerate_facets",
    "mesh_size",
    "cell_volumes",
]

# Local facet i is the one opposite local vertex i.  In 2D the pair is kept
# in cyclic order (used by RT1 edge moments); in 3D only the set matters.
LOCAL_FACETS = {
    2: ((1, 2), (2, 0), (0, 1)),
    3: ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)),
}


@dataclass(frozen=True)
class Mesh:
    """Simplicial mesh with oriented facet tables.

    Attributes:
        dim: spatial dimension, 2 or 3.
        vertices: (n_vertices, dim) coordinates in [0, 1]^dim.
        cells: (n_cells, dim+1) vertex ids, ordered for positive volume.
        facets: (n_facets, dim) ascending vertex ids per facet.
        cell_facets: (n_cells, dim+1); entry i is the facet opposite local
            vertex i.
        facet_signs: (n_cells, dim+1); +1 where the cell's outward normal
            agrees with the global facet orientation, -1 otherwise.
        boundary: (n_facets,) bool, True for facets with one incident cell.
    """

    dim: int
    vertices: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    cell_facets: np.ndarray
    facet_signs: np.ndarray
    boundary: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_facets(self) -> int:
        return self.facets.shape[0]


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.setflags(write=False)


def _global_facet_normals(vertices: np.ndarray, facets: np.ndarray) -> np.ndarray:
    """Unnormalized facet normals fixed by the ascending-vertex convention.

    2D: edge runs from the lower to the higher vertex index, the normal is
    the tangent rotated clockwise.  3D: right-hand rule on the ascending
    vertex order.
    """
    if facets.shape[1] == 2:
        t = vertices[facets[:, 1]] - vertices[facets[:, 0]]
        return np.stack([t[:, 1], -t[:, 0]], axis=1)
    e1 = vertices[facets[:, 1]] - vertices[facets[:, 0]]
    e2 = vertices[facets[:, 2]] - vertices[facets[:, 0]]
    return np.cross(e1, e2)


def enumerate_facets(
    dim: int, vertices: np.ndarray, cells: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Build the oriented facet tables for a set of simplices.

    Returns (facets, cell_facets, facet_signs, boundary).  Facets are keyed
    by their sorted vertex tuple and numbered in lexicographic order of
    those tuples, which makes the numbering a pure function of the cell
    array.
    """
    local = LOCAL_FACETS[dim]
    n_cells = cells.shape[0]
    per_cell = len(local)

    # (n_cells * per_cell, dim) sorted vertex ids of every incidence
    keys = np.sort(
        np.concatenate([cells[:, list(f)] for f in local], axis=0), axis=1
    )
    # rows grouped by local facet; reorder to (cell, local) pairs
    keys = keys.reshape(per_cell, n_cells, dim).transpose(1, 0, 2)
    flat = keys.reshape(-1, dim)

    facets, inverse = np.unique(flat, axis=0, return_inverse=True)
    cell_facets = inverse.reshape(n_cells, per_cell).astype(np.int64)
    counts = np.bincount(inverse, minlength=facets.shape[0])
    boundary = counts == 1

    # Orientation: compare the global normal with the outward direction,
    # which for a simplex points from the opposite vertex to the facet.
    normals = _global_facet_normals(vertices, facets)
    signs = np.empty((n_cells, per_cell))
    for i, f in enumerate(local):
        fid = cell_facets[:, i]
        centroid = vertices[cells[:, list(f)]].mean(axis=1)
        outward = centroid - vertices[cells[:, i]]
        signs[:, i] = np.sign(np.einsum("ca,ca->c", normals[fid], outward))
    if np.any(signs == 0):
        raise ValueError("degenerate facet: outward normal is tangential")
    return facets, cell_facets, signs, boundary


def _cells_unit_square(M: int) -> np.ndarray:
    def vid(i: int, j: int) -> int:
        return i * (M + 1) + j

    cells = []
    for i in range(M):
        for j in range(M):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            cells.append((a, b, c))  # below the diagonal a-c
            cells.append((a, c, d))  # above
    return np.asarray(cells, dtype=np.int64)


def _cells_unit_cube(M: int) -> np.ndarray:
    def vid(i: int, j: int, k: int) -> int:
        return (i * (M + 1) + j) * (M + 1) + k

    axes = np.eye(3, dtype=np.int64)
    cells = []
    for i in range(M):
        for j in range(M):
            for k in range(M):
                base = np.array([i, j, k], dtype=np.int64)
                for perm in itertools.permutations(range(3)):
                    path = [base]
                    for ax in perm:
                        path.append(path[-1] + axes[ax])
                    tet = [vid(*p) for p in path]
                    # odd permutations give negative volume; swap to fix
                    if _perm_sign(perm) < 0:
                        tet[2], tet[3] = tet[3], tet[2]
                    cells.append(tet)
    return np.asarray(cells, dtype=np.int64)


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    p = list(perm)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def build_structured_mesh(dim: int, M: int) -> Mesh:
    """Uniform simplicial mesh of [0,1]^dim with M subdivisions per side.

    2D: (M+1)^2 vertices and 2 M^2 triangles, every square cut along the
    same lower-left to upper-right diagonal.  3D: (M+1)^3 vertices and
    6 M^3 tetrahedra from the Kuhn subdivision.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    if M < 1:
        raise ValueError(f"M must be a positive integer, got {M}")

    side = np.arange(M + 1) / M
    grids = np.meshgrid(*([side] * dim), indexing="ij")
    vertices = np.stack([g.ravel() for g in grids], axis=1)

    cells = _cells_unit_square(M) if dim == 2 else _cells_unit_cube(M)
    vols = cell_volumes_from_arrays(dim, vertices, cells)
    if np.any(vols <= 0):
        raise ValueError("negative cell volume in structured mesh")

    facets, cell_facets, signs, boundary = enumerate_facets(dim, vertices, cells)
    _freeze(vertices, cells, facets, cell_facets, signs, boundary)
    return Mesh(dim, vertices, cells, facets, cell_facets, signs, boundary)


def cell_volumes_from_arrays(
    dim: int, vertices: np.ndarray, cells: np.ndarray
) -> np.ndarray:
    """Signed volumes under the stored vertex order."""
    edges = vertices[cells[:, 1:]] - vertices[cells[:, :1]]
    det = np.linalg.det(edges)
    return det / (2.0 if dim == 2 else 6.0)


def cell_volumes(mesh: Mesh) -> np.ndarray:
    return cell_volumes_from_arrays(mesh.dim, mesh.vertices, mesh.cells)


def mesh_size(mesh: Mesh) -> float:
    """Largest cell diameter; sqrt(dim)/M for the structured family."""
    pts = mesh.vertices[mesh.cells]  # (nc, dim+1, dim)
    diff = pts[:, :, None, :] - pts[:, None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())
