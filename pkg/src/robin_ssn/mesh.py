"""Structured tetrahedral meshes of the unit cube.

Each of the ``n**3`` cubes is cut into six tetrahedra along its main
diagonal (Kuhn / Freudenthal split).  Every tetrahedron of a cell is the
convex hull of a monotone lattice path from the cell's lower corner to its
upper corner, so neighbouring cells always share conforming faces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

# unit steps for each of the six monotone paths 000 -> 111
_PATHS = np.array(list(permutations(range(3))))


@dataclass(frozen=True, eq=False)
class Mesh:
    """Tetrahedral mesh of (0,1)^3 with explicit boundary data.

    Attributes
    ----------
    vertices : (nv, 3) float array
    tets : (nt, 4) int array, positively oriented
    boundary_faces : (nf, 3) int array of vertex indices on the boundary
    boundary_face_owner : (nf,) int array, index of the tet owning each face
    boundary_nodes : (nb,) sorted int array of boundary vertex indices
    boundary_slot : (nv,) int array, position in ``boundary_nodes`` or -1
    level : subdivisions per axis, ``h = 1 / level``
    """

    vertices: np.ndarray
    tets: np.ndarray
    boundary_faces: np.ndarray
    boundary_face_owner: np.ndarray
    boundary_nodes: np.ndarray
    boundary_slot: np.ndarray
    level: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def h(self) -> float:
        return 1.0 / self.level

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_nodes)

    def tet_volumes(self) -> np.ndarray:
        """Signed volumes of all tetrahedra."""
        if "vol" not in self._cache:
            p = self.vertices[self.tets]
            d = p[:, 1:, :] - p[:, :1, :]
            self._cache["vol"] = np.linalg.det(d) / 6.0
        return self._cache["vol"]

    def face_areas(self) -> np.ndarray:
        """Areas of the boundary triangles."""
        if "area" not in self._cache:
            p = self.vertices[self.boundary_faces]
            c = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
            self._cache["area"] = 0.5 * np.linalg.norm(c, axis=1)
        return self._cache["area"]

    def boundary_coordinates(self) -> np.ndarray:
        return self.vertices[self.boundary_nodes]

    def restrict(self, volume_values: np.ndarray) -> np.ndarray:
        """Trace of a nodal volume field (values at the boundary nodes)."""
        return np.asarray(volume_values)[self.boundary_nodes]

    def extend(self, boundary_values: np.ndarray) -> np.ndarray:
        """Zero extension of a boundary field to all vertices."""
        out = np.zeros(self.n_vertices)
        out[self.boundary_nodes] = boundary_values
        return out


def _vertex_index(i, j, k, n):
    m = n + 1
    return (i * m + j) * m + k


def build_unit_cube_mesh(n: int) -> Mesh:
    """Kuhn-split mesh of the unit cube with ``n`` cells per axis."""
    if int(n) != n or n < 1:
        raise ValueError(f"mesh level must be a positive integer, got {n!r}")
    n = int(n)
    m = n + 1

    g = np.arange(m) / n
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    ci, cj, ck = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    corner = np.column_stack([ci.ravel(), cj.ravel(), ck.ravel()])  # (n^3, 3)

    tets = []
    for path in _PATHS:
        pts = [corner.copy()]
        cur = corner.copy()
        for axis in path:
            cur = cur.copy()
            cur[:, axis] += 1
            pts.append(cur)
        idx = np.column_stack([_vertex_index(p[:, 0], p[:, 1], p[:, 2], n) for p in pts])
        tets.append(idx)
    tets = np.stack(tets, axis=1).reshape(-1, 4)

    # fix orientation: odd permutations give negative volume
    p = vertices[tets]
    vol = np.linalg.det(p[:, 1:, :] - p[:, :1, :])
    neg = vol < 0
    tets[neg] = tets[neg][:, [0, 2, 1, 3]]

    faces, owners = _boundary_faces(vertices, tets)

    on_bnd = np.any((vertices == 0.0) | (vertices == 1.0), axis=1)
    boundary_nodes = np.flatnonzero(on_bnd)
    slot = np.full(len(vertices), -1, dtype=np.int64)
    slot[boundary_nodes] = np.arange(len(boundary_nodes))

    return Mesh(
        vertices=vertices,
        tets=tets.astype(np.int64),
        boundary_faces=faces,
        boundary_face_owner=owners,
        boundary_nodes=boundary_nodes,
        boundary_slot=slot,
        level=n,
    )


def _boundary_faces(vertices, tets):
    # a face lies on the boundary iff its three vertices share a coordinate equal to 0 or 1
    local = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
    faces = tets[:, local].reshape(-1, 3)
    owners = np.repeat(np.arange(len(tets)), 4)
    c = vertices[faces]  # (nf, 3 verts, 3 coords)
    on = np.zeros(len(faces), dtype=bool)
    for val in (0.0, 1.0):
        on |= np.any(np.all(c == val, axis=1), axis=1)
    return faces[on].astype(np.int64), owners[on].astype(np.int64)


def boundary_area_weights(mesh: Mesh) -> np.ndarray:
    """Lumped boundary mass: one third of the adjacent triangle areas per node."""
    if "bweights" not in mesh._cache:
        slots = mesh.boundary_slot[mesh.boundary_faces]
        w = np.zeros(mesh.n_boundary)
        np.add.at(w, slots, np.repeat(mesh.face_areas()[:, None] / 3.0, 3, axis=1))
        mesh._cache["bweights"] = w
    return mesh._cache["bweights"]


def volume_lumped_masses(mesh: Mesh) -> np.ndarray:
    """Vertex-quadrature weights on the volume: a quarter of each adjacent tet volume."""
    if "vweights" not in mesh._cache:
        m = np.zeros(mesh.n_vertices)
        np.add.at(m, mesh.tets, np.repeat(mesh.tet_volumes()[:, None] / 4.0, 4, axis=1))
        mesh._cache["vweights"] = m
    return mesh._cache["vweights"]
