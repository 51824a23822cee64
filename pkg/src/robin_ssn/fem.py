"""P1 finite element assembly on tetrahedral meshes.

Volume fields are nodal arrays of length ``mesh.n_vertices``; boundary
fields are nodal arrays of length ``mesh.n_boundary`` ordered like
``mesh.boundary_nodes``.
"""

from __future__ import annotations

from typing import Callable, Union

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, boundary_area_weights, volume_lumped_masses

# constant, callable of the (N, 3) vertex array, or nodal values
ScalarField = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]

# exact integrals of barycentric products over a triangle, divided by its area
_TRI_MASS = (np.ones((3, 3)) + np.eye(3)) / 12.0
# same for a tetrahedron, divided by its volume
_TET_MASS = (np.ones((4, 4)) + np.eye(4)) / 20.0


def _sample(f: ScalarField, x: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.broadcast_to(np.asarray(f(x), dtype=float), (len(x),)).copy()
    f = np.asarray(f, dtype=float)
    if f.ndim == 0:
        return np.full(len(x), float(f))
    if f.shape != (len(x),):
        raise ValueError("nodal values must have one entry per vertex")
    return f.copy()


def _scatter_matrix(elems, local, n):
    k = elems.shape[1]
    rows = np.repeat(elems, k, axis=1).ravel()
    cols = np.tile(elems, (1, k)).ravel()
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def _p1_gradients(mesh: Mesh):
    p = mesh.vertices[mesh.tets]
    D = p[:, 1:, :] - p[:, :1, :]  # rows are edge vectors
    Dinv = np.linalg.inv(D)  # columns are gradients of lambda_1..3
    g123 = np.transpose(Dinv, (0, 2, 1))
    g0 = -g123.sum(axis=1, keepdims=True)
    return np.concatenate([g0, g123], axis=1)  # (nt, 4, 3)


def assemble_stiffness(mesh: Mesh, a0: ScalarField = 0.0) -> sp.csr_matrix:
    """Matrix of ``int grad(phi_i).grad(phi_j) + a0 phi_i phi_j``.

    The zeroth-order term uses vertex quadrature, so it only touches the
    diagonal.
    """
    a0v = _sample(a0, mesh.vertices)
    if np.any(a0v < 0):
        raise ValueError("zeroth-order coefficient a0 must be nonnegative")
    vol = mesh.tet_volumes()
    G = _p1_gradients(mesh)
    local = vol[:, None, None] * np.einsum("tik,tjk->tij", G, G)
    K = _scatter_matrix(mesh.tets, local, mesh.n_vertices)
    return (K + sp.diags(volume_lumped_masses(mesh) * a0v)).tocsr()


def assemble_volume_mass(mesh: Mesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix on the volume."""
    if "vmass" not in mesh._cache:
        local = mesh.tet_volumes()[:, None, None] * _TET_MASS
        mesh._cache["vmass"] = _scatter_matrix(mesh.tets, local, mesh.n_vertices)
    return mesh._cache["vmass"]


def assemble_boundary_mass(mesh: Mesh, coeff: np.ndarray) -> sp.csr_matrix:
    """Matrix of ``int_Gamma c phi_i phi_j`` with ``c`` the P1 interpolant of ``coeff``.

    Uses the exact triangle rule for a product of three barycentric
    coordinates: area/10, area/30 or area/60 for 3, 2 or 1 distinct indices.
    The result is indexed by global vertex numbers.
    """
    coeff = np.asarray(coeff, dtype=float)
    if coeff.shape != (mesh.n_boundary,):
        raise ValueError("boundary coefficient must have one value per boundary node")
    area = mesh.face_areas()
    c = coeff[mesh.boundary_slot[mesh.boundary_faces]]  # (nf, 3)
    csum = c.sum(axis=1)
    # int c l_i l_j = area * (sum_k c_k (1 + [i=k] + [j=k] + [i=j]) + [i=j] c_i ...) / 60
    T = np.empty((len(area), 3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                T[:, i, j] = (2.0 * csum + 4.0 * c[:, i]) / 60.0
            else:
                T[:, i, j] = (csum + c[:, i] + c[:, j]) / 60.0
    local = area[:, None, None] * T
    return _scatter_matrix(mesh.boundary_faces, local, mesh.n_vertices)


def assemble_lumped_boundary_mass(mesh: Mesh) -> np.ndarray:
    """Diagonal of the row-summed boundary mass matrix (per boundary node)."""
    return boundary_area_weights(mesh)


def assemble_volume_load(mesh: Mesh, f: ScalarField) -> np.ndarray:
    """Entries ``int f_h phi_i`` where ``f_h`` is the vertex interpolant of ``f``."""
    return assemble_volume_mass(mesh) @ _sample(f, mesh.vertices)


def assemble_boundary_load(mesh: Mesh, g) -> np.ndarray:
    """Entries ``int_Gamma g_h phi_i`` as a full-length vector.

    ``g`` is either a boundary field (one value per boundary node) or an
    array of shape ``(n_faces, 3)`` with separate corner values per boundary
    triangle, which allows data that jump across cube edges.
    """
    g = np.asarray(g, dtype=float)
    area = mesh.face_areas()
    if g.shape == (mesh.n_boundary,):
        gf = g[mesh.boundary_slot[mesh.boundary_faces]]
    elif g.shape == (len(area), 3):
        gf = g
    else:
        raise ValueError("boundary datum has the wrong shape")
    local = area[:, None] * (gf @ _TRI_MASS)
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, mesh.boundary_faces, local)
    return out


def boundary_face_normals(mesh: Mesh) -> np.ndarray:
    """Outward unit normals of the boundary triangles (axis aligned)."""
    if "normals" not in mesh._cache:
        p = mesh.vertices[mesh.boundary_faces]
        nrm = np.zeros((len(p), 3))
        for axis in range(3):
            coord = p[:, :, axis]
            nrm[np.all(coord == 0.0, axis=1), axis] = -1.0
            nrm[np.all(coord == 1.0, axis=1), axis] = 1.0
        mesh._cache["normals"] = nrm
    return mesh._cache["normals"]


def nonlinear_volume_terms(mesh: Mesh, y: np.ndarray, a_eval, da_eval):
    """Vertex-quadrature residual ``int a(x, y) phi_i`` and its Jacobian.

    Returns the vector and the (diagonal) matrix of
    ``int da/dy(x, y) phi_i phi_j``.  Because both use the same quadrature,
    the matrix is exactly the derivative of the vector.
    """
    x = mesh.vertices
    m = volume_lumped_masses(mesh)
    av = np.asarray(a_eval(x, y), dtype=float)
    dav = np.asarray(da_eval(x, y), dtype=float)
    if np.any(dav < 0):
        raise ValueError("da/dy must be nonnegative (monotone nonlinearity)")
    return m * av, sp.diags(m * dav).tocsr()
