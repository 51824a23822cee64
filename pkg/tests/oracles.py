"""Independent reference computations: dense loops over elements, written
without reusing the vectorized assembly of the package."""

import numpy as np


def tet_volume(p):
    a, b, c, d = p
    return np.dot(np.cross(b - a, c - a), d - a) / 6.0


def tri_area(p):
    a, b, c = p
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a))


def dense_stiffness(mesh, a0_nodal):
    """grad-grad by inverting the 4x4 affine map per tet, a0 by vertex quadrature."""
    n = mesh.n_vertices
    K = np.zeros((n, n))
    for tet in mesh.tets:
        p = mesh.vertices[tet]
        V = abs(tet_volume(p))
        C = np.linalg.inv(np.column_stack([np.ones(4), p]))  # rows: coefficients of lambda_i
        grads = C[1:, :].T  # (4, 3)
        for a in range(4):
            K[tet[a], tet[a]] += V / 4.0 * a0_nodal[tet[a]]
            for b in range(4):
                K[tet[a], tet[b]] += V * grads[a] @ grads[b]
    return K


def lumped_volume(mesh):
    m = np.zeros(mesh.n_vertices)
    for tet in mesh.tets:
        m[tet] += abs(tet_volume(mesh.vertices[tet])) / 4.0
    return m


def lumped_boundary(mesh):
    w = np.zeros(mesh.n_boundary)
    for face in mesh.boundary_faces:
        A = tri_area(mesh.vertices[face])
        for v in face:
            w[mesh.boundary_slot[v]] += A / 3.0
    return w


# 7-point degree-5 rule on the reference triangle (barycentric, weights sum to 1)
_a1, _a2 = (6 - np.sqrt(15)) / 21, (6 + np.sqrt(15)) / 21
TRI7_POINTS = np.array(
    [[1 / 3, 1 / 3, 1 / 3]]
    + [[_a1, _a1, 1 - 2 * _a1], [_a1, 1 - 2 * _a1, _a1], [1 - 2 * _a1, _a1, _a1]]
    + [[_a2, _a2, 1 - 2 * _a2], [_a2, 1 - 2 * _a2, _a2], [1 - 2 * _a2, _a2, _a2]]
)
TRI7_WEIGHTS = np.array([9 / 40] + [(155 - np.sqrt(15)) / 1200] * 3 + [(155 + np.sqrt(15)) / 1200] * 3)

# 4-point degree-2 rule on the reference tetrahedron
_ta, _tb = 0.1381966011250105, 0.5854101966249685
TET4_POINTS = np.array([[_tb, _ta, _ta, _ta], [_ta, _tb, _ta, _ta], [_ta, _ta, _tb, _ta], [_ta, _ta, _ta, _tb]])


def quadrature_boundary_mass(mesh, coeff):
    """int_Gamma c phi_i phi_j via the 7-point rule (exact for cubics)."""
    n = mesh.n_vertices
    B = np.zeros((n, n))
    for face in mesh.boundary_faces:
        A = tri_area(mesh.vertices[face])
        c = coeff[mesh.boundary_slot[face]]
        for lam, wq in zip(TRI7_POINTS, TRI7_WEIGHTS):
            cq = lam @ c
            for a in range(3):
                for b in range(3):
                    B[face[a], face[b]] += A * wq * cq * lam[a] * lam[b]
    return B


def quadrature_volume_load(mesh, f_nodal):
    out = np.zeros(mesh.n_vertices)
    for tet in mesh.tets:
        V = abs(tet_volume(mesh.vertices[tet]))
        for lam in TET4_POINTS:
            fq = lam @ f_nodal[tet]
            out[tet] += V / 4.0 * fq * lam
    return out


def dense_consistent_mass(mesh):
    n = mesh.n_vertices
    M = np.zeros((n, n))
    for tet in mesh.tets:
        V = abs(tet_volume(mesh.vertices[tet]))
        for lam in TET4_POINTS:
            M[np.ix_(tet, tet)] += V / 4.0 * np.outer(lam, lam)
    return M
