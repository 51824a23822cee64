"""Discrete state, adjoint and sensitivity equations.

The discrete state equation is

    K y + N(y) + B(u) y = b

with ``K`` the stiffness matrix of ``-Lap + a0``, ``N(y)`` the vertex
quadrature of ``a(x, y) - a(x, 0)``, ``B(u)`` the Robin coupling and
``b`` the load built from ``-a(x, 0)`` and ``g``.  The Robin coupling uses
the lumped boundary mass, the same weights as the control inner product, so
that nodal formulas for the gradient and Hessian are exact derivatives of
the discrete objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import fem
from .mesh import Mesh, volume_lumped_masses
from .problems import ProblemSpec

log = logging.getLogger(__name__)


class NonConvergence(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, report=None, history=None):
        super().__init__(message)
        self.report = report
        self.history = history


@dataclass
class NewtonReport:
    iterations: int
    residual: float
    converged: bool
    tolerance: float = 0.0
    residuals: list = field(default_factory=list)


class Discretization:
    """Control-independent assembled data for one problem on one mesh."""

    def __init__(self, problem: ProblemSpec, mesh: Mesh):
        self.problem = problem
        self.mesh = mesh
        x = mesh.vertices
        self.x = x
        self.K = fem.assemble_stiffness(mesh, problem.a0)
        self.M = fem.assemble_volume_mass(mesh)
        self.m = volume_lumped_masses(mesh)
        self.w = fem.assemble_lumped_boundary_mass(mesh)
        self.bnodes = mesh.boundary_nodes
        self.a_at_zero = np.asarray(problem.a_eval(x, np.zeros(len(x))), dtype=float)

        pts = mesh.vertices[mesh.boundary_faces]  # (nf, 3, 3)
        nrm = np.repeat(fem.boundary_face_normals(mesh)[:, None, :], 3, axis=1)
        g_faces = np.asarray(problem.g(pts.reshape(-1, 3), nrm.reshape(-1, 3)), dtype=float)
        self.rhs = fem.assemble_volume_load(mesh, -self.a_at_zero) + fem.assemble_boundary_load(
            mesh, g_faces.reshape(-1, 3)
        )
        self.target = None if problem.target is None else np.asarray(problem.target(x), dtype=float)

    # boundary <-> volume
    def trace(self, y):
        return np.asarray(y)[self.bnodes]

    def scatter(self, rb):
        """Volume vector of ``int_Gamma r phi_i`` under the lumped boundary rule."""
        out = np.zeros(self.mesh.n_vertices)
        out[self.bnodes] = self.w * rb
        return out

    def robin(self, u):
        d = np.zeros(self.mesh.n_vertices)
        d[self.bnodes] = self.w * u
        return sp.diags(d)

    # volume part of the objective
    def tracking_value(self, y) -> float:
        if self.target is not None:
            e = y - self.target
            return 0.5 * float(e @ (self.M @ e))
        return float(self.m @ self.problem.L_eval(self.x, y))

    def tracking_gradient(self, y):
        if self.target is not None:
            return self.M @ (y - self.target)
        return self.m * self.problem.dL_eval(self.x, y)

    def tracking_hessian_apply(self, y, z):
        if self.target is not None:
            return self.M @ z
        return self.m * self.problem.d2L_eval(self.x, y) * z

    def curvature_weights(self, y, phi):
        """Nodal ``phi * d2a/dy2(x, y)`` times the lumped volume weights."""
        return self.m * phi * self.problem.d2a_eval(self.x, y)

    def state_residual(self, u, y):
        nl = self.m * (self.problem.a_eval(self.x, y) - self.a_at_zero)
        return self.K @ y + nl + self.scatter(u * self.trace(y)) - self.rhs

    def linearize(self, u, y) -> "LinearizedOperator":
        _, J = fem.nonlinear_volume_terms(self.mesh, y, self.problem.a_eval, self.problem.da_eval)
        return LinearizedOperator(self.K + J + self.robin(u), self)


def discretize(problem: ProblemSpec, mesh: Mesh) -> Discretization:
    return Discretization(problem, mesh)


class LinearizedOperator:
    """Factorized ``K + J(y) + B(u)`` supporting forward and transpose solves."""

    def __init__(self, matrix, disc: Discretization = None, symmetric: bool = None):
        self.matrix = sp.csc_matrix(matrix)
        self.disc = disc
        if symmetric is None:
            symmetric = abs(self.matrix - self.matrix.T).max() == 0.0
        self.symmetric = symmetric
        # symmetric positive definite: minimum degree on A + A^T, no pivoting
        opts = dict(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                    options=dict(SymmetricMode=True)) if symmetric else {}
        try:
            self._lu = splu(self.matrix, **opts)
        except RuntimeError as exc:
            raise np.linalg.LinAlgError(f"factorization of the linearized operator failed: {exc}") from exc

    def solve(self, rhs):
        return self._lu.solve(np.asarray(rhs, dtype=float))

    def solve_transpose(self, rhs):
        return self._lu.solve(np.asarray(rhs, dtype=float), trans="T")


def _check_control(disc, u, nonnegative=True):
    u = np.asarray(u, dtype=float)
    if u.shape != (disc.mesh.n_boundary,):
        raise ValueError(f"control must have {disc.mesh.n_boundary} boundary values, got shape {u.shape}")
    if nonnegative and np.any(u < 0):
        raise ValueError("state equation requires a nonnegative Robin coefficient")
    return u


def solve_state(disc: Discretization, u, warm_start=None, tol: float = 1e-12, max_newton: int = 25,
                abs_floor: float = 1e-14, nonnegative: bool = True):
    """Newton's method for the discrete state equation.

    Stops once the max-norm of the residual is below
    ``max(tol * |b|_inf, abs_floor)``.  Every iterate, including the
    accepted one, is factorized exactly once, so the returned operator is
    the exact linearization at the returned state and the iteration count
    equals the number of factorizations.

    With ``nonnegative=False`` the sign check on ``u`` is skipped; semismooth
    Newton iterates may dip below zero on the inactive set, and the discrete
    problem stays well posed for small negative excursions.
    """
    u = _check_control(disc, u, nonnegative)
    y = np.zeros(disc.mesh.n_vertices) if warm_start is None else np.array(warm_start, dtype=float)
    target = max(tol * np.max(np.abs(disc.rhs), initial=0.0), abs_floor)
    residuals = []
    for it in range(1, max_newton + 1):
        res = disc.state_residual(u, y)
        rn = float(np.max(np.abs(res)))
        residuals.append(rn)
        op = disc.linearize(u, y)
        if rn <= target:
            return y, NewtonReport(it, rn, True, target, residuals), op
        y = y - op.solve(res)
    rn = float(np.max(np.abs(disc.state_residual(u, y))))
    report = NewtonReport(max_newton, rn, False, target, residuals)
    raise NonConvergence(f"state Newton did not converge in {max_newton} iterations (residual {rn:.3e})",
                         report=report)


def solve_linearized(opfac: LinearizedOperator, rhs_volume=None, rhs_boundary=None):
    """Solve ``(K + J + B) z = rhs_volume + scatter(rhs_boundary)``."""
    disc = opfac.disc
    rhs = np.zeros(disc.mesh.n_vertices)
    if rhs_volume is not None:
        rhs += rhs_volume
    if rhs_boundary is not None:
        rhs += disc.scatter(rhs_boundary)
    return opfac.solve(rhs)


def solve_linearized_transpose(opfac: LinearizedOperator, rhs_volume=None, rhs_boundary=None):
    disc = opfac.disc
    rhs = np.zeros(disc.mesh.n_vertices)
    if rhs_volume is not None:
        rhs += rhs_volume
    if rhs_boundary is not None:
        rhs += disc.scatter(rhs_boundary)
    return opfac.solve_transpose(rhs)


def solve_adjoint(opfac: LinearizedOperator, y):
    """Adjoint state: transpose solve with the objective's state derivative."""
    return opfac.solve_transpose(opfac.disc.tracking_gradient(y))


def state_direction(opfac: LinearizedOperator, y, v):
    """``G'(u) v``: linearized state for the control direction ``v``."""
    disc = opfac.disc
    return solve_linearized(opfac, rhs_boundary=-v * disc.trace(y))


def solve_second_sensitivity(opfac: LinearizedOperator, y, z1, z2, v1, v2):
    """``G''(u)(v1, v2)`` from the two first-order sensitivities ``z1``, ``z2``."""
    disc = opfac.disc
    d2a = disc.problem.d2a_eval(disc.x, y)
    rhs_v = -disc.m * d2a * z1 * z2
    rhs_b = -(v1 * disc.trace(z2) + v2 * disc.trace(z1))
    return solve_linearized(opfac, rhs_v, rhs_b)


def solve_eta(opfac: LinearizedOperator, y, phi, z, v):
    """Adjoint sensitivity ``Phi'(u) v`` given ``z = G'(u) v``."""
    disc = opfac.disc
    rhs_v = disc.tracking_hessian_apply(y, z) - disc.curvature_weights(y, phi) * z
    rhs_b = -v * disc.trace(phi)
    return solve_linearized_transpose(opfac, rhs_v, rhs_b)
