"""Reduced objective, gradient and second derivatives.

Boundary inner products use the lumped weights ``w``: for two boundary
fields ``<a, b>_w = sum_i w_i a_i b_i``.  The gradient is returned as the
nodal representative ``d`` with ``J'(u) v = <d, v>_w``; the same convention
holds for Hessian-vector products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .pde import (
    Discretization,
    LinearizedOperator,
    NewtonReport,
    solve_adjoint,
    solve_eta,
    solve_state,
    state_direction,
)


@dataclass
class StatePoint:
    """State, adjoint and the shared factorization at a control ``u``."""

    u: np.ndarray
    y: np.ndarray
    phi: np.ndarray
    opfac: LinearizedOperator
    report: NewtonReport

    @property
    def disc(self) -> Discretization:
        return self.opfac.disc

    @property
    def y_b(self):
        return self.disc.trace(self.y)

    @property
    def phi_b(self):
        return self.disc.trace(self.phi)


def evaluate(disc: Discretization, u, warm_start=None, tol=1e-12, max_newton=25,
             nonnegative=True) -> StatePoint:
    y, report, opfac = solve_state(disc, u, warm_start=warm_start, tol=tol, max_newton=max_newton,
                                   nonnegative=nonnegative)
    phi = solve_adjoint(opfac, y)
    return StatePoint(np.asarray(u, dtype=float), y, phi, opfac, report)


def inner_w(disc: Discretization, a, b) -> float:
    return float(np.sum(disc.w * a * b))


def norm_w(disc: Discretization, a) -> float:
    return float(np.sqrt(inner_w(disc, a, a)))


def objective_value(disc: Discretization, u, y) -> float:
    """J(u) = tracking term + (nu/2) sum_i w_i u_i^2."""
    u = np.asarray(u, dtype=float)
    return disc.tracking_value(y) + 0.5 * disc.problem.nu * float(disc.w @ u**2)


def reduced_objective(disc: Discretization, u, warm_start=None) -> float:
    y, _, _ = solve_state(disc, u, warm_start=warm_start, nonnegative=False)
    return objective_value(disc, u, y)


def gradient_representative(problem, u, y_b, phi_b):
    """Nodal ``nu u - y phi`` on the boundary."""
    return problem.nu * np.asarray(u) - y_b * phi_b


def hessvec(pt: StatePoint, v) -> np.ndarray:
    """Nodal representative of ``J''(u) v``: ``nu v - (phi z + y eta)``."""
    disc = pt.disc
    z = state_direction(pt.opfac, pt.y, v)
    eta = solve_eta(pt.opfac, pt.y, pt.phi, z, v)
    return disc.problem.nu * v - (pt.phi_b * disc.trace(z) + pt.y_b * disc.trace(eta))


def second_derivative_form(pt: StatePoint, v1, v2, z1: Optional[np.ndarray] = None,
                           z2: Optional[np.ndarray] = None) -> float:
    """``J''(u)(v1, v2)`` from the state sensitivities alone (no adjoint sensitivity).

    Volume term ``int (d2L - phi d2a) z1 z2``, boundary term
    ``-int (v1 z2 + v2 z1) phi`` and the Tichonov term ``nu int v1 v2``.
    """
    disc = pt.disc
    if z1 is None:
        z1 = state_direction(pt.opfac, pt.y, v1)
    if z2 is None:
        z2 = state_direction(pt.opfac, pt.y, v2)
    vol = float(z1 @ disc.tracking_hessian_apply(pt.y, z2)) - float(
        np.sum(disc.curvature_weights(pt.y, pt.phi) * z1 * z2)
    )
    bnd = -inner_w(disc, v1 * disc.trace(z2) + v2 * disc.trace(z1), pt.phi_b)
    return vol + bnd + disc.problem.nu * inner_w(disc, v1, v2)


def projection_residual(problem, u, y_b, phi_b) -> np.ndarray:
    """F(u) = u - clamp(y phi / nu, alpha, beta), nodally."""
    return np.asarray(u) - np.clip(y_b * phi_b / problem.nu, problem.alpha, problem.beta)
