"""Semismooth Newton method for the bilinear Robin control problem.

Each outer iteration solves the state equation (Newton, warm-started), the
adjoint equation, classifies the boundary nodes into active and inactive
sets, fixes the step on the active set explicitly and obtains the inactive
part from an unconstrained quadratic problem solved by conjugate gradients.
All linear solves of one outer iteration share one factorization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .objective import (
    StatePoint,
    evaluate,
    hessvec,
    norm_w,
    objective_value,
    projection_residual,
)
from .pde import Discretization, NonConvergence, solve_eta, state_direction

log = logging.getLogger(__name__)


class CgBreakdown(ArithmeticError):
    """CG met a direction of nonpositive curvature."""


class CgMaxIterations(NonConvergence):
    pass


@dataclass(frozen=True)
class ActiveSets:
    """Boolean masks over the boundary nodes."""

    upper: np.ndarray  # y phi >= nu beta
    lower: np.ndarray  # y phi <= nu alpha
    inactive: np.ndarray

    @property
    def active(self):
        return self.upper | self.lower

    def sizes(self):
        return int(self.lower.sum()), int(self.upper.sum()), int(self.inactive.sum())


@dataclass
class SsnConfig:
    tol_delta: float = 1e-12
    max_outer: int = 30
    cg_tol: float = 1e-10
    cg_max: int = 500
    state_tol: float = 1e-12
    max_newton: int = 25

    def __post_init__(self):
        for name in ("tol_delta", "cg_tol", "state_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer", "cg_max", "max_newton"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class IterationRecord:
    j: int
    J: float
    delta: float
    newton: int
    cg: int
    n_active_alpha: int
    n_active_beta: int
    n_inactive: int
    F_inf: float


@dataclass
class SsnResult:
    u: np.ndarray
    history: list
    converged: bool
    point: Optional[StatePoint] = None
    steps: list = field(default_factory=list)

    @property
    def outer_iterations(self) -> int:
        """Number of Newton steps taken (records that carry a step size)."""
        return sum(1 for r in self.history if not math.isnan(r.delta))


def compute_active_sets(y_b, phi_b, nu, alpha, beta) -> ActiveSets:
    """Ties go to the active sets."""
    s = y_b * phi_b
    upper = s >= nu * beta
    lower = (s <= nu * alpha) & ~upper
    return ActiveSets(upper=upper, lower=lower, inactive=~(upper | lower))


def newton_rhs(u, y_b, phi_b, sets: ActiveSets, nu, alpha, beta) -> np.ndarray:
    """``-F(u)`` evaluated branch by branch on the given sets."""
    w = y_b * phi_b / nu - u
    w = np.where(sets.upper, beta - u, w)
    w = np.where(sets.lower, alpha - u, w)
    return w


def reduced_hess_apply(pt: StatePoint, sets: ActiveSets, v) -> np.ndarray:
    """Apply ``chi_I (1/nu) J''(u) chi_I`` to a boundary field."""
    vI = np.where(sets.inactive, v, 0.0)
    if not sets.inactive.any():
        return np.zeros_like(vI)
    return np.where(sets.inactive, hessvec(pt, vI) / pt.disc.problem.nu, 0.0)


def reduced_rhs(pt: StatePoint, sets: ActiveSets, w) -> np.ndarray:
    """``chi_I (w + (1/nu)[z phi + y eta])`` with ``z``, ``eta`` for the datum ``chi_A w``."""
    disc = pt.disc
    wa = np.where(sets.active, w, 0.0)
    if np.any(wa != 0.0):
        z = state_direction(pt.opfac, pt.y, wa)
        eta = solve_eta(pt.opfac, pt.y, pt.phi, z, wa)
        corr = (disc.trace(z) * pt.phi_b + pt.y_b * disc.trace(eta)) / disc.problem.nu
    else:
        corr = 0.0
    return np.where(sets.inactive, w + corr, 0.0)


def conjugate_gradient(apply, b, weights, tol=1e-10, maxiter=500):
    """CG for an operator self-adjoint in the inner product ``sum weights a b``.

    Returns ``(x, iterations)``.  Stops when ``|r|_w <= tol |b|_w``.
    """
    dot = lambda a, c: float(np.sum(weights * a * c))  # noqa: E731
    x = np.zeros_like(b)
    bnorm = math.sqrt(dot(b, b))
    if bnorm == 0.0:
        return x, 0
    r = b.copy()
    p = r.copy()
    rr = dot(r, r)
    for k in range(1, maxiter + 1):
        Ap = apply(p)
        pAp = dot(p, Ap)
        if not pAp > 0.0:
            raise CgBreakdown(f"nonpositive curvature {pAp:.3e} in CG iteration {k}")
        step = rr / pAp
        x += step * p
        r -= step * Ap
        rr_new = dot(r, r)
        if math.sqrt(rr_new) <= tol * bnorm:
            return x, k
        p = r + (rr_new / rr) * p
        rr = rr_new
    raise CgMaxIterations(f"CG did not reach tolerance {tol:g} in {maxiter} iterations")


def solve_reduced_qp(pt: StatePoint, sets: ActiveSets, w, cfg: SsnConfig = None):
    """Minimize the reduced quadratic model over the inactive set.

    Returns the zero-extended minimizer and the number of CG iterations.
    """
    cfg = cfg or SsnConfig()
    idx = np.flatnonzero(sets.inactive)
    v = np.zeros_like(np.asarray(w, dtype=float))
    if idx.size == 0:
        return v, 0
    b = reduced_rhs(pt, sets, w)[idx]
    weights = pt.disc.w[idx]

    def apply(p):
        full = np.zeros_like(v)
        full[idx] = p
        return reduced_hess_apply(pt, sets, full)[idx]

    x, its = conjugate_gradient(apply, b, weights, tol=cfg.cg_tol, maxiter=cfg.cg_max)
    v[idx] = x
    return v, its


def ssn_step(pt: StatePoint, cfg: SsnConfig = None):
    """One semismooth Newton step from ``pt``. Returns ``(step, sets, w, cg_count)``."""
    p = pt.disc.problem
    sets = compute_active_sets(pt.y_b, pt.phi_b, p.nu, p.alpha, p.beta)
    w = newton_rhs(pt.u, pt.y_b, pt.phi_b, sets, p.nu, p.alpha, p.beta)
    vI, cg = solve_reduced_qp(pt, sets, w, cfg)
    step = np.where(sets.active, w, vI)
    return step, sets, w, cg


def _record(j, pt, sets, delta, cg):
    p = pt.disc.problem
    F = projection_residual(p, pt.u, pt.y_b, pt.phi_b)
    na, nb, ni = sets.sizes()
    return IterationRecord(
        j=j,
        J=objective_value(pt.disc, pt.u, pt.y),
        delta=delta,
        newton=pt.report.iterations,
        cg=cg,
        n_active_alpha=na,
        n_active_beta=nb,
        n_inactive=ni,
        F_inf=float(np.max(np.abs(F), initial=0.0)),
    )


def ssn_solve(disc: Discretization, u0, cfg: SsnConfig = None) -> SsnResult:
    """Run the semismooth Newton iteration from ``u0``.

    ``u0`` is clamped into ``[alpha, beta]``.  Iterates until the relative
    step ``|u_{j+1} - u_j|_w / |u_{j+1}|_w`` drops below ``cfg.tol_delta``;
    the returned history ends with one extra record evaluated at the final
    control (no step, ``delta = nan``).
    """
    cfg = cfg or SsnConfig()
    p = disc.problem
    u = np.clip(np.asarray(u0, dtype=float), p.alpha, p.beta)
    history, steps = [], []
    y_prev = None
    converged = False
    for j in range(cfg.max_outer):
        pt = evaluate(disc, u, warm_start=y_prev, tol=cfg.state_tol, max_newton=cfg.max_newton,
                      nonnegative=False)
        step, sets, _, cg = ssn_step(pt, cfg)
        u_new = u + step
        num, den = norm_w(disc, step), norm_w(disc, u_new)
        delta = num / den if den > 0.0 else num  # absolute step when u_{j+1} = 0
        rec = _record(j, pt, sets, delta, cg)
        history.append(rec)
        steps.append(step)
        log.info("j=%d J=%.16e delta=%.2e newton=%d cg=%d", j, rec.J, delta, rec.newton, cg)
        u, y_prev = u_new, pt.y
        if delta <= cfg.tol_delta:
            converged = True
            break

    pt = evaluate(disc, u, warm_start=y_prev, tol=cfg.state_tol, max_newton=cfg.max_newton,
                  nonnegative=False)
    sets = compute_active_sets(pt.y_b, pt.phi_b, p.nu, p.alpha, p.beta)
    history.append(_record(len(history), pt, sets, math.nan, 0))
    result = SsnResult(u=u, history=history, converged=converged, point=pt, steps=steps)
    if not converged:
        raise NonConvergence(f"SSN did not converge in {cfg.max_outer} iterations", history=result)
    return result
