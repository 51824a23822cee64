"""Numerical checks of optimality: first-order residual, strict
complementarity, second-order coercivity and finite-difference audits of
the derivatives."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .objective import (
    StatePoint,
    evaluate,
    gradient_representative,
    hessvec,
    inner_w,
    objective_value,
    projection_residual,
    second_derivative_form,
)
from .pde import Discretization, solve_state


@dataclass
class OptimalityReport:
    F_sup: float
    biactive_measure: float
    eps_sc: float
    kappa: float
    tau: float
    subspace_size: int

    def to_dict(self):
        return asdict(self)


def default_eps_sc(nu, alpha, beta):
    return 1e-8 * nu * max(abs(alpha), abs(beta), 1.0)


def biactive_measure(weights, u, y_b, phi_b, nu, alpha, beta, eps_sc, bound_tol=1e-10) -> float:
    """Lumped measure of nodes sitting on a bound with a vanishing gradient."""
    u = np.asarray(u)
    on_bound = (np.abs(u - alpha) <= bound_tol) | (np.abs(u - beta) <= bound_tol)
    flat = np.abs(nu * u - y_b * phi_b) <= eps_sc
    return float(np.sum(weights[on_bound & flat]))


def extended_cone_mask(pt: StatePoint, tau: float) -> np.ndarray:
    """Nodes where ``|nu u - y phi| <= tau``: the support of the extended critical cone."""
    nu = pt.disc.problem.nu
    return np.abs(nu * pt.u - pt.y_b * pt.phi_b) <= tau


def lanczos_smallest(apply, weights, n, iterations=50, seed=0):
    """Smallest eigenvalue of an operator self-adjoint in ``sum weights a b``.

    Lanczos tridiagonalization with full reorthogonalization; exact once
    ``iterations >= n``.
    """
    dot = lambda a, b: float(np.sum(weights * a * b))  # noqa: E731
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(n)
    q /= np.sqrt(dot(q, q))
    Q = [q]
    alphas, betas = [], []
    for k in range(min(iterations, n)):
        r = apply(Q[-1])
        a = dot(Q[-1], r)
        alphas.append(a)
        for qi in Q:  # full reorthogonalization (twice for stability)
            r -= dot(qi, r) * qi
        for qi in Q:
            r -= dot(qi, r) * qi
        b = np.sqrt(dot(r, r))
        if k == min(iterations, n) - 1 or b <= 1e-13 * max(1.0, abs(a)):
            break
        betas.append(b)
        Q.append(r / b)
    if len(alphas) == 1:
        return alphas[0]
    vals = eigh_tridiagonal(np.array(alphas), np.array(betas[: len(alphas) - 1]), eigvals_only=True)
    return float(vals[0])


def coercivity_estimate(pt: StatePoint, tau: float = 1e-6, iterations: int = 50, seed: int = 0) -> float:
    """Smallest Rayleigh quotient of ``J''(u)`` on the span of nodes near the
    switching surface, in the lumped L2(Gamma) inner product."""
    mask = extended_cone_mask(pt, tau)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError(f"no boundary node satisfies |nu u - y phi| <= tau={tau:g}; coercivity undefined")
    weights = pt.disc.w[idx]
    nb = pt.disc.mesh.n_boundary

    def apply(v):
        full = np.zeros(nb)
        full[idx] = v
        return hessvec(pt, full)[idx]

    return lanczos_smallest(apply, weights, idx.size, iterations=iterations, seed=seed)


def optimality_report(pt: StatePoint, eps_sc=None, tau=1e-6, iterations=50) -> OptimalityReport:
    p = pt.disc.problem
    if eps_sc is None:
        eps_sc = default_eps_sc(p.nu, p.alpha, p.beta)
    F = projection_residual(p, pt.u, pt.y_b, pt.phi_b)
    size = int(extended_cone_mask(pt, tau).sum())
    kappa = coercivity_estimate(pt, tau, iterations) if size else float("nan")
    return OptimalityReport(
        F_sup=float(np.max(np.abs(F), initial=0.0)),
        biactive_measure=biactive_measure(pt.disc.w, pt.u, pt.y_b, pt.phi_b, p.nu, p.alpha, p.beta, eps_sc),
        eps_sc=float(eps_sc),
        kappa=float(kappa),
        tau=float(tau),
        subspace_size=size,
    )


@dataclass
class FdAudit:
    t_grid: np.ndarray
    first: np.ndarray  # (n_directions, n_t) first-order Taylor remainders
    second: np.ndarray  # (n_directions, n_t) second-order remainders
    first_order: np.ndarray  # fitted slope per direction
    second_order: np.ndarray


def _slopes(t, rem):
    out = []
    for row in rem:
        ok = row > 0
        if ok.sum() < 2:
            out.append(np.nan)
        else:
            out.append(np.polyfit(np.log(t[ok]), np.log(row[ok]), 1)[0])
    return np.array(out)


def fd_derivative_audit(disc: Discretization, u, directions, t_grid) -> FdAudit:
    """Taylor remainders of the reduced objective along the given directions.

    ``first = |J(u+tv) - J(u) - t J'(u)v|`` and
    ``second = |J(u+tv) - J(u) - t J'(u)v - t^2/2 J''(u)v^2|``; the fitted
    log-log slopes should be close to 2 and 3.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    pt = evaluate(disc, u, nonnegative=False)
    J0 = objective_value(disc, pt.u, pt.y)
    p = disc.problem
    grad = gradient_representative(p, pt.u, pt.y_b, pt.phi_b)
    first = np.empty((len(directions), len(t_grid)))
    second = np.empty_like(first)
    for i, v in enumerate(directions):
        v = np.asarray(v, dtype=float)
        dJ = inner_w(disc, grad, v)
        d2J = second_derivative_form(pt, v, v)
        for k, t in enumerate(t_grid):
            ut = pt.u + t * v
            y, _, _ = solve_state(disc, ut, warm_start=pt.y, nonnegative=False)
            Jt = objective_value(disc, ut, y)
            first[i, k] = abs(Jt - J0 - t * dJ)
            second[i, k] = abs(Jt - J0 - t * dJ - 0.5 * t * t * d2J)
    return FdAudit(t_grid, first, second, _slopes(t_grid, first), _slopes(t_grid, second))
