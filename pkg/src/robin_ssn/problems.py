"""Problem data: the nonlinearity, the objective integrand and the bounds.

Evaluators act on arrays: ``x`` has shape ``(N, 3)`` and ``y`` shape ``(N,)``.
The boundary datum ``g`` takes points and the outward unit normals of the
face they are evaluated on, ``g(x, normal)``, so that data involving normal
derivatives may jump across cube edges.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _zero_g(x, normal):
    return np.zeros(len(x))


@dataclass(frozen=True)
class ProblemSpec:
    a_eval: Evaluator
    da_eval: Evaluator
    d2a_eval: Evaluator
    L_eval: Evaluator
    dL_eval: Evaluator
    d2L_eval: Evaluator
    nu: float
    alpha: float
    beta: float
    g: Callable[[np.ndarray, np.ndarray], np.ndarray] = _zero_g
    a0: float | Callable[[np.ndarray], np.ndarray] = 1.0
    # When set, L(x, y) = (y - target(x))**2 / 2 and the volume part of the
    # objective is evaluated with the consistent mass matrix on the P1
    # interpolant of the target instead of vertex quadrature.
    target: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"

    def __post_init__(self):
        if not (self.nu > 0 and np.isfinite(self.nu)):
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not (0 <= self.alpha < self.beta < np.inf):
            raise ValueError(
                f"bounds must satisfy 0 <= alpha < beta < inf, got alpha={self.alpha}, beta={self.beta}"
            )

    def with_parameters(self, nu=None, alpha=None, beta=None) -> "ProblemSpec":
        from dataclasses import replace

        return replace(
            self,
            nu=self.nu if nu is None else nu,
            alpha=self.alpha if alpha is None else alpha,
            beta=self.beta if beta is None else beta,
        )


def _cubic(x, y):
    return y**3


def _paper_source(x):
    return np.sin(2 * np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1]) * np.cos(3 * np.pi * x[:, 2])


def paper_target(x):
    return -512.0 * np.prod(x * (1.0 - x), axis=1)


def paper_example(nu: float = 0.01, alpha: float = 0.0, beta: float = 1.0) -> ProblemSpec:
    """-Laplace(y) + y + y^3 = sin(2 pi x1) sin(pi x2) cos(3 pi x3), homogeneous
    Robin datum, tracking of ``-512 prod x_i (1 - x_i)``."""
    return ProblemSpec(
        a_eval=lambda x, y: y**3 - _paper_source(x),
        da_eval=lambda x, y: 3.0 * y**2,
        d2a_eval=lambda x, y: 6.0 * y,
        L_eval=lambda x, y: 0.5 * (y - paper_target(x)) ** 2,
        dL_eval=lambda x, y: y - paper_target(x),
        d2L_eval=lambda x, y: np.ones_like(y),
        nu=nu,
        alpha=alpha,
        beta=beta,
        g=_zero_g,
        a0=1.0,
        target=paper_target,
        name="paper-example",
    )


@dataclass(frozen=True)
class ClosedForm:
    """A smooth function on the cube with its gradient and Laplacian."""

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    laplacian: Callable[[np.ndarray], np.ndarray]


ZERO = ClosedForm(
    value=lambda x: np.zeros(len(x)),
    gradient=lambda x: np.zeros((len(x), 3)),
    laplacian=lambda x: np.zeros(len(x)),
)

LINEAR_X1 = ClosedForm(
    value=lambda x: x[:, 0].copy(),
    gradient=lambda x: np.column_stack([np.ones(len(x)), np.zeros(len(x)), np.zeros(len(x))]),
    laplacian=lambda x: np.zeros(len(x)),
)

X1_PLUS_X2SQ = ClosedForm(
    value=lambda x: x[:, 0] + x[:, 1] ** 2,
    gradient=lambda x: np.column_stack([np.ones(len(x)), 2.0 * x[:, 1], np.zeros(len(x))]),
    laplacian=lambda x: np.full(len(x), 2.0),
)


@dataclass(frozen=True)
class ManufacturedCase:
    problem: ProblemSpec
    y_star: ClosedForm
    u_star: float
    source: Callable[[np.ndarray], np.ndarray]


def manufactured(y_star: ClosedForm, u_star: float = 1.0, nu: float = 0.01) -> ManufacturedCase:
    """Problem whose state for the fixed control ``u_star`` is exactly ``y_star``.

    Uses ``a(x, y) = y^3 - c(x)`` with ``c = -Lap y* + y* + y*^3`` and the
    Robin datum ``g = dy*/dn + u* y*``.  The objective tracks ``y*`` itself.
    """
    u_star = float(u_star)
    if u_star < 0:
        raise ValueError("manufactured control must be nonnegative")

    def source(x):
        ys = y_star.value(x)
        return -y_star.laplacian(x) + ys + ys**3

    def g(x, normal):
        return np.einsum("ij,ij->i", y_star.gradient(x), normal) + u_star * y_star.value(x)

    problem = ProblemSpec(
        a_eval=lambda x, y: y**3 - source(x),
        da_eval=lambda x, y: 3.0 * y**2,
        d2a_eval=lambda x, y: 6.0 * y,
        L_eval=lambda x, y: 0.5 * (y - y_star.value(x)) ** 2,
        dL_eval=lambda x, y: y - y_star.value(x),
        d2L_eval=lambda x, y: np.ones_like(y),
        nu=nu,
        alpha=0.0,
        beta=max(1.0, 2.0 * u_star),
        g=g,
        a0=1.0,
        name="manufactured",
    )
    return ManufacturedCase(problem=problem, y_star=y_star, u_star=u_star, source=source)
