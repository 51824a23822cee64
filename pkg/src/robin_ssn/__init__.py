"""Semismooth Newton solver for bilinear Robin boundary control of semilinear
elliptic equations on the unit cube."""

from .mesh import Mesh, build_unit_cube_mesh, boundary_area_weights
from .problems import ProblemSpec, paper_example, manufactured
from .pde import Discretization, discretize, solve_state, NonConvergence
from .objective import StatePoint, evaluate, objective_value, hessvec
from .ssn import SsnConfig, SsnResult, IterationRecord, ssn_solve

__all__ = [
    "Mesh",
    "build_unit_cube_mesh",
    "boundary_area_weights",
    "ProblemSpec",
    "paper_example",
    "manufactured",
    "Discretization",
    "discretize",
    "solve_state",
    "NonConvergence",
    "StatePoint",
    "evaluate",
    "objective_value",
    "hessvec",
    "SsnConfig",
    "SsnResult",
    "IterationRecord",
    "ssn_solve",
]
