"""Mixed finite elements for Darcy and Darcy-Forchheimer flow in a domain cut
by a single reduced (one-dimensional) fracture."""

from .assembly import SaddleSystem, assemble_forchheimer, assemble_linear, residual
from .mesh import Mesh, MeshError, Rectangle, build_mesh, refine
from .mixed_space import DiscreteState, MixedSpace, build_single_domain_space, build_space
from .problem_data import Law, ProblemData, ScalarField, StructuralError, TensorField, validate
from .solver import SolveReport, SolverOptions, solve_linear_saddle, solve_picard, solve_uzawa

__version__ = "0.1.0"

__all__ = [
    "DiscreteState",
    "Law",
    "Mesh",
    "MeshError",
    "MixedSpace",
    "ProblemData",
    "Rectangle",
    "SaddleSystem",
    "ScalarField",
    "SolveReport",
    "SolverOptions",
    "StructuralError",
    "TensorField",
    "assemble_forchheimer",
    "assemble_linear",
    "build_mesh",
    "build_single_domain_space",
    "build_space",
    "refine",
    "residual",
    "solve_linear_saddle",
    "solve_picard",
    "solve_uzawa",
    "validate",
]
