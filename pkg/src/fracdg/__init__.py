"""Discontinuous Galerkin time stepping for fractional sub-diffusion problems.

The package evaluates the weakly singular memory coefficients of the scheme
to machine precision, steps scalar and 1D space-time problems, post-processes
solutions with the right-Radau reconstruction, and provides high-accuracy
reference solutions for convergence studies.
"""

from .coefficients import (
    CoeffSet,
    g_matrix,
    h0_matrix,
    h1_matrix,
    h_matrix,
    h_matrix_parts_form,
    k_matrix,
    oracle_h,
    uniform_history,
)
from .dg_ode import DGSolution, ScalarProblem, error_table, eval_solution, f_moments, solve_ode
from .dg_pde import (
    PdeDGSolution,
    PdeProblem,
    eval_pde_solution,
    jump_norms,
    l2_norm_error,
    pde_load,
    reconstruct_pde,
    solve_pde,
)
from .fem1d import FemSpace1D, SpatialOperators, assemble, l2_project, load_vector
from .mesh import TimeMesh, affine_map, make_mesh
from .polylib import QuadRule, RadauPoints, gauss_jacobi, gauss_legendre, legendre_values, radau_points
from .reconstruction import ReconstructedSolution, recon_max_error, reconstruct
from .reference import ContourRule, PdeRefParams, erfcx, ode_reference, pde_reference, pde_transform

__version__ = "0.1.0"
