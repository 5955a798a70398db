"""dG-in-time / FEM-in-space stepper for d_t u + d_t^{1-alpha} A u = f.

With a fixed spatial space the step system couples the time matrices to the
mass and stiffness operators through Kronecker products,

    (G (x) M + H^{n,0} (x) A) U^n = F^n - sum_{ell<n} (H^{n,n-ell} (x) A) U^ell
                                   + coupling,

an rP x rP dense solve per step, factorised once on uniform meshes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .coefficients import CoeffSet, g_matrix
from .dg_ode import DGSolution
from .fem1d import FemSpace1D, SpatialOperators, assemble, fem_values, l2_project, load_vector
from .mesh import TimeMesh
from .polylib import gauss_legendre, legendre_table
from .reconstruction import raise_coefficients

__all__ = [
    "PdeProblem",
    "PdeDGSolution",
    "solve_pde",
    "march_blocks",
    "pde_load",
    "eval_pde_solution",
    "l2_norm_error",
    "l2_interval_error",
    "reconstruct_pde",
    "jump_norms",
]


@dataclass(frozen=True)
class PdeProblem:
    alpha: float
    L: float
    u0: Callable
    f: Callable | None  # f(x, t), may be None for zero forcing
    T: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha={self.alpha} out of (0, 1]")
        if self.L <= 0.0 or self.T <= 0.0:
            raise ValueError("need L > 0 and T > 0")


class PdeDGSolution(DGSolution):
    """dG solution with vector-valued Legendre coefficients (N, r, P)."""

    def __init__(self, mesh, coeffs, u0_coeffs, space, max_residual=0.0):
        super().__init__(mesh, coeffs, u0_coeffs, max_residual)
        self.space = space


def pde_load(problem: PdeProblem, mesh: TimeMesh, space: FemSpace1D,
             n: int, r: int, extra: int = 4) -> np.ndarray:
    """Block moments F^{ni}_p = int <f(., t), phi_p> psi_i dt, shape (r, P)."""
    if problem.f is None:
        return np.zeros((r, space.P))
    rule = gauss_legendre(r + extra)
    t = mesh.affine(n, rule.nodes)
    table = legendre_table(r, rule.nodes)[0]
    loads = np.stack([load_vector(space, lambda x: problem.f(x, tm)) for tm in t])
    return 0.5 * mesh.step(n) * np.einsum("im,m,mp->ip", table, rule.weights, loads)


def march_blocks(mesh: TimeMesh, r: int, coeffs: CoeffSet, M: np.ndarray,
                 A: np.ndarray, U0: np.ndarray, load) -> tuple[np.ndarray, float]:
    """Core Kronecker-step march over the mesh.

    ``load(n)`` supplies the (r, P) moment block of step n.  Returns the
    coefficient blocks (N, r, P) and the worst relative step residual.
    """
    P = M.shape[0]
    N = mesh.N
    alpha = coeffs.alpha
    G = g_matrix(r)
    psi0 = (-1.0) ** np.arange(r)
    U = np.zeros((N, r, P))
    W = np.zeros((N, r, P))  # A @ U^{nj}, reused across history sums
    uniform = coeffs.h_unit is not None
    lu = None
    if uniform:
        k = mesh.step(1)
        lu = lu_factor(np.kron(G, M) + k ** alpha * np.kron(coeffs.h_unit[0], A))
    max_res = 0.0

    for n in range(1, N + 1):
        rhs = load(n).copy()
        prev = U0 if n == 1 else U[n - 2].sum(axis=0)
        rhs += psi0[:, None] * (M @ prev)[None, :]
        if n >= 2:
            if uniform:
                hist = np.einsum("lij,ljp->ip", coeffs.h_unit[1:n], W[n - 2::-1])
                hist *= k ** alpha
            else:
                hist = np.einsum("lij,ljp->ip", coeffs.history_row(n), W[: n - 1])
            rhs -= hist
        if uniform:
            h0 = k ** alpha * coeffs.h_unit[0]
        else:
            h0 = coeffs.h0_for_step(n)
            lu = lu_factor(np.kron(G, M) + np.kron(h0, A))
        U[n - 1] = lu_solve(lu, rhs.ravel()).reshape(r, P)
        W[n - 1] = U[n - 1] @ A
        act = G @ (U[n - 1] @ M) + h0 @ W[n - 1]
        res = np.abs(act - rhs).max() / max(np.abs(rhs).max(), 1e-300)
        max_res = max(max_res, res)
    return U, max_res


def solve_pde(problem: PdeProblem, mesh: TimeMesh, r: int, space: FemSpace1D,
              coeffs: CoeffSet | None = None,
              ops: SpatialOperators | None = None) -> PdeDGSolution:
    """March the coupled space-time scheme; returns coefficients (N, r, P)."""
    if abs(mesh.T - problem.T) > 1e-12 * problem.T:
        raise ValueError("mesh final time does not match the problem")
    coeffs = coeffs or CoeffSet.for_mesh(problem.alpha, r, mesh)
    if coeffs.alpha != problem.alpha or coeffs.r != r:
        raise ValueError("coefficient set does not match (alpha, r)")
    ops = ops or assemble(space)
    U0 = l2_project(space, problem.u0, ops)
    U, max_res = march_blocks(mesh, r, coeffs, ops.mass, ops.stiffness, U0,
                              lambda n: pde_load(problem, mesh, space, n, r))
    return PdeDGSolution(mesh, U, U0, space, max_res)


def eval_pde_solution(sol: PdeDGSolution, space: FemSpace1D, x, t: float,
                      side: str = "left") -> np.ndarray:
    """Point values u(x, t) with one-sided limits at the time levels."""
    if t == 0.0 and side == "left":
        coeff = np.asarray(sol.u0)
    else:
        n = sol.mesh.locate(t, side)
        tau = sol.mesh.inverse_affine(n, t)
        coeff = sol.interval_values(n, tau)[0]
    return fem_values(space, coeff, x)


def _time_coeff(sol: DGSolution, t: float, side: str) -> np.ndarray:
    if t == 0.0 and side == "left":
        return np.asarray(sol.u0)
    n = sol.mesh.locate(t, side)
    return sol.interval_values(n, sol.mesh.inverse_affine(n, t))[0]


def l2_norm_error(sol: PdeDGSolution, space: FemSpace1D, reference: Callable,
                  t: float, side: str = "left", extra: int = 4) -> float:
    """|| U(., t) - reference(., t) ||_{L2(0, L)} by per-element Gauss."""
    coeff = _time_coeff(sol, t, side)
    return _coeff_l2_error(space, coeff, reference, t, extra)


def l2_interval_error(sol: DGSolution, space: FemSpace1D, reference: Callable,
                      n: int, tau: float, t: float | None = None,
                      extra: int = 4) -> float:
    """L2 error of the interval-n polynomial at reference coordinate tau;
    at tau = -+1 this evaluates the one-sided limits from inside the
    interval, where the error of the discontinuous solution peaks."""
    coeff = sol.interval_values(n, tau)[0]
    t = sol.mesh.affine(n, tau) if t is None else t
    return _coeff_l2_error(space, coeff, reference, t, extra)


def _coeff_l2_error(space: FemSpace1D, coeff: np.ndarray, reference: Callable,
                    t: float, extra: int = 4) -> float:
    rule = gauss_legendre(space.degree + extra)
    jac = 0.5 * space.h
    total = 0.0
    for e in range(space.elements):
        xq = (e + 0.5 * (rule.nodes + 1.0)) * space.h
        diff = fem_values(space, coeff, xq) - np.asarray(reference(xq, t))
        total += jac * float(diff ** 2 @ rule.weights)
    return float(np.sqrt(total))


def reconstruct_pde(sol: PdeDGSolution) -> PdeDGSolution:
    """Degree-raised reconstruction applied to each spatial coefficient."""
    N = sol.mesh.N
    jumps = np.stack([sol.jump(n) for n in range(1, N + 1)])
    out = PdeDGSolution(sol.mesh, raise_coefficients(sol.coeffs, jumps),
                        sol.u0, sol.space)
    return out


def jump_norms(sol: PdeDGSolution, ops: SpatialOperators) -> np.ndarray:
    """L2 norms of the solution jumps entering each interval."""
    out = np.empty(sol.mesh.N)
    for n in range(1, sol.mesh.N + 1):
        d = sol.jump(n)
        out[n - 1] = np.sqrt(max(float(d @ ops.mass @ d), 0.0))
    return out
