"""dG time stepping for the scalar fractional ODE u' + lam d_t^{1-alpha} u = f.

On interval n the solution is U(t) = sum_j U^{nj} P_{j-1}(tau(t)); each step
solves the r x r system

    (G + lam H^{n,0}) U^n = F^n - lam sum_{ell<n} H^{n,n-ell} U^ell + coupling,

where the coupling is psi(0) u0 on the first interval and K U^{n-1} after.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .coefficients import CoeffSet, g_matrix
from .mesh import TimeMesh
from .polylib import gauss_legendre, legendre_table, radau_points

__all__ = [
    "ScalarProblem",
    "DGSolution",
    "ErrorTable",
    "f_moments",
    "solve_ode",
    "eval_solution",
    "error_table",
]


@dataclass(frozen=True)
class ScalarProblem:
    alpha: float
    lam: float
    f: Callable | None
    u0: float
    T: float

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha={self.alpha} out of (0, 1]")
        if self.lam < 0.0:
            raise ValueError(f"need lambda >= 0, got {self.lam}")
        if self.T <= 0.0:
            raise ValueError(f"need T > 0, got {self.T}")


class DGSolution:
    """Piecewise-Legendre function on a time mesh.

    ``coeffs[n-1, j-1]`` is the coefficient of P_{j-1} on interval n; the
    trailing axis may carry extra (e.g. spatial) dimensions.
    """

    def __init__(self, mesh: TimeMesh, coeffs: np.ndarray, u0, max_residual: float = 0.0):
        if coeffs.shape[0] != mesh.N:
            raise ValueError("coefficient rows must match the mesh")
        self.mesh = mesh
        self.coeffs = coeffs
        self.u0 = u0
        self.max_residual = max_residual

    @property
    def r(self) -> int:
        return self.coeffs.shape[1]

    def interval_values(self, n: int, taus) -> np.ndarray:
        """Values on interval n at reference coordinates taus."""
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        table = legendre_table(self.r, taus)[0]
        return np.einsum("jm,j...->m...", table, self.coeffs[n - 1])

    def end_value(self, n: int):
        """Left limit at t_n (n >= 1); at n = 0 the initial value."""
        if n == 0:
            return self.u0
        return self.coeffs[n - 1].sum(axis=0)

    def start_value(self, n: int):
        """Right limit at t_{n-1} for interval n."""
        signs = (-1.0) ** np.arange(self.r)
        return np.einsum("j,j...->...", signs, self.coeffs[n - 1])

    def jump(self, n: int):
        """U^{n-1}_+ - U^{n-1}_-, the jump entering interval n."""
        return self.start_value(n) - self.end_value(n - 1)

    def value(self, t: float, side: str = "left"):
        """Point value with one-sided limits at the mesh points."""
        if t == 0.0:
            if side == "left":
                return self.u0
        elif t == self.mesh.T and side == "right":
            raise ValueError("no right limit at the final time")
        n = self.mesh.locate(t, side)
        return self.interval_values(n, self.mesh.inverse_affine(n, t))[0]

    __call__ = value


@dataclass(frozen=True)
class ErrorTable:
    """Pointwise errors E^n_j at the shifted Radau points t^*_{nj} and their
    weighted maxima max_n (t^*_{nj})^(r-alpha) E^n_j."""

    tstar: np.ndarray   # (N, r+1)
    errors: np.ndarray  # (N, r+1)
    weighted_max: np.ndarray  # (r+1,)


def f_moments(f: Callable | None, mesh: TimeMesh, n: int, r: int, extra: int = 4) -> np.ndarray:
    """Load moments F^{ni} = int_{I_n} f psi_{ni} dt via Gauss-Legendre."""
    if f is None:
        return np.zeros(r)
    rule = gauss_legendre(r + extra)
    t = mesh.affine(n, rule.nodes)
    vals = np.asarray(f(t), dtype=float)
    table = legendre_table(r, rule.nodes)[0]
    return 0.5 * mesh.step(n) * (table @ (rule.weights * vals))


def solve_ode(problem: ScalarProblem, mesh: TimeMesh, r: int,
              coeffs: CoeffSet | None = None) -> DGSolution:
    """March the dG scheme over the mesh and return the solution."""
    if abs(mesh.T - problem.T) > 1e-12 * problem.T:
        raise ValueError("mesh final time does not match the problem")
    lam = problem.lam
    if coeffs is None and lam != 0.0:
        coeffs = CoeffSet.for_mesh(problem.alpha, r, mesh)
    if coeffs is not None and (coeffs.alpha != problem.alpha or coeffs.r != r):
        raise ValueError("coefficient set does not match (alpha, r)")

    N = mesh.N
    G = g_matrix(r)
    psi0 = (-1.0) ** np.arange(r)  # basis values at the left end
    U = np.zeros((N, r))
    uniform = lam != 0.0 and coeffs is not None and coeffs.h_unit is not None
    fixed_A = None
    if lam == 0.0:
        fixed_A = G
    elif uniform:
        k = mesh.step(1)
        h_unit = coeffs.h_unit
        fixed_A = G + lam * k ** problem.alpha * h_unit[0]
    lu = lu_factor(fixed_A) if fixed_A is not None else None
    max_res = 0.0

    for n in range(1, N + 1):
        rhs = f_moments(problem.f, mesh, n, r)
        rhs += psi0 * problem.u0 if n == 1 else psi0 * U[n - 2].sum()
        if lam != 0.0 and n >= 2:
            if uniform:
                hist = np.einsum("lij,lj->i", h_unit[1:n], U[n - 2::-1])
                hist *= k ** problem.alpha
            else:
                hist = np.einsum("lij,lj->i", coeffs.history_row(n), U[: n - 1])
            rhs -= lam * hist
        if fixed_A is not None:
            A = fixed_A
            U[n - 1] = lu_solve(lu, rhs)
        else:
            A = G + lam * coeffs.h0_for_step(n)
            U[n - 1] = np.linalg.solve(A, rhs)
        res = np.abs(A @ U[n - 1] - rhs).max() / max(np.abs(rhs).max(), 1e-300)
        max_res = max(max_res, res)

    return DGSolution(mesh, U, problem.u0, max_res)


def eval_solution(sol: DGSolution, t: float, side: str = "left"):
    return sol.value(t, side)


def error_table(sol: DGSolution, exact: Callable, alpha: float) -> ErrorTable:
    """Errors at the shifted right-Radau points, one-sided at the interval
    ends (right limit at j = 0, left limit at j = r)."""
    r = sol.r
    taus = radau_points(r).taus
    N = sol.mesh.N
    tstar = np.empty((N, r + 1))
    approx = np.empty((N, r + 1))
    for n in range(1, N + 1):
        tstar[n - 1] = sol.mesh.affine(n, taus)
        approx[n - 1] = sol.interval_values(n, taus)
    errors = np.abs(approx - exact(tstar))
    weighted = tstar ** (r - alpha) * errors
    return ErrorTable(tstar, errors, weighted.max(axis=0))
