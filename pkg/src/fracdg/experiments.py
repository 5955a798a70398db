"""Canned experiment drivers: coefficient tables, convergence tables and the
space-time jump comparison, in the configurations the reference tables use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coefficients import h1_matrix, h_far_tensor, uniform_history
from .dg_ode import ScalarProblem, error_table, solve_ode
from .dg_pde import (
    PdeProblem,
    jump_norms,
    l2_interval_error,
    reconstruct_pde,
    solve_pde,
)
from .fem1d import FemSpace1D, assemble
from .mesh import TimeMesh, make_mesh
from .polylib import radau_points
from .reconstruction import reconstruct
from .reference import PdeRefParams, ode_reference, pde_reference

__all__ = [
    "gauss_point_counts",
    "decay_series",
    "ode_problem_74",
    "ode_error_sweep",
    "recon_error_sweep",
    "pde_problem_75",
    "PdeJumpReport",
    "pde_jump_report",
]

# the printed maxima sample each interval at 5 equispaced reference points;
# denser grids resolve the first-interval boundary layer the tables do not
TABLE_SAMPLES = np.linspace(-1.0, 1.0, 5)


def _h_of_m(alpha: float, r: int, lbar: int, M: int) -> np.ndarray:
    """Unit-step H^{lbar} evaluated with M-point rules throughout."""
    if lbar == 1:
        return h1_matrix(alpha, r, 1.0, 1.0, M)
    return h_far_tensor(alpha, r, 1.0, 1.0, float(lbar), M, refine=False)


def gauss_point_counts(alpha: float, r_max: int, lbars, atol: float = 1e-14,
                       m_cap: int = 12) -> np.ndarray:
    """Smallest M with max_ij |H^{lbar}_ij(M) - H^{lbar}_ij(m_cap)| < atol,
    tabulated over r = 1..r_max and the given lags."""
    lbars = list(lbars)
    out = np.zeros((r_max, len(lbars)), dtype=int)
    for c, lbar in enumerate(lbars):
        ref = _h_of_m(alpha, r_max, lbar, m_cap)
        hs = [_h_of_m(alpha, r_max, lbar, M) for M in range(1, m_cap + 1)]
        for r in range(1, r_max + 1):
            for M in range(1, m_cap + 1):
                if np.abs(hs[M - 1][:r, :r] - ref[:r, :r]).max() < atol:
                    out[r - 1, c] = M
                    break
            else:
                out[r - 1, c] = m_cap
    return out


def decay_series(alpha: float, r: int, lbars) -> list[tuple[int, int, float]]:
    """Rows (m, lbar, max_{i+j=m} |H^{lbar}_ij|) of the antidiagonal decay."""
    lbars = list(lbars)
    cs = uniform_history(alpha, r, max(lbars))
    rows = []
    for lbar in lbars:
        H = np.abs(cs.h(lbar))
        for m in range(2, 2 * r + 1):
            vals = [H[i - 1, j - 1] for i in range(1, r + 1)
                    for j in range(1, r + 1) if i + j == m]
            rows.append((m, lbar, max(vals)))
    return rows


def ode_problem_74(T: float = 2.0) -> ScalarProblem:
    """The scalar convergence-study problem: alpha = lambda = 1/2,
    f = cos(pi t), u0 = 1."""
    return ScalarProblem(0.5, 0.5, lambda t: np.cos(np.pi * t), 1.0, T)


def _mesh_for(q: float, N: int, T: float) -> TimeMesh:
    return make_mesh("uniform", N, T) if q == 1.0 else make_mesh("graded", N, T, q=q)


def ode_error_sweep(r: int, Ns, q: float = 1.0, T: float = 2.0):
    """Weighted Radau-point errors E^max_j over a sweep of N; returns
    (rows, rates) with rows[N] of length r+1."""
    prob = ode_problem_74(T)
    exact = ode_reference(prob.alpha, prob.lam, prob.f, prob.u0)
    rows = {}
    for N in Ns:
        sol = solve_ode(prob, _mesh_for(q, N, T), r)
        rows[N] = error_table(sol, exact, prob.alpha).weighted_max
    return rows, _rates(rows, Ns)


def recon_error_sweep(r: int, Ns, q: float, T: float = 1.0):
    """Sampled maxima of |Uhat - u| per N, tabulated like the printed runs."""
    prob = ode_problem_74(T)
    exact = ode_reference(prob.alpha, prob.lam, prob.f, prob.u0)
    rows = {}
    for N in Ns:
        mesh = _mesh_for(q, N, T)
        rec = reconstruct(solve_ode(prob, mesh, r))
        worst = 0.0
        for n in range(1, N + 1):
            t = mesh.affine(n, TABLE_SAMPLES)
            worst = max(worst, float(np.abs(rec.interval_values(n, TABLE_SAMPLES) - exact(t)).max()))
        rows[N] = np.array([worst])
    return rows, _rates(rows, Ns)


def _rates(rows: dict, Ns) -> dict:
    Ns = list(Ns)
    rates = {}
    for prev, N in zip(Ns, Ns[1:]):
        with np.errstate(divide="ignore", invalid="ignore"):
            rates[N] = np.log2(rows[prev] / rows[N])
    return rates


def pde_problem_75(alpha: float = 0.6, L: float = 2.0, C0: float = 1.0,
                   Cf: float = 2.0, T: float = 2.0) -> tuple[PdeProblem, PdeRefParams]:
    """The 1D space-time experiment: u0 = C0 x (L-x), f = Cf t exp(-t)."""
    prob = PdeProblem(alpha, L, lambda x: C0 * x * (L - x),
                      lambda x, t: Cf * t * np.exp(-t) * np.ones_like(x), T)
    return prob, PdeRefParams(alpha, L, C0, Cf)


@dataclass(frozen=True)
class PdeJumpReport:
    """Per-interval comparison of the jump norms with the sup-in-time errors
    of the dG solution and its reconstruction."""

    levels: np.ndarray      # t_0 .. t_N
    jumps: np.ndarray       # ||[U]^{n-1}||, length N
    sup_err: np.ndarray     # sup over I_n of ||U - u||
    sup_rec_err: np.ndarray  # sup over I_n of ||Uhat - u||


def pde_jump_report(mesh: TimeMesh, r: int = 3, fem_degree: int = 3,
                    fem_elements: int = 20, alpha: float = 0.6, L: float = 2.0,
                    C0: float = 1.0, Cf: float = 2.0, contour_K: int = 24,
                    samples_per_interval: int = 15) -> PdeJumpReport:
    """Solve the space-time problem on ``mesh`` and compare jumps vs errors.

    The per-interval sup samples a Chebyshev-Lobatto grid; the endpoints
    evaluate the one-sided limits from inside the interval, where the error
    of the discontinuous solution peaks.
    """
    prob, ref_params = pde_problem_75(alpha, L, C0, Cf, mesh.T)
    space = FemSpace1D(L, fem_elements, fem_degree)
    ops = assemble(space)
    sol = solve_pde(prob, mesh, r, space, ops=ops)
    rec = reconstruct_pde(sol)

    m = samples_per_interval - 1
    taus = np.cos(np.pi * np.arange(m, -1, -1) / m)
    N = mesh.N
    t_lo = mesh.affine(1, 0.5 * (taus[0] + taus[1]))  # just inside interval 1
    uref = pde_reference(ref_params, K=contour_K, t_min=t_lo, t_max=mesh.T)
    sup_err = np.zeros(N)
    sup_rec = np.zeros(N)
    for n in range(1, N + 1):
        for tau in taus:
            t = max(mesh.affine(n, tau), t_lo)
            sup_err[n - 1] = max(sup_err[n - 1],
                                 l2_interval_error(sol, space, uref, n, tau, t))
            sup_rec[n - 1] = max(sup_rec[n - 1],
                                 l2_interval_error(rec, space, uref, n, tau, t))
    return PdeJumpReport(mesh.levels.copy(), jump_norms(sol, ops), sup_err, sup_rec)


def radau_star_points(mesh: TimeMesh, r: int) -> np.ndarray:
    """Shifted Radau points t^*_{nj}, shape (N, r+1)."""
    taus = radau_points(r).taus
    return np.stack([mesh.affine(n, taus) for n in range(1, mesh.N + 1)])
