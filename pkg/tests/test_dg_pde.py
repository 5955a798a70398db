import numpy as np
import pytest
from scipy.integrate import quad

from fracdg.coefficients import CoeffSet
from fracdg.dg_ode import ScalarProblem, f_moments, solve_ode
from fracdg.dg_pde import (
    PdeProblem,
    eval_pde_solution,
    jump_norms,
    l2_norm_error,
    march_blocks,
    pde_load,
    reconstruct_pde,
    solve_pde,
)
from fracdg.fem1d import FemSpace1D, assemble, load_vector
from fracdg.mesh import make_mesh


@pytest.fixture(scope="module")
def space():
    return FemSpace1D(2.0, 8, 2)


def test_zero_data_zero_solution(space):
    prob = PdeProblem(0.6, 2.0, lambda x: 0.0 * x, None, 2.0)
    sol = solve_pde(prob, make_mesh("uniform", 4, 2.0), 2, space)
    assert np.abs(sol.coeffs).max() == 0.0


def test_kronecker_reduces_to_scalar():
    lam, alpha, r = 0.7, 0.45, 3
    f = lambda t: np.cos(np.pi * t)  # noqa: E731
    mesh = make_mesh("uniform", 6, 2.0)
    cs = CoeffSet.for_mesh(alpha, r, mesh)
    scalar = solve_ode(ScalarProblem(alpha, lam, f, 1.0, 2.0), mesh, r, cs)
    U, res = march_blocks(mesh, r, cs, np.array([[1.0]]), np.array([[lam]]),
                          np.array([1.0]), lambda n: f_moments(f, mesh, n, r)[:, None])
    assert np.abs(U[..., 0] - scalar.coeffs).max() < 1e-12
    assert res < 1e-12


def test_classical_limit_runs_without_memory(space):
    prob = PdeProblem(1.0, 2.0, lambda x: np.sin(np.pi * x / 2.0), None, 1.0)
    mesh = make_mesh("uniform", 5, 1.0)
    cs = CoeffSet.for_mesh(1.0, 2, mesh)
    assert np.abs(cs.h_unit[1:]).max() == 0.0
    sol = solve_pde(prob, mesh, 2, space, cs)
    # classical heat decay of the lowest mode, loose tolerance for the coarse grid
    lam1 = (np.pi / 2.0) ** 2
    got = eval_pde_solution(sol, space, np.array([1.0]), 1.0)[0]
    assert abs(got - np.exp(-lam1)) < 1e-2


def test_time_constant_forcing_moments(space):
    prob = PdeProblem(0.6, 2.0, lambda x: 0.0 * x,
                      lambda x, t: np.ones_like(x) * np.ones_like(t), 2.0)
    mesh = make_mesh("uniform", 4, 2.0)
    F = pde_load(prob, mesh, space, 2, 3)
    want = mesh.step(2) * load_vector(space, lambda x: np.ones_like(x))
    assert np.abs(F[0] - want).max() < 1e-14
    assert np.abs(F[1:]).max() < 1e-14


def test_load_against_adaptive_oracle(space):
    prob = PdeProblem(0.6, 2.0, lambda x: 0.0 * x,
                      lambda x, t: 2.0 * t * np.exp(-t) * np.ones_like(x), 2.0)
    mesh = make_mesh("uniform", 4, 2.0)
    n, r = 3, 3
    F = pde_load(prob, mesh, space, n, r)
    spatial = load_vector(space, lambda x: np.ones_like(x))
    from fracdg.polylib import legendre_values
    for i in (1, 2, 3):
        def integrand(t, i=i):
            tau = mesh.inverse_affine(n, t)
            return 2.0 * t * np.exp(-t) * legendre_values(r, tau)[0][i - 1]
        want, _ = quad(integrand, mesh.levels[n - 1], mesh.levels[n], epsabs=1e-14)
        assert np.abs(F[i - 1] - want * spatial).max() < 1e-12


def test_initial_data_interpolated(space):
    # quadratic u0 lies in the quadratic space: projection is interpolation
    prob = PdeProblem(0.6, 2.0, lambda x: x * (2.0 - x), None, 1.0)
    mesh = make_mesh("uniform", 3, 1.0)
    sol = solve_pde(prob, mesh, 2, space)
    xs = np.linspace(0.0, 2.0, 41)
    got = eval_pde_solution(sol, space, xs, 0.0, "left")
    assert np.abs(got - xs * (2.0 - xs)).max() < 1e-12


def test_eval_and_norm_consistency(space):
    prob = PdeProblem(0.6, 2.0, lambda x: x * (2.0 - x),
                      lambda x, t: 2.0 * t * np.exp(-t) * np.ones_like(x), 1.0)
    mesh = make_mesh("uniform", 4, 1.0)
    sol = solve_pde(prob, mesh, 3, space)
    assert sol.max_residual < 1e-10
    assert l2_norm_error(sol, space, lambda x, t: eval_pde_solution(sol, space, x, t), 0.6) < 1e-13
    with pytest.raises(ValueError):
        eval_pde_solution(sol, space, np.array([3.0]), 0.5)


def test_reconstruction_continuity_vector_valued(space):
    prob = PdeProblem(0.6, 2.0, lambda x: x * (2.0 - x),
                      lambda x, t: 2.0 * t * np.exp(-t) * np.ones_like(x), 1.0)
    mesh = make_mesh("uniform", 5, 1.0)
    sol = solve_pde(prob, mesh, 3, space)
    rec = reconstruct_pde(sol)
    for n in range(2, 6):
        gap = rec.interval_values(n, -1.0)[0] - rec.interval_values(n - 1, 1.0)[0]
        assert np.abs(gap).max() < 1e-13
    ops = assemble(space)
    jn = jump_norms(sol, ops)
    assert jn.shape == (5,) and np.all(jn >= 0.0)
    rec_jumps = jump_norms(rec, ops)
    assert rec_jumps[1:].max() < 1e-13


def test_history_cache_reuse_on_uniform_mesh(space):
    prob = PdeProblem(0.6, 2.0, lambda x: x * (2.0 - x), None, 1.0)
    mesh = make_mesh("uniform", 6, 1.0)
    cs = CoeffSet.for_mesh(0.6, 2, mesh)
    assert cs.h_unit is not None and cs.h_unit.shape[0] == 6  # lags 0..N-1
    sol = solve_pde(prob, mesh, 2, space, cs)
    assert sol.coeffs.shape == (6, 2, space.P)
