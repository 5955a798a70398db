import numpy as np
import pytest

from fracdg.mesh import TimeMesh, affine_map, make_mesh, midpoint_distance, step_ratio


def test_uniform_levels():
    mesh = make_mesh("uniform", 4, 2.0)
    assert np.allclose(mesh.levels, [0.0, 0.5, 1.0, 1.5, 2.0])
    assert mesh.N == 4 and mesh.T == 2.0


def test_graded_levels():
    mesh = make_mesh("graded", 4, 1.0, q=2.0)
    assert np.allclose(mesh.levels, [0.0, 1 / 16, 1 / 4, 9 / 16, 1.0], rtol=1e-14)


def test_graded_formula_relative():
    mesh = make_mesh("graded", 34, 1.0, q=6.0)
    n = np.arange(35)
    assert np.abs(mesh.levels[1:] / ((n[1:] / 34.0) ** 6) - 1.0).max() < 1e-14


def test_composite_split_matches_grading():
    mesh = make_mesh("composite", 40, 2.0, q=6.0, graded_until=1.0)
    assert mesh.N == 40
    n_graded = int(np.searchsorted(mesh.levels, 1.0))
    assert n_graded == 34
    assert np.allclose(mesh.steps[34:], 1.0 / 6.0, rtol=1e-13)


def test_steps_sum_to_T():
    for mesh in (make_mesh("uniform", 7, 3.0),
                 make_mesh("graded", 9, 2.0, q=3.5),
                 make_mesh("composite", 11, 2.0, q=4.0, graded_until=0.5)):
        assert abs(mesh.steps.sum() - mesh.T) <= 1e-13 * mesh.T


def test_affine_map_values():
    mesh = make_mesh("uniform", 2, 2.0)
    assert mesh.affine(1, 0.0) == 0.5
    assert mesh.affine(1, 1.0) == mesh.levels[1]
    assert mesh.affine(1, -1.0) == 0.0
    mesh5 = make_mesh("uniform", 5, 2.0)
    assert abs(affine_map(mesh5, 3, -0.5) - 0.9) < 1e-15


def test_affine_inverse_roundtrip():
    mesh = make_mesh("graded", 6, 2.0, q=2.5)
    for n in (1, 3, 6):
        taus = np.linspace(-1, 1, 9)
        assert np.abs(mesh.inverse_affine(n, mesh.affine(n, taus)) - taus).max() < 1e-12


def test_uniform_geometry_identities():
    mesh = make_mesh("uniform", 10, 10.0)  # k = 1
    for n, ell in ((5, 2), (9, 1), (10, 9)):
        lbar = n - ell
        assert abs(midpoint_distance(mesh, n, ell) - lbar * 1.0) < 1e-13
        # t_n(tau) - t_ell(sigma) = D (1 + (tau - sigma) / (2 lbar))
        for tau, sigma in ((0.3, -0.7), (1.0, 1.0), (-1.0, 0.2)):
            lhs = mesh.affine(n, tau) - mesh.affine(ell, sigma)
            rhs = lbar * (1.0 + (tau - sigma) / (2 * lbar))
            assert abs(lhs - rhs) < 1e-13


def test_geometry_positivity_nonuniform():
    mesh = make_mesh("graded", 12, 1.0, q=4.0)
    for n in range(2, 13):
        for ell in range(1, n):
            D = midpoint_distance(mesh, n, ell)
            sigma = np.linspace(-1, 1, 7)
            delta = (1.0 * mesh.step(n) - sigma * mesh.step(ell)) / (2 * D)
            assert np.all(1.0 + delta > 0)


def test_step_ratio():
    mesh = make_mesh("graded", 8, 1.0, q=2.0)
    assert abs(step_ratio(mesh, 2) - 3.0) < 1e-12
    with pytest.raises(IndexError):
        step_ratio(mesh, 1)


def test_locate_sides():
    mesh = make_mesh("uniform", 4, 2.0)
    assert mesh.locate(0.25, "left") == 1
    assert mesh.locate(0.5, "left") == 1
    assert mesh.locate(0.5, "right") == 2
    assert mesh.locate(0.0, "right") == 1
    assert mesh.locate(2.0, "left") == 4
    with pytest.raises(ValueError):
        mesh.locate(2.5)


def test_validation():
    with pytest.raises(ValueError):
        make_mesh("graded", 4, 1.0, q=0.5)
    with pytest.raises(ValueError):
        make_mesh("uniform", 4, -1.0)
    with pytest.raises(ValueError):
        TimeMesh(np.array([0.0, 1.0, 1.0]))
    with pytest.raises(ValueError):
        TimeMesh(np.array([0.5, 1.0]))
