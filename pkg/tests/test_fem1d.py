import numpy as np
import pytest
from scipy.linalg import cho_factor, eigh

from fracdg.fem1d import FemSpace1D, assemble, fem_values, l2_norm, l2_project, load_vector


def test_hand_assembled_two_linear_elements():
    space = FemSpace1D(2.0, 2, 1)
    ops = assemble(space)
    assert space.P == 1
    assert abs(ops.mass[0, 0] - 2.0 / 3.0) < 1e-15
    assert abs(ops.stiffness[0, 0] - 2.0) < 1e-15


def test_interior_hat_row_sum():
    space = FemSpace1D(5.0, 5, 1)  # h = 1, nodes 1..4 free
    ops = assemble(space)
    # rows not adjacent to the boundary integrate the partition of unity
    assert abs(ops.mass[1].sum() - space.h) < 1e-14
    assert abs(ops.mass[2].sum() - space.h) < 1e-14


def test_dimension_and_bandwidth():
    space = FemSpace1D(2.0, 20, 3)
    assert space.P == 59
    ops = assemble(space)
    p = space.degree
    for i in range(space.P):
        row = np.nonzero(ops.mass[i])[0]
        assert row.max() - row.min() <= 2 * p


def test_symmetry_and_positive_definiteness():
    space = FemSpace1D(2.0, 7, 3)
    ops = assemble(space)
    assert np.abs(ops.mass - ops.mass.T).max() == 0.0
    assert np.abs(ops.stiffness - ops.stiffness.T).max() == 0.0
    cho_factor(ops.mass)
    cho_factor(ops.stiffness)


def test_smallest_eigenvalue_matches_laplacian():
    space = FemSpace1D(2.0, 20, 3)
    ops = assemble(space)
    w = eigh(ops.stiffness, ops.mass, eigvals_only=True)
    exact = (np.pi / space.L) ** 2
    assert abs(w[0] - exact) / exact < 1e-8


def test_load_vector_examples():
    space = FemSpace1D(2.0, 6, 3)
    ops = assemble(space)
    assert np.abs(load_vector(space, lambda x: 0.0 * x)).max() == 0.0
    basis = np.zeros(space.P)
    basis[7] = 1.0
    lv = load_vector(space, lambda x: fem_values(space, basis, x), extra=6)
    assert np.abs(lv - ops.mass[:, 7]).max() < 1e-14
    # cubic-representable load equals M times its nodal coefficients
    g = lambda x: x * (2.0 - x)  # noqa: E731
    nodal = g(space.nodes[1:-1])
    assert np.abs(load_vector(space, g) - ops.mass @ nodal).max() < 1e-13


def test_projection_idempotent_and_exact_for_quadratics():
    space = FemSpace1D(2.0, 20, 3)
    g = lambda x: x * (2.0 - x)  # noqa: E731
    c = l2_project(space, g)
    assert np.abs(c - g(space.nodes[1:-1])).max() < 1e-12
    xs = np.linspace(0.0, 2.0, 101)
    assert np.abs(fem_values(space, c, xs) - g(xs)).max() < 1e-12


def test_projection_error_and_rate():
    g = lambda x: np.sin(np.pi * x / 2.0)  # noqa: E731
    errs = []
    for E in (20, 40):
        space = FemSpace1D(2.0, E, 3)
        c = l2_project(space, g)
        errs.append(l2_norm(space, lambda x: fem_values(space, c, x) - g(x)))
    assert errs[0] < 3e-7  # frozen from the quadrature oracle (1.21e-7)
    rate = np.log2(errs[0] / errs[1])
    assert abs(rate - 4.0) < 0.1


def test_galerkin_orthogonality():
    space = FemSpace1D(2.0, 9, 2)
    ops = assemble(space)
    g = lambda x: np.exp(x) * np.sin(x)  # noqa: E731
    c = l2_project(space, g, ops)
    moments = load_vector(space, lambda x: fem_values(space, c, x) - g(x), extra=8)
    assert np.abs(moments).max() < 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        FemSpace1D(-1.0, 4, 1)
    with pytest.raises(ValueError):
        FemSpace1D(1.0, 0, 1)
    space = FemSpace1D(1.0, 4, 1)
    with pytest.raises(ValueError):
        fem_values(space, np.zeros(space.P), np.array([1.5]))
