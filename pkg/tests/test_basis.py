"""Hermite basis, multi-index enumeration and quadrature rules."""
import math

import numpy as np
import pytest

from gfpk import (
    BasisSizeError,
    enumerate_basis,
    enumerate_multi_indices,
    gauss_hermite,
    hermite_eval,
    hermite_table,
    tensor_grid,
    uniform_gaussian_grid,
)


def test_enumerate_1d_degree_3():
    assert enumerate_multi_indices(1, 3) == [(0,), (1,), (2,), (3,)]


def test_enumerate_2d_degree_2_has_six_indices():
    indices = enumerate_multi_indices(2, 2)
    assert len(indices) == 6
    assert indices[0] == (0, 0)


def test_enumerate_3d_degree_0_is_zero_index_only():
    assert enumerate_multi_indices(3, 0) == [(0, 0, 0)]


def test_enumeration_is_graded():
    indices = enumerate_multi_indices(3, 4)
    degrees = [sum(a) for a in indices]
    assert degrees == sorted(degrees)
    assert len(indices) == math.comb(4 + 3, 3)


def test_basis_cap_raises():
    with pytest.raises(BasisSizeError, match="exceed"):
        enumerate_basis(6, 30, cap=1000)


def test_hermite_trivial_values():
    assert hermite_eval(0, 7.3) == 1.0
    assert hermite_eval(1, 0.5) == 0.5


def test_hermite_h2_at_one():
    # h_2(x) = (x^2 - 1)/sqrt(2); checked against an independent recurrence
    assert abs(hermite_eval(2, 1.0)) < 1e-15
    x = 1.7
    direct = (x * x - 1.0) / math.sqrt(2.0)
    assert hermite_eval(2, x) == pytest.approx(direct, abs=1e-14)


def test_hermite_table_matches_eval():
    x = np.linspace(-3, 3, 11)
    table = hermite_table(8, x)
    for n in (0, 3, 8):
        assert np.allclose(table[n], hermite_eval(n, x))


def test_hermite_orthonormality_under_quadrature():
    grid = gauss_hermite(20)
    table = hermite_table(10, grid.nodes[:, 0])
    gram = (table * grid.weights) @ table.T
    assert np.allclose(gram, np.eye(11), atol=1e-12)


def test_gauss_hermite_q1():
    grid = gauss_hermite(1)
    assert np.allclose(grid.nodes, [[0.0]])
    assert np.allclose(grid.weights, [1.0])


def test_gauss_hermite_q2():
    # roots of h_2: x^2 - 1 = 0
    grid = gauss_hermite(2)
    assert np.allclose(np.sort(grid.nodes[:, 0]), [-1.0, 1.0])
    assert np.allclose(grid.weights, [0.5, 0.5])


def test_gauss_hermite_q3():
    # roots of h_3: x^3 - 3x = 0; exact through degree 5
    grid = gauss_hermite(3)
    assert np.allclose(np.sort(grid.nodes[:, 0]), [-math.sqrt(3), 0.0, math.sqrt(3)])
    assert np.allclose(np.sort(grid.weights), [1 / 6, 1 / 6, 2 / 3])
    x = grid.nodes[:, 0]
    assert np.dot(grid.weights, x**4) == pytest.approx(3.0, abs=1e-12)


def test_weights_sum_to_one():
    for q in (1, 5, 40):
        assert gauss_hermite(q).weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_tensor_grid_shape_and_moments():
    grid = tensor_grid(5, 3)
    assert grid.nodes.shape == (125, 3)
    # E[x_i x_j] = delta_ij under gamma_3
    second = np.einsum("m,mi,mj->ij", grid.weights, grid.nodes, grid.nodes)
    assert np.allclose(second, np.eye(3), atol=1e-12)


def test_uniform_gaussian_grid_normalized():
    grid = uniform_gaussian_grid(8.0, 801, 2)
    assert grid.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.dot(grid.weights, grid.nodes[:, 0] ** 2) == pytest.approx(1.0, abs=1e-6)


def test_eval_matrix_wrong_dimension():
    basis = enumerate_basis(2, 3)
    with pytest.raises(ValueError, match="dimension"):
        basis.eval_matrix(np.zeros((4, 3)))


def test_lowering_table():
    basis = enumerate_basis(2, 3)
    table = basis.lowering_table()
    j = basis.position((2, 1))
    assert table[j, 0] == basis.position((1, 1))
    assert table[j, 1] == basis.position((2, 0))
    assert table[basis.position((0, 0))].tolist() == [-1, -1]
