"""Hermite chaos basis: multi-indices, normalized Hermite polynomials and
Gauss-Hermite quadrature for the standard Gaussian weight.

Conventions
-----------
All polynomials are probabilists' Hermite polynomials normalized in
L^2(gamma_1), i.e. h_0 = 1, h_1(x) = x and

    h_{n+1}(x) = (x h_n(x) - sqrt(n) h_{n-1}(x)) / sqrt(n+1),

so that <h_m, h_n>_{gamma_1} = delta_{mn}.  Quadrature weights sum to 1
(expectation under the standard Gaussian, not the physicists' exp(-x^2)
weight).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BasisSizeError, NumericError

# Hard ceiling on the number of basis elements; desk-scale dense solves only.
DEFAULT_BASIS_CAP = 20000


def hermite_eval(n: int, x):
    """Evaluate the normalized probabilists' Hermite polynomial h_n at x.

    x may be a scalar or an ndarray; the return matches its shape.
    """
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.ones_like(x)
    for m in range(n):
        h, h_prev = (x * h - math.sqrt(m) * h_prev) / math.sqrt(m + 1), h
    return h if h.shape else float(h)


def hermite_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """Table H[n, j] = h_n(x[j]) for n = 0..n_max via the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    table = np.empty((n_max + 1, x.size))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for n in range(1, n_max):
        table[n + 1] = (x * table[n] - math.sqrt(n) * table[n - 1]) / math.sqrt(n + 1)
    return table


def enumerate_multi_indices(k: int, max_degree: int) -> list[tuple[int, ...]]:
    """All exponent tuples of length k with total degree <= max_degree,
    in graded lexicographic order (degree-major, lex within a degree)."""

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    out = []
    for degree in range(max_degree + 1):
        out.extend(compositions(degree, k))
    return out


@dataclass(frozen=True)
class ChaosBasis:
    """Graded-lex ordered tensor Hermite basis of L^2(gamma_k), degree <= N."""

    k: int
    degree: int
    indices: tuple[tuple[int, ...], ...]
    index_map: dict = field(repr=False, hash=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.indices)

    def degrees(self) -> np.ndarray:
        """Total degree |alpha| per basis element (OU eigenvalue diagonal)."""
        return np.array([sum(a) for a in self.indices], dtype=float)

    def position(self, alpha: tuple[int, ...]) -> int:
        return self.index_map[tuple(alpha)]

    def lowering_table(self) -> np.ndarray:
        """table[j, i] = position of alpha - e_i for basis element j, or -1."""
        table = np.full((self.size, self.k), -1, dtype=int)
        for j, alpha in enumerate(self.indices):
            for i in range(self.k):
                if alpha[i] > 0:
                    lowered = list(alpha)
                    lowered[i] -= 1
                    table[j, i] = self.index_map[tuple(lowered)]
        return table

    def eval_matrix(self, points: np.ndarray) -> np.ndarray:
        """Matrix H[j, q] = h_{alpha_j}(points[q]) for points of shape (m, k)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.k:
            raise ValueError(f"points have dimension {points.shape[1]}, basis has {self.k}")
        tables = [hermite_table(self.degree, points[:, i]) for i in range(self.k)]
        out = np.ones((self.size, points.shape[0]))
        for j, alpha in enumerate(self.indices):
            for i, a in enumerate(alpha):
                if a > 0:
                    out[j] *= tables[i][a]
        return out


def enumerate_basis(k: int, max_degree: int, cap: int = DEFAULT_BASIS_CAP) -> ChaosBasis:
    """Build the chaos basis of dimension k and total degree <= max_degree.

    Raises BasisSizeError when binomial(max_degree + k, k) exceeds the cap.
    """
    if k < 1:
        raise ValueError("dimension k must be >= 1")
    if max_degree < 0:
        raise ValueError("max degree must be >= 0")
    count = math.comb(max_degree + k, k)
    if count > cap:
        raise BasisSizeError(
            f"basis would have {count} elements, exceeding the cap of {cap}"
        )
    indices = tuple(enumerate_multi_indices(k, max_degree))
    index_map = {alpha: j for j, alpha in enumerate(indices)}
    return ChaosBasis(k=k, degree=max_degree, indices=indices, index_map=index_map)


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor Gauss-Hermite rule for expectations under gamma_k.

    nodes has shape (n_nodes, k); weights are positive and sum to 1.
    """

    q: int
    k: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.weights.size


def gauss_hermite(q: int) -> QuadratureGrid:
    """One-dimensional Gauss-Hermite rule for the standard Gaussian weight.

    Nodes are the roots of the degree-q probabilists' Hermite polynomial,
    obtained from the symmetric Jacobi matrix of the three-term recurrence;
    exact for polynomials of degree <= 2q - 1.
    """
    if q < 1:
        raise ValueError("quadrature order must be >= 1")
    jacobi = np.diag(np.sqrt(np.arange(1, q)), 1)
    jacobi = jacobi + jacobi.T
    try:
        nodes, vecs = np.linalg.eigh(jacobi)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Gauss-Hermite eigensolve failed for q={q}") from exc
    weights = vecs[0] ** 2
    weights = weights / weights.sum()
    # extreme-node weights may underflow to exactly 0 for large q; that is
    # harmless, only negative or non-finite weights indicate a failure
    if not (np.all(np.isfinite(nodes)) and np.all(weights >= 0) and weights.sum() > 0):
        raise NumericError(f"Gauss-Hermite rule for q={q} produced invalid nodes/weights")
    return QuadratureGrid(q=q, k=1, nodes=nodes.reshape(-1, 1), weights=weights)


def uniform_gaussian_grid(span: float, n: int, k: int = 1) -> QuadratureGrid:
    """Uniform trapezoid rule on [-span, span]^k weighted by the Gaussian
    density.

    Complements the Gauss-Hermite rule for integrands with compact support
    (bump test functions), where the trapezoid rule on a uniform grid is far
    more accurate than any polynomial-exact rule of comparable size.
    """
    x1 = np.linspace(-span, span, n)
    h = x1[1] - x1[0]
    w1 = np.exp(-0.5 * x1**2) / math.sqrt(2.0 * math.pi) * h
    w1[0] *= 0.5
    w1[-1] *= 0.5
    w1 /= w1.sum()
    grids = np.meshgrid(*([x1] * k), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = w1
    for _ in range(k - 1):
        weights = np.multiply.outer(weights, w1).ravel()
    # q records the polynomial degree the rule handles reliably; the dense
    # uniform rule is fine well past any basis degree used here
    return QuadratureGrid(q=n, k=k, nodes=nodes, weights=weights)


def tensor_grid(q: int, k: int) -> QuadratureGrid:
    """Tensorize the 1-D rule of order q over k coordinates."""
    rule = gauss_hermite(q)
    x1 = rule.nodes[:, 0]
    grids = np.meshgrid(*([x1] * k), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    w = rule.weights
    weights = w
    for _ in range(k - 1):
        weights = np.multiply.outer(weights, w).ravel()
    return QuadratureGrid(q=q, k=k, nodes=nodes, weights=weights)
