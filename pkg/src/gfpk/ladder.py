"""Dimension ladder: solve the k-dimensional nonlinear problems for
k = 1..K with a componentwise-bounded drift, certify the weighted
second-moment (Lyapunov) bound at every level and quantify how the
marginals stabilize as the dimension grows.

The weighted norm |x|^2 = sum_n alpha_n x_n^2 with summable weights gives
the moment certificate m_k <= (2 + C^2) T, where C is the componentwise
drift bound and T the full weight sum.  Chebyshev then turns the uniform
moments into tail-mass control, the computable shadow of tightness.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import enumerate_basis, tensor_grid
from .density import BumpTest, ChaosDensity, HermiteTest, as_measure
from .drift import truncate_to_k
from .errors import NonConvergenceError
from .nonlinear import FixedPointOptions, fixed_point_solve

MAX_WEIGHT_RATIO = 0.9  # enforced geometric decay of the weights


@dataclass(frozen=True)
class LadderConfig:
    """Weights, drift bound, truncation schedule and test battery."""

    weights: tuple[float, ...]  # alpha_1 .. alpha_{n_max}, geometric decay
    component_bound: float  # C
    levels: tuple[int, ...]  # dimensions k, increasing
    degrees: tuple[int, ...]  # basis degree per level
    quad_orders: tuple[int, ...]  # quadrature order per level
    tail_levels: tuple[float, ...] = (1.0, 2.0, 4.0)
    fixed_point: FixedPointOptions = FixedPointOptions()

    def __post_init__(self):
        if len(self.levels) != len(self.degrees) or len(self.levels) != len(self.quad_orders):
            raise ValueError("levels, degrees and quad_orders must have equal length")
        if list(self.levels) != sorted(self.levels) or len(set(self.levels)) != len(self.levels):
            raise ValueError("levels must be strictly increasing")
        if self.levels[-1] > len(self.weights):
            raise ValueError("need one weight per coordinate up to the deepest level")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        for a, b in zip(self.weights[:-1], self.weights[1:]):
            if b / a > MAX_WEIGHT_RATIO:
                raise ValueError(
                    f"weight ratio {b / a:.3f} exceeds {MAX_WEIGHT_RATIO}; "
                    "weights must decay geometrically"
                )
        if self.component_bound < 0:
            raise ValueError("component bound must be nonnegative")

    @property
    def weight_total(self) -> float:
        """T: configured weight sum plus a geometric bound on the tail."""
        ratio = max(b / a for a, b in zip(self.weights[:-1], self.weights[1:]))
        tail = self.weights[-1] * ratio / (1.0 - ratio)
        return float(sum(self.weights) + tail)

    @property
    def moment_threshold(self) -> float:
        return (2.0 + self.component_bound**2) * self.weight_total


def default_battery(k: int) -> list:
    """Coordinates, squared coordinates and three bumps per coordinate."""
    battery = []
    for i in range(k):
        beta = [0] * k
        beta[i] = 1
        battery.append(HermiteTest(tuple(beta)))
        beta2 = [0] * k
        beta2[i] = 2
        battery.append(HermiteTest(tuple(beta2)))
        for center in (-1.0, 0.0, 1.0):
            battery.append(BumpTest(active=(i,), center=(center,), radius=2.0))
    return battery


def lyapunov_moment(rho: ChaosDensity, weights) -> float:
    """Weighted second moment sum_n alpha_n E_mu[x_n^2], exactly from the
    chaos coefficients via x^2 = sqrt(2) h_2(x) + 1."""
    if rho.basis.degree < 2:
        raise ValueError("basis degree must be at least 2 for second moments")
    total = 0.0
    for n in range(rho.k):
        idx = [0] * rho.k
        idx[n] = 2
        c2 = rho.coefficients[rho.basis.position(tuple(idx))]
        total += weights[n] * (1.0 + math.sqrt(2.0) * c2)
    return float(total)


def _battery_integral(rho: ChaosDensity, grid, phi) -> float:
    """integral phi d(mu) with phi read through the zero-padding embedding:
    coordinates beyond the density's dimension are held at 0."""
    if isinstance(phi, HermiteTest):
        ambient = len(phi.beta)
    else:
        ambient = max(phi.active) + 1
    if ambient <= rho.k:
        vals = phi.value(grid.nodes)
    else:
        padded = np.zeros((grid.n_nodes, ambient))
        padded[:, : rho.k] = grid.nodes
        vals = phi.value(padded)
    return float(np.sum(grid.weights * vals * rho.evaluate(grid.nodes)))


def marginal_distance(rho_a, grid_a, rho_b, grid_b, battery) -> float:
    """Max over the battery of |int phi d(mu_a) - int phi d(mu_b)|, with both
    measures read through the zero-padding embedding."""
    if not battery:
        raise ValueError("battery must be non-empty")
    worst = 0.0
    for phi in battery:
        da = _battery_integral(rho_a, grid_a, phi)
        db = _battery_integral(rho_b, grid_b, phi)
        worst = max(worst, abs(da - db))
    return worst


@dataclass
class LevelReport:
    k: int
    degree: int
    quad_order: int
    solution: ChaosDensity
    moment: float
    threshold: float
    quad_error: float
    passed: bool
    tail_masses: dict
    distance_to_next: float | None = None
    iterations: int = 0


@dataclass
class LadderReport:
    config: LadderConfig
    levels: list = field(default_factory=list)
    completed: bool = True
    failure: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        tails = sorted(self.levels[0].tail_masses) if self.levels else []
        writer.writerow(
            ["k", "moment", "threshold", "pass", "d_next"] + [f"tail@{r}" for r in tails]
        )
        for lv in self.levels:
            writer.writerow(
                [
                    lv.k,
                    repr(lv.moment),
                    repr(lv.threshold),
                    lv.passed,
                    "" if lv.distance_to_next is None else repr(lv.distance_to_next),
                ]
                + [repr(lv.tail_masses[r]) for r in tails]
            )
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        return {
            "weight_total": self.config.weight_total,
            "component_bound": self.config.component_bound,
            "completed": self.completed,
            "failure": self.failure,
            "levels": [
                {
                    "k": lv.k,
                    "degree": lv.degree,
                    "quad_order": lv.quad_order,
                    "moment": lv.moment,
                    "threshold": lv.threshold,
                    "quad_error": lv.quad_error,
                    "pass": lv.passed,
                    "tail_masses": {str(r): m for r, m in lv.tail_masses.items()},
                    "distance_to_next": lv.distance_to_next,
                    "iterations": lv.iterations,
                    "solution": lv.solution.to_json_dict(),
                }
                for lv in self.levels
            ],
        }


def run_ladder(v, cfg: LadderConfig, battery=None) -> LadderReport:
    """Solve the nonlinear problem level by level, seeding each dimension
    with the zero-padded solution of the previous one.

    A non-convergent level aborts the ladder and returns the partial report
    with the failure message recorded.
    """
    report = LadderReport(config=cfg)
    previous = None  # (rho, grid)
    for k, degree, q in zip(cfg.levels, cfg.degrees, cfg.quad_orders):
        basis = enumerate_basis(k, degree)
        grid = tensor_grid(q, k)
        v_k = truncate_to_k(v, k)
        seed = None
        if previous is not None:
            seed = _zero_pad(previous[0], basis)
        opts = FixedPointOptions(
            damping=cfg.fixed_point.damping,
            tolerance=cfg.fixed_point.tolerance,
            max_iterations=cfg.fixed_point.max_iterations,
            initial=seed,
        )
        try:
            rho, trace = fixed_point_solve(v_k, basis, grid, opts)
        except NonConvergenceError as exc:
            report.completed = False
            report.failure = f"level k={k}: {exc}"
            break
        moment = lyapunov_moment(rho, cfg.weights)
        quad_error = max(cfg.fixed_point.tolerance, trace.psi_residuals[-1]) * sum(
            cfg.weights[:k]
        )
        tail_masses = _tail_masses(rho, grid, cfg.weights[:k], cfg.tail_levels)
        level = LevelReport(
            k=k,
            degree=degree,
            quad_order=q,
            solution=rho,
            moment=moment,
            threshold=cfg.moment_threshold,
            quad_error=quad_error,
            passed=moment <= cfg.moment_threshold + quad_error,
            tail_masses=tail_masses,
            iterations=trace.iterations,
        )
        if previous is not None:
            shared_battery = battery if battery is not None else default_battery(previous[0].k)
            report.levels[-1].distance_to_next = marginal_distance(
                previous[0], previous[1], rho, grid, shared_battery
            )
        report.levels.append(level)
        previous = (rho, grid)
    return report


def _zero_pad(rho: ChaosDensity, basis) -> ChaosDensity:
    """Embed a lower-dimensional solution into a larger basis by treating the
    new coordinates as independent standard Gaussians (zero exponents)."""
    coeffs = np.zeros(basis.size)
    for alpha, c in zip(rho.basis.indices, rho.coefficients):
        padded = tuple(alpha) + (0,) * (basis.k - rho.k)
        if padded in basis.index_map:
            coeffs[basis.position(padded)] = c
    coeffs[0] = 1.0
    return ChaosDensity(basis, coeffs)


def _tail_masses(rho, grid, weights, levels) -> dict:
    """mu(V > R) under the clipped quadrature measure, V the weighted norm."""
    measure = as_measure(rho, grid)
    vvals = measure.points**2 @ np.asarray(weights)
    return {float(r): float(np.sum(measure.masses[vvals > r])) for r in levels}
