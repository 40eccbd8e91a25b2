"""Independent ground-truth generators for cross-validation: 1-D closed-form
stationary densities, an exponentially fitted 2-D finite-difference solver
and a Monte Carlo sampler of the underlying diffusion.

None of these share numerical machinery with the spectral solver beyond
scalar special functions, so agreement is genuine evidence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import cumulative_trapezoid
from scipy.signal import fftconvolve

from .errors import DomainError, InstabilityError, NumericError

BOUNDARY_DENSITY_LIMIT = 1e-12
BLOWUP_LIMIT = 1e6


@dataclass(frozen=True)
class GridDensity1D:
    """Lebesgue density on a uniform symmetric grid, normalized to mass 1."""

    x: np.ndarray
    pdf: np.ndarray
    z: float  # normalization constant of the unnormalized density

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def gamma_density(self) -> np.ndarray:
        """Values of the density relative to the standard Gaussian."""
        phi = np.exp(-0.5 * self.x**2) / math.sqrt(2.0 * math.pi)
        return self.pdf / phi

    def mean(self) -> float:
        return float(np.trapezoid(self.x * self.pdf, self.x))

    def second_moment(self) -> float:
        return float(np.trapezoid(self.x**2 * self.pdf, self.x))


def _normalize_1d(x, unnormalized) -> GridDensity1D:
    peak = float(np.max(unnormalized))
    if unnormalized[0] > BOUNDARY_DENSITY_LIMIT * peak or unnormalized[-1] > BOUNDARY_DENSITY_LIMIT * peak:
        raise DomainError(
            "density does not vanish at the domain boundary; enlarge the box"
        )
    z = float(np.trapezoid(unnormalized, x))
    return GridDensity1D(x=x, pdf=unnormalized / z, z=z)


def oracle_1d(v, span: float = 10.0, n_points: int = 20001) -> GridDensity1D:
    """Closed-form 1-D stationary density for the drift b(x) = -x + v(x):
    Lebesgue density proportional to exp(-x^2/2 + int_0^x v(s) ds)."""
    if n_points % 2 == 0:
        n_points += 1  # keep 0 on the grid to anchor the potential integral
    x = np.linspace(-span, span, n_points)
    vvals = np.asarray(v(x), dtype=float)
    potential = cumulative_trapezoid(vvals, x, initial=0.0)
    potential -= potential[n_points // 2]
    log_density = -0.5 * x**2 + potential
    return _normalize_1d(x, np.exp(log_density - log_density.max()))


def oracle_1d_selfconsistent(
    kernel,
    span: float = 10.0,
    n_points: int = 20001,
    tol: float = 1e-12,
    max_iterations: int = 200,
) -> GridDensity1D:
    """Fixed point of the 1-D convolution drift v(x) = int b0(x - y) f(y) dy.

    Iterates f -> normalize(exp(-x^2/2 + int_0^x v(f, s) ds)) on a fine grid;
    the convolution is evaluated by FFT on the uniform grid.  Stops when the
    sup distance of successive densities falls below tol.
    """
    if n_points % 2 == 0:
        n_points += 1
    x = np.linspace(-span, span, n_points)
    h = x[1] - x[0]
    diffs = np.linspace(-2.0 * span, 2.0 * span, 2 * n_points - 1)
    kernel_samples = np.asarray(kernel(diffs), dtype=float)
    density = np.exp(-0.5 * x**2)
    density /= np.trapezoid(density, x)
    for _ in range(max_iterations):
        v = h * fftconvolve(kernel_samples, density, mode="valid")
        potential = cumulative_trapezoid(v, x, initial=0.0)
        potential -= potential[n_points // 2]
        log_density = -0.5 * x**2 + potential
        new = np.exp(log_density - log_density.max())
        new /= np.trapezoid(new, x)
        if float(np.max(np.abs(new - density))) < tol:
            return _normalize_1d(x, new)
        density = new
    raise NumericError(
        f"self-consistent 1-D oracle did not converge in {max_iterations} iterations"
    )


def l2_gamma_distance(rho, oracle: GridDensity1D) -> float:
    """L^2(gamma) distance between a 1-D chaos density and a grid oracle."""
    gamma_vals = oracle.gamma_density()
    spectral = rho.evaluate(oracle.x[:, None])
    phi = np.exp(-0.5 * oracle.x**2) / math.sqrt(2.0 * math.pi)
    return math.sqrt(float(np.trapezoid((spectral - gamma_vals) ** 2 * phi, oracle.x)))


@dataclass(frozen=True)
class SdeMoments:
    """Time-and-ensemble averaged moments with batch-means standard errors."""

    mean: np.ndarray
    mean_se: np.ndarray
    second: np.ndarray  # E[x_i x_j]
    second_se: np.ndarray
    n_batches: int
    weighted_moment: float | None = None
    weighted_moment_se: float | None = None


def oracle_sde(
    v,
    p_frozen,
    k: int,
    dt: float = 1e-3,
    n_steps: int = 2000,
    n_particles: int = 500,
    seed: int = 0,
    burn_in: float = 0.2,
    n_batches: int = 50,
    grid=None,
    weights=None,
) -> SdeMoments:
    """Euler-Maruyama sampling of dX = (-X + v(p, X)) dt + sqrt(2) dW.

    The drift is frozen at p_frozen; the stationary law of this diffusion is
    exactly what the linear equation characterizes.  Standard errors come
    from batch means over disjoint particle groups, which are genuinely
    independent replicates (time batches would understate the error whenever
    a batch is shorter than the autocorrelation time).  Identical seeds give
    bitwise identical estimates.
    """
    if dt > 0.01:
        raise ValueError("dt must be <= 0.01 for a trustworthy invariant law")
    if n_particles % n_batches != 0:
        raise ValueError("n_particles must be divisible by n_batches")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_particles, k))
    skip = int(burn_in * n_steps)
    kept = n_steps - skip
    group = n_particles // n_batches
    mean_batches = np.zeros((n_batches, k))
    second_batches = np.zeros((n_batches, k, k))
    weighted_batches = np.zeros(n_batches) if weights is not None else None
    sqrt_2dt = math.sqrt(2.0 * dt)
    for step in range(n_steps):
        drift = v.eval_v(p_frozen, x, grid) - x
        x = x + dt * drift + sqrt_2dt * rng.standard_normal((n_particles, k))
        if float(np.max(np.abs(x))) > BLOWUP_LIMIT:
            raise InstabilityError("particle blow-up detected; reduce dt")
        if step < skip:
            continue
        xr = x.reshape(n_batches, group, k)
        mean_batches += xr.mean(axis=1)
        second_batches += np.einsum("bgi,bgj->bij", xr, xr) / group
        if weighted_batches is not None:
            weighted_batches += (xr**2 @ np.asarray(weights)).mean(axis=1)
    mean_batches /= kept
    second_batches /= kept
    if weighted_batches is not None:
        weighted_batches /= kept
    sqrt_nb = math.sqrt(n_batches)
    return SdeMoments(
        mean=mean_batches.mean(axis=0),
        mean_se=mean_batches.std(axis=0, ddof=1) / sqrt_nb,
        second=second_batches.mean(axis=0),
        second_se=second_batches.std(axis=0, ddof=1) / sqrt_nb,
        n_batches=n_batches,
        weighted_moment=None if weighted_batches is None else float(weighted_batches.mean()),
        weighted_moment_se=None
        if weighted_batches is None
        else float(weighted_batches.std(ddof=1) / sqrt_nb),
    )


@dataclass(frozen=True)
class GridDensity2D:
    """Cell-centered Lebesgue density on a square box, mass 1."""

    x: np.ndarray  # (n,) cell centers, shared by both axes
    values: np.ndarray  # (n, n), first index x-coordinate

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    def marginal(self, axis: int) -> np.ndarray:
        """Lebesgue marginal density on the kept axis (0 keeps x_1)."""
        return self.values.sum(axis=1 - axis) * self.h


def _bernoulli(z: np.ndarray) -> np.ndarray:
    """B(z) = z / (e^z - 1), series near 0 for stability."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    small = np.abs(z) < 1e-5
    out[small] = 1.0 - z[small] / 2.0 + z[small] ** 2 / 12.0
    zb = z[~small]
    out[~small] = zb / np.expm1(zb)
    return out


def oracle_fd_2d(v, span: float = 6.0, n: int = 161) -> GridDensity2D:
    """Steady state of div(grad u - b u) = 0 on a box with zero-flux walls.

    Exponentially fitted (flux-upwinded) finite volumes keep the discrete
    density positive; the singular conservation system is closed by the
    unit-mass constraint.  v maps (m, 2) points to (m, 2) values; the full
    drift -x + v is formed internally.
    """
    h = 2.0 * span / n
    x = -span + h * (np.arange(n) + 0.5)
    idx = lambda i, j: i * n + j

    rows, cols, data = [], [], []

    def add(r, c, val):
        rows.append(r)
        cols.append(c)
        data.append(val)

    # faces between adjacent cells along each axis
    for axis in range(2):
        if axis == 0:
            face_pts = np.stack(
                [np.repeat(0.5 * (x[:-1] + x[1:]), n), np.tile(x, n - 1)], axis=1
            )
        else:
            face_pts = np.stack(
                [np.repeat(x, n - 1), np.tile(0.5 * (x[:-1] + x[1:]), n)], axis=1
            )
        b_face = np.asarray(v(face_pts), dtype=float) - face_pts
        w = b_face[:, axis] * h
        b_minus = _bernoulli(-w) / h**2  # multiplies the lower cell
        b_plus = _bernoulli(w) / h**2  # multiplies the upper cell
        for m in range(face_pts.shape[0]):
            if axis == 0:
                i, j = divmod(m, n)
                lo, hi = idx(i, j), idx(i + 1, j)
            else:
                i, j = divmod(m, n - 1)
                lo, hi = idx(i, j), idx(i, j + 1)
            # flux F = B(-w) u_lo - B(w) u_hi leaves lo and enters hi
            add(lo, lo, b_minus[m])
            add(lo, hi, -b_plus[m])
            add(hi, lo, -b_minus[m])
            add(hi, hi, b_plus[m])

    matrix = sp.csr_matrix((data, (rows, cols)), shape=(n * n, n * n))
    # rows sum to a singular conservation system; replace the last equation
    # with the unit-mass constraint
    matrix = matrix.tolil()
    matrix[n * n - 1, :] = h * h
    matrix = matrix.tocsr()
    rhs = np.zeros(n * n)
    rhs[-1] = 1.0
    u = spla.spsolve(matrix, rhs)
    if not np.all(np.isfinite(u)):
        raise NumericError("finite-difference steady state solve failed")
    total = float(u.sum() * h * h)
    return GridDensity2D(x=x, values=(u / total).reshape(n, n))
