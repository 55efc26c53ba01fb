"""Plane-wave traces, Herglotz superpositions, and trace-span fitting.

A Herglotz wave with square-integrable density h on the direction sphere,

    w(x) = integral_{S^2} h(beta) e^{i k beta . x} dbeta,

is an entire solution of the Helmholtz equation. Discretely, with a
DirectionGrid {beta_j, w_j},

    w(x) ~= sum_j w_j h_j e^{i k beta_j . x}.

The weighted trace matrix A[m, j] = sqrt(sigma_m) e^{i k beta_j . s_m}
sqrt(w_j) realizes the map h -> w|_S between discrete weighted L^2 spaces,
so its singular values approximate those of the continuous trace operator
independently of the grids (up to quadrature error). Fitting a target
surface function against the columns of A measures its distance to the
closure of the plane-wave trace span: the relative residual is 1 exactly
when the target is orthogonal to every trace, the signature of a lost
(rank-collapsed) direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .specfun import HarmonicIndex, sph_bessel_j, sph_harm
from .surface import DirectionGrid, SurfaceGrid

__all__ = [
    "HerglotzDensity",
    "TraceMatrix",
    "plane_wave_trace",
    "herglotz_eval",
    "helmholtz_residual",
    "assemble_trace_matrix",
    "funk_hecke",
    "fit_trace",
]


def _check_wavenumber(k: float) -> float:
    k = float(k)
    if not np.isfinite(k) or k <= 0:
        raise ValueError(f"wavenumber k must be positive, got {k}")
    return k


def _check_direction(beta) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (3,):
        raise ValueError("direction must be a 3-vector")
    if abs(np.linalg.norm(beta) - 1.0) > 1e-10:
        raise ValueError(f"direction must be a unit vector, |beta| = {np.linalg.norm(beta)!r}")
    return beta


@dataclass(frozen=True)
class HerglotzDensity:
    """Coefficients h_j of a Herglotz density, one per grid direction."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.coefficients, dtype=complex))
        if c.ndim != 1:
            raise ValueError("density coefficients must be a 1-d array")
        if not np.all(np.isfinite(c)):
            raise ValueError("density coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    def norm(self, dirs: DirectionGrid) -> float:
        """Discrete L^2(S^2) norm sqrt(sum_j w_j |h_j|^2)."""
        self._check_match(dirs)
        return float(np.sqrt(np.sum(dirs.weights * np.abs(self.coefficients) ** 2)))

    def _check_match(self, dirs: DirectionGrid):
        if len(self.coefficients) != dirs.n_directions:
            raise ValueError(
                f"density has {len(self.coefficients)} coefficients for "
                f"{dirs.n_directions} directions"
            )


@dataclass(frozen=True)
class TraceMatrix:
    """Weighted plane-wave trace matrix at fixed k.

    boundary[m, j] = sqrt(sigma_m) e^{i k beta_j . s_m} sqrt(w_j); the
    optional interior block carries e^{i k beta_j . x_p} at collocation
    points x_p with one uniform row weight sqrt(area(S)/P) so both blocks
    are commensurate.
    """

    k: float
    boundary: np.ndarray
    interior: np.ndarray | None = None

    @property
    def n_boundary(self) -> int:
        return self.boundary.shape[0]

    @property
    def n_directions(self) -> int:
        return self.boundary.shape[1]

    def stacked(self) -> np.ndarray:
        if self.interior is None:
            return self.boundary
        return np.vstack([self.boundary, self.interior])

    def gram(self) -> np.ndarray:
        """Hermitian PSD Gram matrix A^H A of the stacked matrix."""
        a = self.stacked()
        return a.conj().T @ a

    def dump_csv(self, path):
        """Row-major dump, complex entries as interleaved real/imag columns."""
        a = self.stacked()
        flat = np.ascontiguousarray(a).view(np.float64).reshape(a.shape[0], 2 * a.shape[1])
        with open(path, "w", encoding="utf-8") as f:
            for row in flat:
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")

    def dump_binary(self, path):
        """Row-major float64 dump, complex as interleaved real/imag."""
        a = self.stacked()
        np.ascontiguousarray(a).view(np.float64).tofile(path)


def plane_wave_trace(k: float, beta, grid: SurfaceGrid) -> np.ndarray:
    """Values e^{i k beta . s_m} of one plane wave at the surface nodes."""
    k = _check_wavenumber(k)
    beta = _check_direction(beta)
    return np.exp(1j * k * (grid.nodes @ beta))


def herglotz_eval(k: float, density: HerglotzDensity, dirs: DirectionGrid, points) -> np.ndarray:
    """Herglotz wave w(x) = sum_j w_j h_j e^{i k beta_j . x} at given points."""
    k = _check_wavenumber(k)
    density._check_match(dirs)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 3:
        raise ValueError("points must have shape (P, 3)")
    return np.exp(1j * k * (points @ dirs.directions.T)) @ (dirs.weights * density.coefficients)


def helmholtz_residual(
    k: float, density: HerglotzDensity, dirs: DirectionGrid, point, h_step: float
) -> float:
    """|(Delta_h + k^2) w| at one point, 7-point central-difference Laplacian.

    Second-order accurate: the residual of an exact Helmholtz solution is
    O(h_step^2 * k^4 * |w|).
    """
    k = _check_wavenumber(k)
    h = float(h_step)
    if h <= 0:
        raise ValueError(f"h_step must be positive, got {h_step}")
    point = np.asarray(point, dtype=float).reshape(3)
    stencil = [point]
    for axis in range(3):
        for sign in (1.0, -1.0):
            q = point.copy()
            q[axis] += sign * h
            stencil.append(q)
    vals = herglotz_eval(k, density, dirs, np.array(stencil))
    lap = (vals[1:].sum() - 6.0 * vals[0]) / (h * h)
    return float(abs(lap + k * k * vals[0]))


def assemble_trace_matrix(
    k: float,
    grid: SurfaceGrid,
    dirs: DirectionGrid,
    interior_points=None,
) -> TraceMatrix:
    """Assemble the weighted trace matrix, optionally with an interior block."""
    k = _check_wavenumber(k)
    sqrt_w = np.sqrt(dirs.weights)[None, :]
    boundary = np.sqrt(grid.weights)[:, None] * np.exp(
        1j * k * (grid.nodes @ dirs.directions.T)
    ) * sqrt_w
    interior = None
    if interior_points is not None:
        pts = np.atleast_2d(np.asarray(interior_points, dtype=float))
        if pts.shape[1] != 3:
            raise ValueError("interior points must have shape (P, 3)")
        uniform = np.sqrt(grid.area / len(pts))
        interior = uniform * np.exp(1j * k * (pts @ dirs.directions.T)) * sqrt_w
    return TraceMatrix(k=k, boundary=boundary, interior=interior)


def funk_hecke(idx: HarmonicIndex, k: float, R: float, beta) -> complex:
    """Closed form of the sphere pairing of Y_lm against one plane wave:

        integral_{|s|=R} Y_lm(s_hat) e^{i k beta . s} ds
            = 4 pi R^2 i^l j_l(kR) Y_lm(beta)

    The conjugation convention (Y_lm(beta), not its conjugate) is pinned by
    matching direct quadrature at a non-symmetric index; see the test suite.
    """
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    k = _check_wavenumber(k)
    R = float(R)
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")
    beta = _check_direction(beta)
    theta = np.arccos(np.clip(beta[2], -1.0, 1.0))
    phi = np.arctan2(beta[1], beta[0])
    return complex(
        4 * np.pi * R * R * (1j**idx.l) * sph_bessel_j(idx.l, k * R) * sph_harm(idx, theta, phi)
    )


def fit_trace(
    k: float,
    grid: SurfaceGrid,
    target,
    dirs: DirectionGrid,
    ridge: float | None = None,
):
    """Least-squares fit of a surface target by plane-wave traces.

    Solves min_h ||A h - target*sqrt(sigma)||^2 + ridge*||h||^2 over the
    weighted density coefficients and returns (relative residual, density).
    ridge=None applies the default 1e-12 * ||A||^2; ridge=0 solves by
    truncated-SVD pseudo-inverse. A relative residual of 1 means the target
    is orthogonal to the whole trace span -- totality failed in that
    direction.
    """
    k = _check_wavenumber(k)
    target = np.asarray(target, dtype=complex)
    if target.shape != (grid.n_nodes,):
        raise ValueError("target length does not match grid")
    if ridge is not None and ridge < 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    b = target * np.sqrt(grid.weights)
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        raise ValueError("zero target: relative residual undefined")
    A = assemble_trace_matrix(k, grid, dirs).boundary
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    c = U.conj().T @ b
    if ridge is None:
        ridge = 1e-12 * s[0] ** 2
    if ridge == 0:
        keep = s > s[0] * 1e-14
        h_weighted = Vh[keep].conj().T @ (c[keep] / s[keep])
    else:
        h_weighted = Vh.conj().T @ (s / (s * s + ridge) * c)
    residual = float(np.linalg.norm(A @ h_weighted - b) / b_norm)
    # matrix unknowns are sqrt(w_j) h_j; undo the column weighting
    density = HerglotzDensity(h_weighted / np.sqrt(dirs.weights))
    return residual, density
