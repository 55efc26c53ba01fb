"""Dirichlet-eigenvalue oracles and explicit ball eigenfunctions.

Two independent detectors of the interior Dirichlet spectrum:

* analytic ball spectrum: k = z_{l,n}/R where j_l(z_{l,n}) = 0, each with
  multiplicity 2l+1, eigenfunctions u = j_l(k r) Y_lm(x_hat);
* the single-layer boundary operator with kernel e^{ikr}/(4 pi r), whose
  kernel degenerates exactly at interior Dirichlet eigenvalues.

The single-layer Nystrom discretization splits the kernel into a smooth
part (e^{ikr} - 1)/(4 pi r), extended by ik/(4 pi) on the diagonal, plus
the static part 1/(4 pi r). The static part is handled by singularity
subtraction: the diagonal entry is g(x_m) - sum_{p != m} sigma_p K0(r_mp),
where g(x) = integral_S ds(y)/(4 pi |x - y|) is the static row integral --
exactly R on a sphere, and computed once per star surface by polar
quadrature in the parameter plane (the polar Jacobian cancels the 1/r
singularity).

Because the continuous operator is compact, raw smallest singular values
of a fine discretization are dominated by unresolved high-degree junk at
every k. Eigenvalue sweeps therefore compress the matrix onto a
bandlimited angular subspace (orthonormalized Y_lm, l <= L, in surface
weights) before taking sigma_min; dips of that indicator mark the
spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .specfun import (
    HarmonicIndex,
    bessel_zero,
    sph_bessel_j,
    sph_bessel_j_deriv,
    sph_hankel1,
    sph_harm,
)
from .surface import SurfaceGrid, _star_radius_terms, _normalize_perturbation

__all__ = [
    "EigenvalueRecord",
    "UnsupportedSurfaceError",
    "ball_dirichlet_eigs",
    "ball_eigenfunction",
    "eigenfunction_normal_derivative",
    "single_layer_symbol",
    "static_row_integral",
    "single_layer_matrix",
    "bandlimited_basis",
    "make_single_layer_indicator",
    "single_layer_eig_sweep",
]


class UnsupportedSurfaceError(ValueError):
    """Raised when an operation needs a surface kind it does not support."""


@dataclass(frozen=True)
class EigenvalueRecord:
    """One Dirichlet eigenvalue candidate; k is stored, k^2 is the eigenvalue."""

    k: float
    multiplicity: int
    source: str
    l: int | None = None
    n: int | None = None

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"eigenvalue wavenumber must be positive, got {self.k}")
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be >= 1, got {self.multiplicity}")
        if self.source not in ("ball-analytic", "trace-sweep", "single-layer"):
            raise ValueError(f"unknown source {self.source!r}")

    def to_dict(self) -> dict:
        return {
            "k": float(self.k),
            "l": self.l,
            "n": self.n,
            "multiplicity": int(self.multiplicity),
            "source": self.source,
        }


def ball_dirichlet_eigs(R: float, k_max: float) -> list[EigenvalueRecord]:
    """All ball Dirichlet eigenvalues k = z_{l,n}/R <= k_max, ascending.

    Degrees are scanned while z_{l,1} <= k_max*R; since z_{l,1} > l the scan
    terminates and misses nothing.
    """
    R = float(R)
    k_max = float(k_max)
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")
    if k_max <= 0:
        raise ValueError(f"k_max must be positive, got {k_max}")
    records = []
    cap = k_max * R
    l = 0
    while True:
        z = bessel_zero(l, 1)
        if z > cap:
            if l > cap:  # z_{l,1} > l: no higher degree can fit
                break
            l += 1
            continue
        n = 1
        while z <= cap:
            records.append(
                EigenvalueRecord(k=z / R, multiplicity=2 * l + 1, source="ball-analytic", l=l, n=n)
            )
            n += 1
            z = bessel_zero(l, n)
        l += 1
    records.sort(key=lambda rec: rec.k)
    return records


def _angles_of(points: np.ndarray):
    r = np.linalg.norm(points, axis=-1)
    safe = np.where(r > 0, r, 1.0)
    theta = np.arccos(np.clip(points[..., 2] / safe, -1.0, 1.0))
    phi = np.arctan2(points[..., 1], points[..., 0])
    return r, theta, phi


def ball_eigenfunction(idx: HarmonicIndex, n: int, R: float, points) -> np.ndarray:
    """u(x) = j_l(k r) Y_lm(x_hat) with k = z_{l,n}/R; vanishes on |x| = R."""
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    R = float(R)
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r, theta, phi = _angles_of(points)
    if np.any(r > R * (1 + 1e-12)):
        raise ValueError(f"point outside the closed ball of radius {R}")
    k = bessel_zero(idx.l, n) / R
    return sph_bessel_j(idx.l, k * r) * sph_harm(idx, theta, phi)


def eigenfunction_normal_derivative(
    idx: HarmonicIndex, n: int, R: float, grid: SurfaceGrid
) -> np.ndarray:
    """Outward normal derivative u_N = k j_l'(kR) Y_lm on a sphere of radius R.

    Nonvanishing by construction: j_l' cannot share a zero with j_l.
    """
    if not isinstance(idx, HarmonicIndex):
        idx = HarmonicIndex(*idx)
    desc = grid.descriptor
    if desc.get("kind") != "sphere" or abs(desc.get("radius", -1.0) - R) > 1e-12 * max(R, 1.0):
        raise UnsupportedSurfaceError(
            "normal derivative of a ball eigenfunction needs a sphere grid of matching radius"
        )
    k = bessel_zero(idx.l, n) / R
    _, theta, phi = _angles_of(grid.nodes)
    return k * sph_bessel_j_deriv(idx.l, k * R) * sph_harm(idx, theta, phi)


def single_layer_symbol(l: int, k: float, R: float) -> complex:
    """Eigenvalue of the single-layer operator on the sphere acting on Y_lm:

        lambda_l(k, R) = i k R^2 j_l(kR) h_l^(1)(kR)

    A derived oracle (validated against the Nystrom matrix), zero exactly
    when j_l(kR) = 0.
    """
    k = float(k)
    R = float(R)
    if k <= 0 or R <= 0:
        raise ValueError("k and R must be positive")
    return complex(1j * k * R * R * sph_bessel_j(l, k * R) * sph_hankel1(l, k * R))


def _rectangle_polar_segments(t0: float, p0: float):
    """Corner angles of the rectangle [0,pi] x [p0-pi, p0+pi] seen from (t0,p0)."""
    corners = [
        (0.0, p0 - np.pi),
        (0.0, p0 + np.pi),
        (np.pi, p0 - np.pi),
        (np.pi, p0 + np.pi),
    ]
    angles = sorted(np.arctan2(c[1] - p0, c[0] - t0) % (2 * np.pi) for c in corners)
    return np.array(angles + [angles[0] + 2 * np.pi])


def static_row_integral(grid: SurfaceGrid, n_alpha: int = 32, n_rad: int = 32) -> np.ndarray:
    """g(x_m) = integral_S ds(y) / (4 pi |x_m - y|) for every node.

    Sphere:  exact closed form g = R.
    Star:    polar quadrature around the singular parameter point; the
             polar Jacobian rho cancels the 1/|x-y| singularity, leaving a
             bounded integrand.
    """
    desc = grid.descriptor
    kind = desc.get("kind")
    if kind == "sphere":
        return np.full(grid.n_nodes, float(desc["radius"]))
    if kind != "star":
        raise UnsupportedSurfaceError(f"static row integral needs a sphere or star grid, got {kind!r}")
    R0 = float(desc["R0"])
    pert = _normalize_perturbation(desc["perturbation"])
    ga, wa = leggauss(n_alpha)
    gr, wr = leggauss(n_rad)
    _, theta0, phi0 = _angles_of(grid.nodes)
    out = np.empty(grid.n_nodes)
    for m in range(grid.n_nodes):
        t0, p0 = theta0[m], phi0[m]
        x = grid.nodes[m]
        total = 0.0
        segments = _rectangle_polar_segments(t0, p0)
        for a0, a1 in zip(segments[:-1], segments[1:]):
            if a1 - a0 < 1e-13:
                continue
            alpha = 0.5 * (a0 + a1) + 0.5 * (a1 - a0) * ga
            w_alpha = 0.5 * (a1 - a0) * wa
            ca, sa = np.cos(alpha), np.sin(alpha)
            # ray length to the rectangle boundary (phi edges at p0 +- pi)
            with np.errstate(divide="ignore"):
                lim = np.full_like(ca, np.inf)
                lim = np.minimum(lim, np.where(ca > 1e-14, (np.pi - t0) / ca, np.inf))
                lim = np.minimum(lim, np.where(ca < -1e-14, -t0 / ca, np.inf))
                lim = np.minimum(lim, np.where(sa > 1e-14, np.pi / sa, np.inf))
                lim = np.minimum(lim, np.where(sa < -1e-14, -np.pi / sa, np.inf))
            rho = 0.5 * lim[:, None] * (gr[None, :] + 1.0)
            w_rho = 0.5 * lim[:, None] * wr[None, :]
            tq = np.clip(t0 + rho * ca[:, None], 0.0, np.pi).ravel()
            pq = (p0 + rho * sa[:, None]).ravel()
            r, rt, rp = _star_radius_terms(tq, pq, R0, pert)
            st, ct = np.sin(tq), np.cos(tq)
            y = r[:, None] * np.stack([st * np.cos(pq), st * np.sin(pq), ct], axis=-1)
            jac = r * np.sqrt((r * r + rt * rt) * st * st + rp * rp)  # |x_theta x x_phi|
            dist = np.linalg.norm(y - x[None, :], axis=1)
            f = np.where(dist > 1e-14, jac / (4 * np.pi * np.maximum(dist, 1e-300)), 0.0)
            ray_integrals = (f.reshape(rho.shape) * rho * w_rho).sum(axis=1)
            total += float((ray_integrals * w_alpha).sum())
        out[m] = total
    return out


def single_layer_matrix(
    k: float, grid: SurfaceGrid, static_integral: np.ndarray | None = None
) -> np.ndarray:
    """Symmetrically weighted Nystrom matrix of the single-layer operator.

    Off-diagonal: sqrt(sigma_m) e^{ik r}/(4 pi r) sqrt(sigma_p).
    Diagonal: ik sigma_m/(4 pi) (smooth part) plus the subtracted static
    row integral, so the static kernel is integrated exactly against
    constants. Symmetric (not Hermitian), spectrum equal to the plain
    Nystrom K diag(sigma).
    """
    k = float(k)
    if k <= 0:
        raise ValueError(f"wavenumber k must be positive, got {k}")
    if static_integral is None:
        static_integral = static_row_integral(grid)
    nodes, w = grid.nodes, grid.weights
    dist = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)
    kern = np.exp(1j * k * dist) / (4 * np.pi * dist)
    static = 1.0 / (4 * np.pi * dist)
    sw = np.sqrt(w)
    A = sw[:, None] * kern * sw[None, :]
    static_offdiag_rowsum = (static * w[None, :]).sum(axis=1) - static.diagonal() * w
    diag = 1j * k * w / (4 * np.pi) + (static_integral - static_offdiag_rowsum)
    idx = np.arange(len(w))
    A[idx, idx] = diag
    return A


def bandlimited_basis(grid: SurfaceGrid, band_limit: int) -> np.ndarray:
    """Orthonormal basis (in surface weights) of the angular harmonics l <= L."""
    _, theta, phi = _angles_of(grid.nodes)
    cols = []
    for l in range(band_limit + 1):
        for m in range(-l, l + 1):
            cols.append(sph_harm(HarmonicIndex(l, m), theta, phi))
    Y = np.array(cols).T * np.sqrt(grid.weights)[:, None]
    Q, _ = np.linalg.qr(Y)
    return Q


def make_single_layer_indicator(
    grid: SurfaceGrid,
    band_limit: int = 8,
    n_alpha: int = 32,
    n_rad: int = 32,
):
    """Callable k -> sigma_min of the bandlimit-compressed single-layer matrix.

    Precomputes the node distances, the static row integral and the
    bandlimited basis once; each evaluation only rebuilds the oscillatory
    kernel.
    """
    g = static_row_integral(grid, n_alpha=n_alpha, n_rad=n_rad)
    nodes, w = grid.nodes, grid.weights
    dist = np.linalg.norm(nodes[:, None, :] - nodes[None, :, :], axis=-1)
    np.fill_diagonal(dist, 1.0)
    static = 1.0 / (4 * np.pi * dist)
    static_offdiag_rowsum = (static * w[None, :]).sum(axis=1) - static.diagonal() * w
    sw = np.sqrt(w)
    Q = bandlimited_basis(grid, band_limit)
    idx = np.arange(len(w))

    def singular_values(k: float) -> np.ndarray:
        kern = np.exp(1j * float(k) * dist) / (4 * np.pi * dist)
        A = sw[:, None] * kern * sw[None, :]
        A[idx, idx] = 1j * float(k) * w / (4 * np.pi) + (g - static_offdiag_rowsum)
        B = Q.conj().T @ (A @ Q)
        return np.linalg.svd(B, compute_uv=False)

    def indicator(k: float) -> float:
        return float(singular_values(k)[-1])

    indicator.singular_values = singular_values
    return indicator


def single_layer_eig_sweep(
    k_lo: float,
    k_hi: float,
    n_samples: int,
    grid: SurfaceGrid,
    band_limit: int = 8,
):
    """Sweep sigma_min of the compressed single-layer operator over k.

    Returns a SweepResult whose dips mark Dirichlet eigenvalue candidates;
    refine with sweep.refine_dip(indicator=...) for sharp locations.
    """
    from .sweep import SweepResult, detect_dips

    if not (0 < k_lo < k_hi):
        raise ValueError(f"need 0 < k_lo < k_hi, got [{k_lo}, {k_hi}]")
    if n_samples < 2:
        raise ValueError(f"need at least 2 samples, got {n_samples}")
    indicator = make_single_layer_indicator(grid, band_limit=band_limit)
    ks = np.linspace(k_lo, k_hi, n_samples)
    vals = np.array([indicator(k) for k in ks])
    result = SweepResult(
        k_samples=ks,
        indicator=vals,
        dips=[],
        config={
            "indicator": "single-layer",
            "surface": grid.descriptor,
            "band_limit": band_limit,
            "k_lo": float(k_lo),
            "k_hi": float(k_hi),
            "n_samples": int(n_samples),
        },
        bounded_by_one=False,
    )
    return SweepResult(
        k_samples=result.k_samples,
        indicator=result.indicator,
        dips=detect_dips(result),
        config=result.config,
        bounded_by_one=False,
    )
