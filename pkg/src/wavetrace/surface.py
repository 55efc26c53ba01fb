"""Quadrature-bearing discretizations of a closed surface S and of S^2.

Both grids use a product rule: Gauss-Legendre nodes in cos(theta) times a
uniform (trapezoidal) rule in phi. The rule integrates spherical harmonics
exactly up to degree min(2*n_theta - 1, n_phi - 1) and converges spectrally
for analytic integrands, which is what the plane-wave pairings need.

Surfaces are star-shaped, r = rho(theta, phi) about the origin; area
elements and outward normals come from the analytic tangent vectors of the
parametrization, so the quadrature keeps spectral accuracy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .specfun import HarmonicIndex, sph_harm_with_grad

__all__ = [
    "SurfaceGrid",
    "DirectionGrid",
    "DegenerateSurfaceError",
    "make_sphere",
    "make_star_surface",
    "make_direction_grid",
    "integrate_surface",
    "surface_radius",
    "grid_to_json",
    "grid_from_json",
]


class DegenerateSurfaceError(ValueError):
    """Raised when a star-shaped radius collapses toward or below zero."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SurfaceGrid:
    """Discretized closed surface: nodes, area weights, outward unit normals.

    Attributes
    ----------
    nodes : (N, 3) float array
    weights : (N,) positive area-element weights, summing to area(S)
    normals : (N, 3) outward unit normals
    descriptor : dict with the shape kind, parameters and resolution
    """

    nodes: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        nodes = _readonly(np.asarray(self.nodes, dtype=float))
        weights = _readonly(np.asarray(self.weights, dtype=float))
        normals = _readonly(np.asarray(self.normals, dtype=float))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "normals", normals)
        n = len(weights)
        if nodes.shape != (n, 3) or normals.shape != (n, 3):
            raise ValueError("nodes/weights/normals size mismatch")
        if np.any(weights <= 0):
            raise ValueError("area weights must be positive")
        norm_dev = np.abs(np.linalg.norm(normals, axis=1) - 1.0).max()
        if norm_dev > 1e-12:
            raise ValueError(f"normals not unit vectors (deviation {norm_dev:.2e})")

    @property
    def n_nodes(self) -> int:
        return len(self.weights)

    @property
    def area(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class DirectionGrid:
    """Quadrature on the unit sphere of directions: sum of weights = 4*pi."""

    directions: np.ndarray
    weights: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        directions = _readonly(np.asarray(self.directions, dtype=float))
        weights = _readonly(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "weights", weights)
        if directions.shape != (len(weights), 3):
            raise ValueError("directions/weights size mismatch")
        if np.any(weights <= 0):
            raise ValueError("direction weights must be positive")
        dir_dev = np.abs(np.linalg.norm(directions, axis=1) - 1.0).max()
        if dir_dev > 1e-12:
            raise ValueError(f"directions not unit vectors (deviation {dir_dev:.2e})")
        wsum = weights.sum()
        if abs(wsum - 4 * np.pi) > 1e-12 * 4 * np.pi:
            raise ValueError(f"direction weights must sum to 4*pi, got {wsum!r}")

    @property
    def n_directions(self) -> int:
        return len(self.weights)


def _product_angles(n_theta: int, n_phi: int):
    """GL nodes in u=cos(theta) x uniform phi; returns flat theta, phi, du-dphi weights."""
    if n_theta < 4:
        raise ValueError(f"n_theta must be >= 4, got {n_theta}")
    if n_phi < 8:
        raise ValueError(f"n_phi must be >= 8, got {n_phi}")
    u, wu = leggauss(n_theta)
    theta = np.arccos(u)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(wu, np.full(n_phi, 2 * np.pi / n_phi))
    return T.ravel(), P.ravel(), W.ravel()


def _unit_vectors(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _normalize_perturbation(perturbation):
    out = []
    for item in perturbation:
        if len(item) == 2 and isinstance(item[0], HarmonicIndex):
            idx, eps = item
        else:
            l, m, eps = item
            idx = HarmonicIndex(int(l), int(m))
        out.append((idx, float(eps)))
    return out


def _star_radius_terms(theta, phi, R0, perturbation):
    """r(theta,phi) = R0 (1 + sum eps Re Y_lm) and its angular derivatives."""
    r = np.ones_like(theta)
    rt = np.zeros_like(theta)
    rp = np.zeros_like(theta)
    for idx, eps in perturbation:
        val, dth, dph = sph_harm_with_grad(idx, theta, phi)
        r = r + eps * np.real(val)
        rt = rt + eps * np.real(dth)
        rp = rp + eps * np.real(dph)
    return R0 * r, R0 * rt, R0 * rp


def make_sphere(R: float, n_theta: int, n_phi: int) -> SurfaceGrid:
    """Sphere of radius R: GL x uniform product grid, radial normals."""
    if R <= 0:
        raise ValueError(f"radius must be positive, got {R}")
    theta, phi, w = _product_angles(n_theta, n_phi)
    shat = _unit_vectors(theta, phi)
    desc = {"kind": "sphere", "radius": float(R), "n_theta": int(n_theta), "n_phi": int(n_phi)}
    return SurfaceGrid(nodes=R * shat, weights=R * R * w, normals=shat, descriptor=desc)


def make_star_surface(R0: float, perturbation, n_theta: int, n_phi: int) -> SurfaceGrid:
    """Star-shaped surface r = R0 (1 + sum eps Re Y_lm).

    Area elements and normals come from the closed-form partial derivatives
    of the parametrization x(theta,phi) = r(theta,phi) * s_hat(theta,phi):

        dS = |x_theta x x_phi| dtheta dphi,  N = (x_theta x x_phi) / |.|

    Raises DegenerateSurfaceError when the radius drops below 0.2*R0
    anywhere on the grid.
    """
    if R0 <= 0:
        raise ValueError(f"base radius must be positive, got {R0}")
    pert = [(idx, eps) for idx, eps in _normalize_perturbation(perturbation) if eps != 0.0]
    if not pert:
        return make_sphere(R0, n_theta, n_phi)  # canonical: zero perturbation IS the sphere
    theta, phi, w = _product_angles(n_theta, n_phi)
    r, rt, rp = _star_radius_terms(theta, phi, R0, pert)
    if np.any(r < 0.2 * R0):
        raise DegenerateSurfaceError(
            f"radius drops to {r.min():.3g} (< 0.2*R0 = {0.2 * R0:.3g}); surface degenerate"
        )
    st, ct = np.sin(theta), np.cos(theta)
    shat = _unit_vectors(theta, phi)
    theta_hat = np.stack([ct * np.cos(phi), ct * np.sin(phi), -st], axis=-1)
    phi_hat = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
    x_theta = rt[:, None] * shat + r[:, None] * theta_hat
    x_phi = rp[:, None] * shat + (r * st)[:, None] * phi_hat
    cross = np.cross(x_theta, x_phi)
    jac = np.linalg.norm(cross, axis=1)  # = |x_theta x x_phi|, equals r^2 sin(theta) on the sphere
    desc = {
        "kind": "star",
        "R0": float(R0),
        "perturbation": [[idx.l, idx.m, eps] for idx, eps in pert],
        "n_theta": int(n_theta),
        "n_phi": int(n_phi),
    }
    # quadrature weight is for du dphi; dtheta = du / sin(theta)
    return SurfaceGrid(
        nodes=r[:, None] * shat,
        weights=w * jac / st,
        normals=cross / jac[:, None],
        descriptor=desc,
    )


def make_direction_grid(n_theta: int, n_phi: int) -> DirectionGrid:
    """Product quadrature on the unit sphere of directions.

    Exact for spherical polynomials of degree <= min(2*n_theta-1, n_phi-1).
    """
    theta, phi, w = _product_angles(n_theta, n_phi)
    desc = {"kind": "product", "n_theta": int(n_theta), "n_phi": int(n_phi)}
    return DirectionGrid(directions=_unit_vectors(theta, phi), weights=w, descriptor=desc)


def integrate_surface(grid: SurfaceGrid, values) -> complex:
    """Discrete surface integral sum_m sigma_m * values_m."""
    values = np.asarray(values)
    if values.shape != (grid.n_nodes,):
        raise ValueError(f"values length {values.shape} does not match grid ({grid.n_nodes},)")
    return complex(np.sum(grid.weights * values))


def surface_radius(descriptor: dict, theta, phi):
    """Radius function rho(theta, phi) of a sphere or star descriptor."""
    kind = descriptor.get("kind")
    theta = np.asarray(theta, dtype=float)
    if kind == "sphere":
        return np.full_like(theta, descriptor["radius"])
    if kind == "star":
        pert = _normalize_perturbation(descriptor["perturbation"])
        r, _, _ = _star_radius_terms(theta, np.asarray(phi, dtype=float), descriptor["R0"], pert)
        return r
    raise ValueError(f"no radius function for surface kind {kind!r}")


def grid_to_json(grid) -> str:
    """Serialize a SurfaceGrid or DirectionGrid to JSON for reproducibility."""
    if isinstance(grid, SurfaceGrid):
        payload = {
            "type": "SurfaceGrid",
            "descriptor": grid.descriptor,
            "nodes": grid.nodes.tolist(),
            "weights": grid.weights.tolist(),
            "normals": grid.normals.tolist(),
        }
    elif isinstance(grid, DirectionGrid):
        payload = {
            "type": "DirectionGrid",
            "descriptor": grid.descriptor,
            "directions": grid.directions.tolist(),
            "weights": grid.weights.tolist(),
        }
    else:
        raise TypeError(f"cannot serialize {type(grid).__name__}")
    return json.dumps(payload, sort_keys=True)


def grid_from_json(text: str):
    payload = json.loads(text)
    if payload.get("type") == "SurfaceGrid":
        return SurfaceGrid(
            nodes=np.array(payload["nodes"]),
            weights=np.array(payload["weights"]),
            normals=np.array(payload["normals"]),
            descriptor=payload.get("descriptor", {}),
        )
    if payload.get("type") == "DirectionGrid":
        return DirectionGrid(
            directions=np.array(payload["directions"]),
            weights=np.array(payload["weights"]),
            descriptor=payload.get("descriptor", {}),
        )
    raise ValueError(f"unknown grid type {payload.get('type')!r}")
