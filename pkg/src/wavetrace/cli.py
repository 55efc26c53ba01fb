"""Command-line front-end: sweeps, eigenvalue oracles, verification, fits.

Every artifact embeds the full run configuration and seed, so any CSV or
JSON output can be regenerated byte-identically. Exit codes follow the CI
contract: 0 success, 1 verification failure, 2 usage/config error,
3 numerical failure.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click
import numpy as np

from .herglotz import fit_trace
from .specfun import HarmonicIndex, sph_harm
from .spectra import (
    ball_dirichlet_eigs,
    EigenvalueRecord,
    make_single_layer_indicator,
    single_layer_eig_sweep,
)
from .surface import (
    DegenerateSurfaceError,
    make_direction_grid,
    make_sphere,
    make_star_surface,
)
from .sweep import (
    BracketError,
    IllPosedIndicatorError,
    estimate_multiplicity,
    golden_section_minimize,
    refine_dip,
    seed_interior_points,
    sweep_k,
    Dip,
    SweepResult,
)
from .verify import InconclusiveCheckError, run_default_suite

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    IllPosedIndicatorError,
    BracketError,
    InconclusiveCheckError,
    np.linalg.LinAlgError,
)


@dataclass
class RunConfig:
    """Everything a run needs; embedded verbatim in every artifact."""

    surface: str = "ball"
    radius: float = 1.0
    coefficients: list = field(default_factory=list)  # [[l, m, eps], ...]
    n_theta: int | None = None
    n_phi: int | None = None
    dirs_n_theta: int | None = None
    dirs_n_phi: int | None = None
    k_min: float = 3.0
    k_max: float = 6.5
    samples: int = 350
    seed: int = 0
    interior_count: int | None = None
    depth_ratio: float = 0.1
    refine_tol: float = 1e-4
    gap_ratio: float = 10.0
    ridge: float | None = None
    band_limit: int = 8
    threads: int | None = None

    def resolved(self) -> "RunConfig":
        """Fill resolution defaults from the wavenumber range (k R rules)."""
        cfg = RunConfig(**asdict(self))
        k_scale = cfg.k_max * cfg.radius
        if cfg.n_theta is None:
            cfg.n_theta = max(20, math.ceil(2 * k_scale) + 10)
        if cfg.n_phi is None:
            cfg.n_phi = 2 * cfg.n_theta
        if cfg.dirs_n_theta is None:
            cfg.dirs_n_theta = max(8, math.ceil(k_scale) + 5)
        if cfg.dirs_n_phi is None:
            cfg.dirs_n_phi = 2 * cfg.dirs_n_theta
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config file {path} must hold a JSON object")
    return data


def _merge_config(ctx: click.Context, config_path: str | None, **flags) -> RunConfig:
    """Precedence: explicit flags > config file > dataclass defaults."""
    cfg = RunConfig()
    file_values = _load_config_file(config_path)
    for key, value in file_values.items():
        if not hasattr(cfg, key):
            raise click.UsageError(f"unknown config key {key!r}")
        setattr(cfg, key, value)
    for key, value in flags.items():
        source = ctx.get_parameter_source(key)
        if source is not None and source.name == "COMMANDLINE":
            setattr(cfg, key, value)
        elif value is not None and key not in file_values and getattr(cfg, key, None) is None:
            setattr(cfg, key, value)
    return cfg


def _parse_coef(values) -> list:
    out = []
    for text in values:
        parts = text.split(",")
        if len(parts) != 3:
            raise click.UsageError(f"--coef wants 'l,m,eps', got {text!r}")
        try:
            l, m, eps = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise click.UsageError(f"--coef wants 'l,m,eps' numbers, got {text!r}")
        if abs(m) > l:
            raise click.UsageError(f"--coef needs |m| <= l, got l={l}, m={m}")
        out.append([l, m, eps])
    return out


def _parse_target(text: str) -> HarmonicIndex:
    parts = text.split(",")
    if len(parts) != 2:
        raise click.UsageError(f"--target wants 'l,m', got {text!r}")
    try:
        l, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise click.UsageError(f"--target wants integers 'l,m', got {text!r}")
    try:
        return HarmonicIndex(l, m)
    except ValueError as exc:
        raise click.UsageError(str(exc))


def _build_surface(cfg: RunConfig):
    try:
        if cfg.surface == "ball":
            return make_sphere(cfg.radius, cfg.n_theta, cfg.n_phi)
        if cfg.surface == "star":
            return make_star_surface(cfg.radius, cfg.coefficients, cfg.n_theta, cfg.n_phi)
    except (DegenerateSurfaceError, ValueError) as exc:
        raise click.UsageError(f"bad surface configuration: {exc}")
    raise click.UsageError(f"unknown surface kind {cfg.surface!r}")


def _build_dirs(cfg: RunConfig):
    try:
        return make_direction_grid(cfg.dirs_n_theta, cfg.dirs_n_phi)
    except ValueError as exc:
        raise click.UsageError(f"bad direction grid: {exc}")


def _check_writable(path: str):
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise click.UsageError(f"output path {path} is not writable")


def _write_text(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def _json_dumps(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


@click.group()
def main():
    """Plane-wave trace completeness testbed."""


@main.command("sweep")
@click.option("--surface", type=click.Choice(["ball", "star"]), default="ball", show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--coef", "coefficients", multiple=True, help="Star perturbation 'l,m,eps'; repeatable.")
@click.option("--ntheta", "n_theta", type=int, default=None, help="Surface polar resolution.")
@click.option("--nphi", "n_phi", type=int, default=None, help="Surface azimuthal resolution.")
@click.option("--dirs-ntheta", "dirs_n_theta", type=int, default=None)
@click.option("--dirs-nphi", "dirs_n_phi", type=int, default=None)
@click.option("--kmin", "k_min", type=float, default=3.0, show_default=True)
@click.option("--kmax", "k_max", type=float, default=6.5, show_default=True)
@click.option("--samples", type=int, default=350, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--interior-count", type=int, default=None)
@click.option("--depth-ratio", type=float, default=0.1, show_default=True)
@click.option("--refine-tol", type=float, default=1e-4, show_default=True)
@click.option("--threads", type=int, default=None, help="Cap on parallel k evaluations.")
@click.option("--out-csv", type=str, default="sweep.csv", show_default=True)
@click.option("--out-json", type=str, default="sweep.json", show_default=True)
@click.option("--config", "config_path", type=str, default=None, help="JSON config file.")
@click.pass_context
def cmd_sweep(ctx, coefficients, out_csv, out_json, config_path, **flags):
    """Sweep the completeness indicator over k and report dips."""
    flags["coefficients"] = _parse_coef(coefficients)
    cfg = _merge_config(ctx, config_path, **flags).resolved()
    if not (0 < cfg.k_min < cfg.k_max):
        raise click.UsageError(f"need 0 < kmin < kmax, got [{cfg.k_min}, {cfg.k_max}]")
    if cfg.samples < 2:
        raise click.UsageError(f"need at least 2 samples, got {cfg.samples}")
    _check_writable(out_csv)
    _check_writable(out_json)
    grid = _build_surface(cfg)
    dirs = _build_dirs(cfg)
    try:
        result = sweep_k(
            cfg.k_min,
            cfg.k_max,
            cfg.samples,
            grid,
            dirs,
            interior_seed=cfg.seed,
            interior_count=cfg.interior_count,
            depth_ratio=cfg.depth_ratio,
            threads=cfg.threads,
        )
        interior = seed_interior_points(
            grid, cfg.interior_count or max(2 * dirs.n_directions, 500), cfg.seed
        )
        half_width = 2.0 * (cfg.k_max - cfg.k_min) / (cfg.samples - 1)
        refined = []
        for dip in result.dips:
            k_star, ind_min = refine_dip(
                dip.k,
                half_width,
                grid,
                dirs,
                interior_seed=cfg.seed,
                tol=cfg.refine_tol,
                interior_count=cfg.interior_count,
            )
            mult = estimate_multiplicity(k_star, grid, dirs, interior, gap_ratio=cfg.gap_ratio)
            refined.append(Dip(k=k_star, indicator=ind_min, multiplicity=mult))
    except NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    final = SweepResult(
        k_samples=result.k_samples,
        indicator=result.indicator,
        dips=refined,
        config={**result.config, "run_config": cfg.to_dict()},
    )
    _write_text(out_csv, final.to_csv_text())
    _write_text(out_json, final.to_json())
    click.echo(f"{len(refined)} dip(s) in [{cfg.k_min}, {cfg.k_max}]:")
    click.echo("k_refined        indicator    multiplicity")
    for dip in refined:
        click.echo(f"{dip.k:<16.10g} {dip.indicator:<12.3e} {dip.multiplicity}")
    sys.exit(EXIT_OK)


@main.command("eigs")
@click.option("--surface", type=click.Choice(["ball", "star"]), default="ball", show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--coef", "coefficients", multiple=True)
@click.option("--method", type=click.Choice(["analytic", "single-layer"]), default="analytic",
              show_default=True)
@click.option("--ntheta", "n_theta", type=int, default=None)
@click.option("--nphi", "n_phi", type=int, default=None)
@click.option("--kmin", "k_min", type=float, default=3.0, show_default=True)
@click.option("--kmax", "k_max", type=float, default=6.5, show_default=True)
@click.option("--samples", type=int, default=200, show_default=True)
@click.option("--refine-tol", type=float, default=1e-4, show_default=True)
@click.option("--band-limit", type=int, default=8, show_default=True)
@click.option("--out-json", type=str, default="eigs.json", show_default=True)
@click.option("--config", "config_path", type=str, default=None)
@click.pass_context
def cmd_eigs(ctx, coefficients, method, out_json, config_path, **flags):
    """List Dirichlet eigenvalue candidates from an oracle."""
    flags["coefficients"] = _parse_coef(coefficients)
    cfg = _merge_config(ctx, config_path, **flags).resolved()
    if cfg.k_max <= 0:
        raise click.UsageError(f"kmax must be positive, got {cfg.k_max}")
    _check_writable(out_json)
    if method == "analytic":
        if cfg.surface != "ball":
            raise click.UsageError("analytic spectrum exists only for the ball")
        records = ball_dirichlet_eigs(cfg.radius, cfg.k_max)
    else:
        if not (0 < cfg.k_min < cfg.k_max):
            raise click.UsageError(f"need 0 < kmin < kmax, got [{cfg.k_min}, {cfg.k_max}]")
        grid = _build_surface(cfg)
        try:
            result = single_layer_eig_sweep(
                cfg.k_min, cfg.k_max, cfg.samples, grid, band_limit=cfg.band_limit
            )
            indicator = make_single_layer_indicator(grid, band_limit=cfg.band_limit)
            half_width = 2.0 * (cfg.k_max - cfg.k_min) / (cfg.samples - 1)
            records = []
            for dip in result.dips:
                k_star, _ = golden_section_minimize(
                    indicator, dip.k - half_width, dip.k + half_width, cfg.refine_tol
                )
                svals = indicator.singular_values(k_star)
                mult = max(1, int((svals < np.median(svals) / cfg.gap_ratio).sum()))
                records.append(
                    EigenvalueRecord(k=k_star, multiplicity=mult, source="single-layer")
                )
        except NUMERICAL_ERRORS as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
    payload = {
        "run_config": cfg.to_dict(),
        "method": method,
        "records": [rec.to_dict() for rec in records],
    }
    _write_text(out_json, _json_dumps(payload))
    click.echo(f"{len(records)} eigenvalue record(s) up to k = {cfg.k_max}:")
    for rec in records:
        tag = "" if rec.l is None else f"  l={rec.l} n={rec.n}"
        click.echo(f"k = {rec.k:.10g}  mult = {rec.multiplicity}  [{rec.source}]{tag}")
    sys.exit(EXIT_OK)


@main.command("verify")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--inject-off-spectrum", is_flag=True, default=False,
              help="Add negative controls that must fail by design.")
@click.option("--out", "out_path", type=str, default=None, help="Also write the JSON lines here.")
def cmd_verify(seed, inject_off_spectrum, out_path):
    """Run the full proof-step verification suite; exit 0 iff all pass."""
    if out_path is not None:
        _check_writable(out_path)
    try:
        reports = run_default_suite(seed=seed, inject_off_spectrum=inject_off_spectrum)
    except NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    lines = [r.to_json_line() for r in reports]
    for line in lines:
        click.echo(line)
    if out_path is not None:
        _write_text(out_path, "\n".join(lines) + "\n")
    genuine_fail = [r for r in reports if not r.expected_failure and not r.passed]
    vacuous_controls = [r for r in reports if r.expected_failure and r.passed]
    n_controls = sum(1 for r in reports if r.expected_failure)
    click.echo(
        f"{len(reports) - len(genuine_fail) - n_controls}/{len(reports) - n_controls} checks passed"
        + (f"; {n_controls} negative control(s) failed as designed" if n_controls else "")
    )
    if genuine_fail or vacuous_controls:
        for r in genuine_fail:
            click.echo(f"FAILED: {r.check_name} residual={r.residual:.3e} > {r.tolerance:.1e}", err=True)
        for r in vacuous_controls:
            click.echo(f"CONTROL DID NOT DISCRIMINATE: {r.check_name}", err=True)
        sys.exit(EXIT_VERIFY_FAIL)
    sys.exit(EXIT_OK)


@main.command("fit")
@click.option("--target", required=True, help="Spherical-harmonic target 'l,m'.")
@click.option("--k", "k_value", type=float, required=True)
@click.option("--surface", type=click.Choice(["ball"]), default="ball", show_default=True)
@click.option("--radius", type=float, default=1.0, show_default=True)
@click.option("--ntheta", "n_theta", type=int, default=None)
@click.option("--nphi", "n_phi", type=int, default=None)
@click.option("--dirs-ntheta", "dirs_n_theta", type=int, default=None)
@click.option("--dirs-nphi", "dirs_n_phi", type=int, default=None)
@click.option("--ridge", type=float, default=None, help="Default: 1e-12 * ||A||^2.")
@click.option("--out-json", type=str, default="fit.json", show_default=True)
@click.option("--config", "config_path", type=str, default=None)
@click.pass_context
def cmd_fit(ctx, target, k_value, out_json, config_path, **flags):
    """Fit one spherical-harmonic trace against the plane-wave trace span."""
    idx = _parse_target(target)
    if k_value <= 0:
        raise click.UsageError(f"k must be positive, got {k_value}")
    cfg = _merge_config(ctx, config_path, **flags)
    cfg.k_max = k_value  # resolution rules key off the working wavenumber
    cfg = cfg.resolved()
    _check_writable(out_json)
    grid = _build_surface(cfg)
    dirs = _build_dirs(cfg)
    r = np.linalg.norm(grid.nodes, axis=1)
    theta = np.arccos(np.clip(grid.nodes[:, 2] / r, -1, 1))
    phi = np.arctan2(grid.nodes[:, 1], grid.nodes[:, 0])
    try:
        residual, density = fit_trace(k_value, grid, sph_harm(idx, theta, phi), dirs, ridge=cfg.ridge)
    except NUMERICAL_ERRORS as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    payload = {
        "run_config": cfg.to_dict(),
        "target": [idx.l, idx.m],
        "k": k_value,
        "residual": residual,
        "density_norm": density.norm(dirs),
    }
    _write_text(out_json, _json_dumps(payload))
    click.echo(f"relative residual = {residual:.12g}")
    click.echo(f"density L2 norm   = {density.norm(dirs):.12g}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
