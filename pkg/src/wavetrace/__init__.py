"""Completeness testbed for plane-wave traces {e^{ik beta . s}} on a closed
surface: the trace family loses totality in L^2(S) exactly at interior
Dirichlet eigenvalues of the Laplacian, and this package makes that
dichotomy executable -- indicator sweeps, two independent eigenvalue
oracles, and direct numerical checks of every constructive step."""

from .specfun import (
    HarmonicIndex,
    bessel_zero,
    sph_bessel_j,
    sph_bessel_j_deriv,
    sph_bessel_y,
    sph_hankel1,
    sph_harm,
)
from .surface import (
    DegenerateSurfaceError,
    DirectionGrid,
    SurfaceGrid,
    grid_from_json,
    grid_to_json,
    integrate_surface,
    make_direction_grid,
    make_sphere,
    make_star_surface,
)
from .herglotz import (
    HerglotzDensity,
    TraceMatrix,
    assemble_trace_matrix,
    fit_trace,
    funk_hecke,
    helmholtz_residual,
    herglotz_eval,
    plane_wave_trace,
)
from .spectra import (
    EigenvalueRecord,
    UnsupportedSurfaceError,
    ball_dirichlet_eigs,
    ball_eigenfunction,
    eigenfunction_normal_derivative,
    make_single_layer_indicator,
    single_layer_eig_sweep,
    single_layer_matrix,
    single_layer_symbol,
    static_row_integral,
)
from .sweep import (
    BracketError,
    Dip,
    IllPosedIndicatorError,
    SweepResult,
    completeness_indicator,
    detect_dips,
    estimate_multiplicity,
    refine_dip,
    seed_interior_points,
    sweep_k,
)
from .verify import (
    InconclusiveCheckError,
    VerificationReport,
    check_decomposition,
    check_green_reduction,
    check_lemma1_orthogonality,
    check_necessity,
    run_default_suite,
)

__version__ = "0.1.0"
