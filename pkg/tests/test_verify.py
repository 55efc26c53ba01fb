import numpy as np
import pytest

from oracles import radial_bessel_moment
from wavetrace import (
    HarmonicIndex,
    InconclusiveCheckError,
    bessel_zero,
    check_decomposition,
    check_green_reduction,
    check_lemma1_orthogonality,
    check_necessity,
    make_direction_grid,
    make_sphere,
    sph_harm,
)


def harmonic_on(grid, l, m):
    r = np.linalg.norm(grid.nodes, axis=1)
    theta = np.arccos(np.clip(grid.nodes[:, 2] / r, -1, 1))
    phi = np.arctan2(grid.nodes[:, 1], grid.nodes[:, 0])
    return sph_harm(HarmonicIndex(l, m), theta, phi)


class TestNecessity:
    def test_ground_mode_tight_residual(self, sphere_40_80):
        rep = check_necessity(HarmonicIndex(0, 0), 1, 1.0, sphere_40_80, 100)
        assert rep.passed
        assert rep.residual <= 1e-10

    def test_l2_mode(self, sphere_40_80):
        rep = check_necessity(HarmonicIndex(2, 1), 1, 1.0, sphere_40_80, 100)
        assert rep.passed
        assert rep.residual <= 1e-8

    def test_off_spectrum_control_discriminates(self, sphere_40_80):
        rep = check_necessity(HarmonicIndex(0, 0), 1, 1.0, sphere_40_80, 100, k_factor=1.01)
        assert rep.expected_failure
        assert not rep.passed
        assert rep.residual >= 1e-3

    def test_reproducible_from_seed(self, sphere_40_80):
        a = check_necessity(HarmonicIndex(1, 0), 1, 1.0, sphere_40_80, 50, seed=123)
        b = check_necessity(HarmonicIndex(1, 0), 1, 1.0, sphere_40_80, 50, seed=123)
        assert a.residual == b.residual
        assert a.inputs == b.inputs


class TestLemma1Orthogonality:
    def test_ground_eigenvalue(self, sphere_40_80, dirs_12_24):
        rep = check_lemma1_orthogonality(HarmonicIndex(0, 0), 1, 1.0, sphere_40_80, dirs_12_24, 20)
        assert rep.passed
        assert rep.residual <= 1e-8

    def test_matched_harmonic_density_is_funk_hecke_zero(self, sphere_40_80, dirs_12_24):
        # h = Y_lm of the eigen index: the pairing is exactly the vanishing
        # sphere integral, evaluated through the Herglotz route
        from wavetrace import HerglotzDensity, eigenfunction_normal_derivative, herglotz_eval

        idx = HarmonicIndex(1, 0)
        k = bessel_zero(1, 1)
        theta = np.arccos(dirs_12_24.directions[:, 2])
        phi = np.arctan2(dirs_12_24.directions[:, 1], dirs_12_24.directions[:, 0])
        h = HerglotzDensity(sph_harm(idx, theta, phi))
        w_trace = herglotz_eval(k, h, dirs_12_24, sphere_40_80.nodes)
        v_n = eigenfunction_normal_derivative(idx, 1, 1.0, sphere_40_80)
        inner = np.sum(sphere_40_80.weights * w_trace * np.conj(v_n))
        # the matched trace itself vanishes at the eigenvalue, so the raw
        # pairing is the (zero) closed-form sphere integral
        assert abs(inner) <= 1e-10

    def test_off_spectrum_control(self, sphere_40_80, dirs_12_24):
        rep = check_lemma1_orthogonality(
            HarmonicIndex(0, 0), 1, 1.0, sphere_40_80, dirs_12_24, 20,
            k_override=1.0, reference_override=harmonic_on(sphere_40_80, 0, 0),
        )
        assert rep.expected_failure
        assert not rep.passed
        assert rep.residual >= 1e-2


class TestGreenReduction:
    def test_l0_closed_form_identity(self):
        # pi^2 integral_0^1 r^2 j_0(pi r) dr = -pi j_0'(pi) = 1
        rep = check_green_reduction(HarmonicIndex(0, 0), 1, 1.0, n_radial=64)
        assert rep.passed
        assert rep.residual <= 1e-10
        volume = complex(*rep.inputs["volume_side"])
        assert volume == pytest.approx(1.0, abs=1e-10)
        oracle = np.pi**2 * radial_bessel_moment(0, np.pi, 1.0)
        assert volume.real == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("l,n", [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2)])
    def test_higher_modes(self, l, n):
        rep = check_green_reduction(HarmonicIndex(l, 0), n, 1.0, n_radial=64)
        assert rep.passed
        assert rep.residual <= 1e-9

    def test_radial_quadrature_spectral_decay(self):
        for l in range(4):
            rep = check_green_reduction(HarmonicIndex(l, 0), 1, 1.0, n_radial=32)
            assert rep.residual <= 1e-8

    def test_cross_harmonic_pair_is_inconclusive(self):
        with pytest.raises(InconclusiveCheckError) as err:
            check_green_reduction(HarmonicIndex(0, 0), 1, 1.0, v_idx=HarmonicIndex(1, 0))
        assert abs(err.value.volume_side) <= 1e-12
        assert abs(err.value.surface_side) <= 1e-12

    def test_nonunit_radius(self):
        rep = check_green_reduction(HarmonicIndex(1, 0), 1, 0.7, n_radial=64)
        assert rep.passed


class TestDecomposition:
    def test_off_spectrum_traces_suffice(self, sphere_30_60, dirs_12_24):
        rep = check_decomposition(1.0, 1.0, sphere_30_60, dirs_12_24, seed=7)
        assert rep.passed
        assert rep.residual <= 1e-5
        assert rep.inputs["eigen_indices"] == []

    def test_at_eigenvalue_needs_normal_derivative(self, sphere_30_60, dirs_12_24):
        with_eig = check_decomposition(
            np.pi, 1.0, sphere_30_60, dirs_12_24, psi=HarmonicIndex(0, 0), tolerance=1e-8
        )
        assert with_eig.passed
        assert with_eig.inputs["eigen_indices"] == [(0, 1)]
        traces_only = check_decomposition(
            np.pi, 1.0, sphere_30_60, dirs_12_24, psi=HarmonicIndex(0, 0),
            include_eigenspace=False,
        )
        assert not traces_only.passed
        assert traces_only.residual == pytest.approx(1.0, abs=1e-6)

    def test_zero_target_inconclusive(self, sphere_30_60, dirs_12_24):
        with pytest.raises(InconclusiveCheckError):
            check_decomposition(1.0, 1.0, sphere_30_60, dirs_12_24, psi=np.zeros(sphere_30_60.n_nodes))

    def test_reproducible(self, sphere_30_60, dirs_12_24):
        a = check_decomposition(1.0, 1.0, sphere_30_60, dirs_12_24, seed=11)
        b = check_decomposition(1.0, 1.0, sphere_30_60, dirs_12_24, seed=11)
        assert a.residual == b.residual


class TestReportShape:
    def test_passed_iff_residual_within_tolerance(self, sphere_40_80):
        rep = check_necessity(HarmonicIndex(0, 0), 1, 1.0, sphere_40_80, 10)
        assert rep.passed == (rep.residual <= rep.tolerance)
        line = rep.to_json_line()
        assert '"check": "necessity"' in line
        assert '"passed": true' in line
