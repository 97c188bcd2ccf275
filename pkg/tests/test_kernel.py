import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvsheet.kernel import (
    KernelPoint,
    Region,
    flux_rhs,
    kernel_dump_csv,
    kernel_identity_violations,
    kernel_lambda,
    kernel_lambda_array,
    kernel_lambda_int,
    kernel_lambda_sym,
    kernel_lambda_sym_array,
    q_bound_ratios,
    q_commutator,
    q_from_flux,
    q_kernel_coeffs,
    q_norm_bound_report,
    q_spectral,
    region_array,
    region_classify,
    strain_term_coeffs,
)
from cvsheet.spectral import Grid, PeriodicField, sobolev_norm

from conftest import random_fields


def sgn(a):
    return (a > 0) - (a < 0)


class TestKernel:
    @pytest.mark.parametrize("m, l, value", [(2, 3, 0), (0, 5, 0), (-1, 3, 0), (3, -1, 8), (-2, 1, 4), (1, -2, -4)])
    def test_lambda_values(self, m, l, value):
        expected = -(sgn(m + l) - sgn(l)) * l * l * (3 * m + l) * sgn(m) * sgn(l)
        assert kernel_lambda(m, l) == expected

    @pytest.mark.parametrize("m, l, region, sym", [
        (-1, 3, Region.F_I, 8), (3, -1, Region.F_IV, 8), (2, 2, Region.ZERO, 0),
        (-1, 2, Region.F_I, 5), (-3, 1, Region.F_II, None), (2, -1, Region.F_IV, None),
    ])
    def test_points(self, m, l, region, sym):
        p = KernelPoint.at(m, l)
        assert p.region is region
        assert p.lambda_sym == kernel_lambda_sym(l, m)
        if sym is not None:
            assert p.lambda_sym == sym

    def test_lambda_differs_from_sym(self):
        assert kernel_lambda(-1, 3) == 0 and kernel_lambda_sym(-1, 3) == 8

    @given(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4))
    def test_identities_scalar(self, m, l):
        s = kernel_lambda_sym(m, l)
        assert s == kernel_lambda_sym(l, m) == kernel_lambda_sym(-m, -l)
        if m * l >= 0:
            assert s == 0 and region_classify(m, l) is Region.ZERO
        if region_classify(m, l) is Region.F_I:
            assert s == m * m * (3 * l + m)

    @given(st.integers(-600, 600), st.integers(-600, 600))
    def test_array_matches_scalar(self, m, l):
        assert kernel_lambda_array(m, l) == kernel_lambda_int(m, l)
        assert kernel_lambda_sym_array(m, l) == kernel_lambda_sym(m, l)
        code = int(region_array(np.array(m), np.array(l)))
        assert [Region.ZERO, Region.F_I, Region.F_II, Region.F_III, Region.F_IV][code] is region_classify(m, l)

    def test_regions_partition_opposite_signs(self):
        r = np.arange(-20, 21)
        m, l = np.meshgrid(r, r, indexing="ij")
        codes = region_array(m, l)
        assert np.all((codes == 0) == (m * l >= 0))

    def test_identities_to_512(self):
        assert kernel_identity_violations(512) == {"symmetry": 0, "reality": 0, "support": 0, "f1_closed_form": 0}

    def test_dump(self):
        lines = kernel_dump_csv((-1, 0), (3, 3)).splitlines()
        assert lines == ["m,l,region,lambda,lambda_sym", "-1,3,F_I,0,8", "0,3,ZERO,0,0"]


class TestQ:
    @pytest.mark.parametrize("k", range(1, 9))
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("method", [q_spectral, q_commutator])
    def test_single_mode(self, grid64, k, a, method):
        q = method(PeriodicField.from_function(grid64, lambda x: a * np.cos(k * x)))
        assert np.max(np.abs(q.samples - a * a * k**3)) <= 1e-12 * a * a * k**3

    @pytest.mark.parametrize("method", [q_spectral, q_commutator, q_from_flux])
    def test_two_modes(self, grid64, method):
        # hand evaluation of the reduced sum with phi_hat(+-1) = phi_hat(+-2) = 1/2
        q = method(PeriodicField.from_function(grid64, lambda x: np.cos(x) + np.cos(2 * x)))
        np.testing.assert_allclose(q.samples, 9 + 5 * np.cos(grid64.x), atol=1e-12)

    def test_zero(self, grid64):
        assert np.all(q_spectral(PeriodicField.zeros(grid64)).coeffs == 0)
        assert np.all(q_commutator(PeriodicField.zeros(grid64)).coeffs == 0)

    def test_rejects_nonzero_mean(self, grid64):
        with pytest.raises(ValueError):
            q_spectral(PeriodicField.from_function(grid64, lambda x: 1 + np.cos(x)))

    @given(st.integers(0, 2**32), st.floats(-3, 3))
    def test_quadratic_homogeneity(self, seed, a):
        f = random_fields(Grid(32), 1, seed=seed)[0]
        q1 = q_spectral(f).coeffs
        q2 = q_spectral(f * a).coeffs
        assert np.max(np.abs(q2 - a * a * q1)) <= 1e-13 * max(a * a, 1) * np.max(np.abs(q1))

    @given(st.integers(0, 2**32))
    def test_three_way(self, seed):
        f = random_fields(Grid(64), 1, seed=seed)[0]
        qs = q_spectral(f).coeffs
        ref = np.max(np.abs(qs))
        for other in (q_commutator(f).coeffs, q_from_flux(f).coeffs, q_kernel_coeffs(f.coeffs)):
            assert np.max(np.abs(other - qs)) <= 1e-10 * ref

    def test_hermitian(self, grid64):
        f = random_fields(grid64, 1, seed=3)[0]
        q = q_spectral(f).coeffs
        assert np.array_equal(q, np.conj(q[::-1]))

    def test_batch(self, grid64):
        from cvsheet.kernel import q_spectral_coeffs

        fs = random_fields(grid64, 3, seed=4)
        batch = q_spectral_coeffs(np.stack([f.coeffs for f in fs]))
        for row, f in zip(batch, fs):
            np.testing.assert_allclose(row, q_spectral(f).coeffs, rtol=0, atol=1e-14)


class TestFlux:
    def test_cos(self, grid64):
        # -2 phi~_x phi_xx = 2 cos^2 x and Q = 1, so the flux is cos 2x
        f = flux_rhs(PeriodicField.from_function(grid64, np.cos))
        # third derivatives amplify roundoff by ~K^3, hence the tolerance
        np.testing.assert_allclose(f.samples, np.cos(2 * grid64.x), atol=1e-11)

    def test_strain_term_cos(self, grid64):
        from cvsheet.spectral import coeffs_to_samples

        c = PeriodicField.from_function(grid64, np.cos).coeffs
        np.testing.assert_allclose(coeffs_to_samples(strain_term_coeffs(c, 64), 64), 2 * np.cos(grid64.x) ** 2, atol=1e-14)

    @pytest.mark.parametrize("seed", range(5))
    def test_zero_mode(self, grid128, seed):
        f = random_fields(grid128, 1, seed=seed)[0]
        assert abs(flux_rhs(f).coeffs[grid128.max_mode]) <= 1e-13

    @pytest.mark.parametrize("seed", range(5))
    def test_identity(self, grid128, seed):
        f = random_fields(grid128, 1, seed=seed)[0]
        n = 128
        c = f.coeffs
        resid = flux_rhs(f).coeffs - (strain_term_coeffs(c, n) - q_spectral(f).coeffs)
        assert np.sqrt(2 * np.pi * np.sum(np.abs(resid) ** 2)) <= 1e-10 * sobolev_norm(f, 3) ** 2


class TestBoundReport:
    def test_cos_ratio(self, grid64):
        c = PeriodicField.from_function(grid64, np.cos).coeffs[None]
        assert q_bound_ratios(c, 0, 64)[0] == pytest.approx(1 / np.sqrt(2 * np.pi), rel=1e-13)

    def test_zero_member_skipped(self, grid64):
        assert q_bound_ratios(np.zeros((3, grid64.size), complex), 1, 64).size == 0

    @pytest.mark.parametrize("r", [0, 1, 2, 3])
    def test_report(self, r):
        row = q_norm_bound_report(100, r, n_points=64)
        assert row.trials == 100 and 0 < row.mean_ratio <= row.max_ratio < 1

    def test_negative_r(self):
        with pytest.raises(ValueError):
            q_norm_bound_report(10, -1)
