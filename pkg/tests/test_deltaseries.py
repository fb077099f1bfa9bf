"""Tests for the singular delta-derivative series calculus."""

import math
import warnings

import numpy as np
import pytest

from gsphase.deltaseries import (
    DeltaSeries,
    TaylorField,
    classify_generator,
    exp_laplace_series,
    fock_diagonal,
    pair,
    s_transform,
    series_from_fock,
)
from gsphase.errors import DivergenceError, UnsupportedError
from gsphase.numerics import Cartesian, quad2d
from gsphase.states import StateSpec, fock_matrix, make_state

RNG = np.random.default_rng(7)


class TestSeriesFromFock:
    def test_photon_vacuum_mix(self):
        st = make_state(StateSpec("photon_vacuum_mix", {"eta": 0.7}))
        ser = series_from_fock(fock_matrix(st, 20), order_cutoff=6)
        assert ser.coefficient(0, 0) == pytest.approx(1.0)
        assert ser.coefficient(1, 1) == pytest.approx(0.7)
        for q in range(2, 7):
            assert abs(ser.coefficient(q, q)) < 1e-15

    def test_vacuum_is_pure_point_mass(self):
        st = make_state(StateSpec("fock_element", {"m": 0, "n": 0}))
        ser = series_from_fock(fock_matrix(st, 10), order_cutoff=5)
        assert ser.coefficient(0, 0) == pytest.approx(1.0)
        assert sum(abs(v) for k, v in ser.coeffs.items() if k != (0, 0)) == 0.0

    def test_thermal_matches_generator_coefficients(self):
        nbar = 0.5
        st = make_state(StateSpec("thermal", {"nbar": nbar}))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ser = series_from_fock(fock_matrix(st, 120), order_cutoff=30)
        gen = exp_laplace_series(nbar, 30)
        worst = 0.0
        for n in range(31):
            worst = max(worst, abs(ser.coefficient(n, n) - gen.coefficient(n, n)))
        assert worst < 1e-8
        off = max(abs(ser.coefficient(q, r)) for q in range(8) for r in range(8) if q != r)
        assert off < 1e-14

    def test_hermitian_symmetry_random_matrix(self):
        n = 12
        raw = RNG.normal(size=(n, n)) + 1j * RNG.normal(size=(n, n))
        h = raw + raw.conj().T
        h = h / np.trace(h).real
        from gsphase.states import FockMatrix
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # a random matrix has no decaying k-tail
            ser = series_from_fock(FockMatrix(h), order_cutoff=8)
        for q in range(9):
            for r in range(9):
                assert ser.coefficient(q, r) == pytest.approx(
                    np.conj(ser.coefficient(r, q)), abs=1e-14)

    def test_normalization_is_trace(self):
        st = make_state(StateSpec("fock_mixture", {"w0": 0.25, "w1": 0.75}))
        ser = series_from_fock(fock_matrix(st, 12), order_cutoff=6)
        assert ser.coefficient(0, 0) == pytest.approx(1.0, abs=1e-14)


class TestExpLaplace:
    def test_zero_gamma_is_identity(self):
        ser = exp_laplace_series(0.0, 10)
        assert ser.coefficient(0, 0) == 1.0
        assert ser.coefficient(1, 1) == 0.0
        assert pair(ser, TaylorField.from_exp_quadratic(-2.0)).value == 1.0

    def test_max_singular_coefficients(self):
        ser = exp_laplace_series(-0.5, 10)
        for n in range(11):
            assert ser.coefficient(n, n) == pytest.approx(
                (-0.5) ** n / math.factorial(n), rel=1e-15)
        assert ser.coefficient(1, 2) == 0.0

    def test_json_roundtrip(self):
        ser = exp_laplace_series(-0.5, 40)
        back = DeltaSeries.from_json(ser.to_json())
        assert back.generator == -0.5 and back.order == 40
        finite = DeltaSeries(coeffs={(0, 0): 1.0, (1, 1): 0.7 + 0j}, order=2)
        back2 = DeltaSeries.from_json(finite.to_json())
        assert back2.coeffs == finite.coeffs


class TestPairing:
    def test_max_singular_with_gaussian(self):
        # sum (1/2)^n = 2; oracle: (1/pi) Int exp(-|b|^2/2) d^2b = 2
        ser = exp_laplace_series(-0.5, 200)
        val = pair(ser, TaylorField.from_exp_quadratic(-1.0)).value
        assert val == pytest.approx(2.0, rel=1e-14)
        oracle = quad2d(
            lambda b: np.exp(0.5 * np.abs(b) ** 2) * np.exp(-np.abs(b) ** 2) / math.pi,
            Cartesian.square(8.0), tol=1e-11,
        ).real
        assert val == pytest.approx(oracle, abs=1e-9)

    @pytest.mark.parametrize("nbar,sigma_sq", [(0.25, 1.0), (0.5, 1.0), (0.5, 2.0), (1.0, 4.0)])
    def test_thermal_duality(self, nbar, sigma_sq):
        # singular-series pairing equals the regular-density integral
        ser = exp_laplace_series(nbar, 400)
        f = TaylorField.from_exp_quadratic(-1.0 / sigma_sq)
        val = pair(ser, f).value
        assert val == pytest.approx(sigma_sq / (sigma_sq + nbar), rel=1e-12)
        oracle = quad2d(
            lambda a: np.exp(-np.abs(a) ** 2 / nbar) / (math.pi * nbar)
            * np.exp(-np.abs(a) ** 2 / sigma_sq),
            Cartesian.square(8.0), tol=1e-12,
        ).real
        assert abs(val - oracle) < 1e-8

    def test_point_mass_pairing_returns_value_at_origin(self):
        ser = DeltaSeries(coeffs={(0, 0): 1.0 + 0j}, order=0)
        f = TaylorField.from_exp_quadratic(-0.7)
        assert pair(ser, f).value == 1.0  # F(0)

    def test_divergence_policy(self):
        # thermal gamma=2 against a width-1 Gaussian: term ratio 2
        ser = exp_laplace_series(2.0, 400)
        with pytest.raises(DivergenceError):
            pair(ser, TaylorField.from_exp_quadratic(-1.0))

    def test_displaced_gaussian_heat_formula(self):
        # generator pairing resums to the smoothed bump value at the origin
        gamma, a, s = 0.5, 4.0, 1.0
        ser = exp_laplace_series(gamma, 400)
        bump = TaylorField.displaced_gaussian(a, s)
        val = pair(ser, bump).value
        expected = (s / (s + gamma)) * math.exp(-a * a / (s + gamma))
        assert val == pytest.approx(expected, rel=1e-9)

    def test_locality_finite_vs_generator(self):
        # a far bump leaves finite series essentially unchanged but shifts
        # the all-orders generator pairing by its smoothed leak-in value
        gamma, a, s = 0.5, 5.0, 1.0
        base = TaylorField.from_exp_quadratic(-1.0)
        bump = TaylorField.displaced_gaussian(a, s)
        finite = DeltaSeries(coeffs={(0, 0): 1.0, (1, 1): 0.7 + 0j}, order=2)
        delta_finite = abs(pair(finite, base.perturbed(bump)).value
                           - pair(finite, base).value)
        gen = exp_laplace_series(gamma, 400)
        delta_gen = abs(pair(gen, base.perturbed(bump)).value - pair(gen, base).value)
        leak = (s / (s + gamma)) * math.exp(-a * a / (s + gamma))
        assert delta_finite < 1e-9
        assert delta_gen == pytest.approx(leak, rel=1e-4)
        assert delta_gen > 100 * delta_finite


class TestFockDiagonal:
    def test_max_singular_both_routes(self):
        rep = fock_diagonal(exp_laplace_series(-0.5, 400), 5)
        assert rep.pairing[0] == pytest.approx(2.0, abs=1e-9)
        assert rep.transform_oracle[0] == pytest.approx(2.0, abs=1e-7)
        assert rep.routes_agree
        np.testing.assert_allclose(rep.pairing, [2, -2, 2, -2, 2, -2], atol=1e-8)

    def test_thermal_half_matches_geometric_distribution(self):
        rep = fock_diagonal(exp_laplace_series(0.5, 400), 6)
        expected = [2.0 / 3.0 ** (k + 1) for k in range(7)]
        np.testing.assert_allclose(rep.pairing, expected, atol=1e-10)
        assert rep.routes_agree

    def test_identity_series(self):
        rep = fock_diagonal(exp_laplace_series(0.0, 10), 3)
        np.testing.assert_allclose(rep.pairing, [1.0, 0.0, 0.0, 0.0], atol=1e-15)

    def test_divergence_for_large_generator(self):
        with pytest.raises(DivergenceError):
            fock_diagonal(exp_laplace_series(1.0, 400), 2)

    def test_reference_mismatch_is_flagged_not_asserted(self):
        rep = fock_diagonal(exp_laplace_series(-0.5, 400), 3)
        assert rep.reference_closed_form is not None
        assert rep.reference_matches is False
        # both independent routes stand together against the reference
        assert rep.routes_agree

    def test_non_generator_rejected(self):
        with pytest.raises(UnsupportedError):
            fock_diagonal(DeltaSeries(coeffs={(0, 0): 1.0}, order=0), 2)


class TestSTransform:
    def test_pmax_symmetric_ordering_is_point_mass(self):
        res = s_transform(exp_laplace_series(-0.5, 50), 0.0)
        assert res.series.generator == pytest.approx(0.0)
        assert res.regular_dual is None

    def test_pmax_antinormal_is_regular_gaussian(self):
        res = s_transform(exp_laplace_series(-0.5, 50), -1.0)
        assert res.series.generator == pytest.approx(0.5)
        assert res.regular_dual is not None
        alphas = RNG.uniform(-1, 1, 10) + 1j * RNG.uniform(-1, 1, 10)
        expected = (2.0 / math.pi) * np.exp(-2.0 * np.abs(alphas) ** 2)
        np.testing.assert_allclose(res.regular_dual(alphas), expected, rtol=1e-13)

    def test_identity_at_s_one(self):
        res = s_transform(exp_laplace_series(0.5, 30), 1.0)
        assert res.series.generator == pytest.approx(0.5)

    def test_dual_matches_thermal_density(self):
        # thermal generator at s=1 already has the regular dual of its nbar
        res = s_transform(exp_laplace_series(0.5, 30), 1.0)
        assert res.regular_dual is not None
        assert res.regular_dual(0j) == pytest.approx(1.0 / (math.pi * 0.5), rel=1e-13)


class TestGeneratorClassification:
    def test_identity(self):
        assert classify_generator(0.0).label == "identity"

    def test_smoothing_direction_has_dual(self):
        cls = classify_generator(0.5)
        assert cls.label == "contractive"
        assert cls.has_regular_dual
        assert cls.multiplier_bounded

    def test_singular_direction(self):
        cls = classify_generator(-0.5)
        assert cls.label == "expansive"
        assert not cls.has_regular_dual
        assert not cls.multiplier_bounded
        assert max(cls.sample_multipliers) > 1.0


class TestDualityInvariant:
    @pytest.mark.parametrize("nbar", [0.25, 0.5, 1.0])
    def test_pairing_level_duality(self, nbar):
        # the singular series and the regular Gaussian density agree on all
        # pairings with admissible Gaussians of width above the threshold
        for sigma_sq in (2.0, 4.0):
            if sigma_sq <= nbar:
                continue
            ser = exp_laplace_series(nbar, 400)
            val = pair(ser, TaylorField.from_exp_quadratic(-1.0 / sigma_sq)).value
            reg = quad2d(
                lambda a: np.exp(-np.abs(a) ** 2 / nbar) / (math.pi * nbar)
                * np.exp(-np.abs(a) ** 2 / sigma_sq),
                Cartesian.square(9.0), tol=1e-12,
            ).real
            assert abs(val - reg) < 1e-8
