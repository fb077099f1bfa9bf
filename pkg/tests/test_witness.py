"""Tests for the nonclassicality criteria battery and the dual-space suite."""

import math

import numpy as np
import pytest
from scipy.special import betaln

from gsphase.deltaseries import TaylorField, exp_laplace_series, pair
from gsphase.errors import ComplexResidueError, ParameterError
from gsphase.filters import FilterKernel, GaussianCharFn, filtered_p_gaussian_grid, filtered_p_numeric
from gsphase.numerics import PhaseField, PhaseGrid
from gsphase.states import StateSpec, make_state
from gsphase.witness import (
    DIVERGED,
    VERDICT_CERTIFIED,
    VERDICT_CONSISTENT,
    VERDICT_INAPPLICABLE,
    admissible_check,
    analytic_divergence_demo,
    classify,
    moment_matrix_test,
    negativity_scan,
    normal_moment,
    pmax_pairing_bound,
    radius_estimate,
    radius_estimate_bound,
    vacuum_probability,
)


def lorentz_moment_oracle(t: float, n: int) -> float:
    """t * B(n+1, t-n), the Beta-integral value of the heavy-tail moment."""
    return t * math.exp(betaln(n + 1, t - n))


class TestVacuumProbability:
    def test_vacuum_free_heavy_tail_state(self):
        st = make_state(StateSpec("cauchy_lorentz_ncl", {"t": 3.0}))
        assert vacuum_probability(st) == 0.0

    def test_thermal(self):
        st = make_state(StateSpec("thermal", {"nbar": 0.5}))
        assert vacuum_probability(st) == pytest.approx(2.0 / 3.0, rel=1e-14)

    def test_spats_zero_with_quadrature_oracle(self):
        from gsphase.numerics import Cartesian, quad2d
        st = make_state(StateSpec("spats", {"nbar": 1.0}))
        assert vacuum_probability(st) == 0.0
        oracle = quad2d(
            lambda a: st.regular_p_closed(a) * np.exp(-np.abs(a) ** 2),
            Cartesian.square(9.0), tol=1e-12,
        ).real
        assert abs(oracle) < 1e-8

    def test_pmax_pairing_route(self):
        st = make_state(StateSpec("p_max"))
        assert vacuum_probability(st) == pytest.approx(2.0, rel=1e-12)


class TestNormalMoments:
    def test_lorentz_t3_first_moment(self):
        st = make_state(StateSpec("cauchy_lorentz", {"t": 3.0}))
        m1 = normal_moment(st, 1)
        assert m1 == pytest.approx(0.5, abs=1e-6)
        assert m1 == pytest.approx(lorentz_moment_oracle(3.0, 1), abs=1e-6)

    def test_lorentz_t1_diverges(self):
        st = make_state(StateSpec("cauchy_lorentz", {"t": 1.0}))
        assert normal_moment(st, 1) is DIVERGED

    def test_normalization_moment(self):
        for spec in [StateSpec("thermal", {"nbar": 0.5}),
                     StateSpec("cauchy_lorentz", {"t": 1.0}),
                     StateSpec("p_max")]:
            assert normal_moment(make_state(spec), 0) == 1.0

    @pytest.mark.parametrize("t", [0.5, 1.0, 1.5, 2.0, 3.0])
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_divergence_threshold_grid(self, t, n):
        st = make_state(StateSpec("cauchy_lorentz", {"t": t}))
        m = normal_moment(st, n)
        if t > n:
            assert m is not DIVERGED
            assert m == pytest.approx(lorentz_moment_oracle(t, n), rel=1e-5)
        else:
            assert m is DIVERGED

    def test_thermal_moments_match_factorial_law(self):
        nbar = 0.5
        st = make_state(StateSpec("thermal", {"nbar": nbar}))
        for i in range(4):
            assert normal_moment(st, i) == pytest.approx(
                math.factorial(i) * nbar**i, rel=1e-9)

    def test_pmax_moments_from_pairing(self):
        st = make_state(StateSpec("p_max"))
        for i in range(1, 4):
            assert normal_moment(st, i) == pytest.approx(
                (-0.5) ** i * math.factorial(i), rel=1e-12)


class TestMomentMatrix:
    def test_single_photon_order_one(self):
        # moments 1, 1, 0 -> [[1,1],[1,0]] with min eigenvalue (1-sqrt(5))/2
        st = make_state(StateSpec("photon_vacuum_mix", {"eta": 1.0}))
        entry = moment_matrix_test(st, 1)
        assert entry.verdict == VERDICT_CERTIFIED
        oracle = np.linalg.eigvalsh(np.array([[1.0, 1.0], [1.0, 0.0]])).min()
        assert entry.witness_value == pytest.approx(oracle, abs=1e-12)
        assert entry.witness_value == pytest.approx((1.0 - math.sqrt(5.0)) / 2.0, abs=1e-12)

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_thermal_stays_positive(self, order):
        st = make_state(StateSpec("thermal", {"nbar": 0.5}))
        entry = moment_matrix_test(st, order)
        assert entry.verdict == VERDICT_CONSISTENT
        assert entry.witness_value >= 0.0

    def test_heavy_tail_inapplicable(self):
        st = make_state(StateSpec("cauchy_lorentz_ncl", {"t": 1.0}))
        entry = moment_matrix_test(st, 2)
        assert entry.verdict == VERDICT_INAPPLICABLE

    def test_spats_certified_at_order_two(self):
        st = make_state(StateSpec("spats", {"nbar": 1.0}))
        entry = moment_matrix_test(st, 2)
        assert entry.verdict == VERDICT_CERTIFIED


class TestNegativityScan:
    GRID = PhaseGrid(extent=4.0, resolution=161)

    def test_filtered_vacuum_non_negative(self):
        st = make_state(StateSpec("fock_element", {"m": 0, "n": 0}))
        fld = filtered_p_gaussian_grid(GaussianCharFn.from_state(st), 2.0, self.GRID)
        val, _ = negativity_scan(fld)
        assert val >= -1e-12

    def test_filtered_max_singular_negative(self):
        st = make_state(StateSpec("p_max"))
        fld = filtered_p_gaussian_grid(GaussianCharFn.from_state(st), 2.0, self.GRID)
        val, loc = negativity_scan(fld)
        assert val < 0

    def test_filtered_spats_negative(self):
        st = make_state(StateSpec("spats", {"nbar": 1.0}))
        fld = filtered_p_numeric(st, FilterKernel(2.0), self.GRID)
        val, loc = negativity_scan(fld)
        assert val < 0
        assert abs(loc) < 1.0  # negativity sits near the origin

    def test_residue_guard(self):
        fld = PhaseField("alpha", grid=self.GRID,
                         values=np.ones((161, 161), dtype=complex), imag_residue=1e-3)
        with pytest.raises(ComplexResidueError):
            negativity_scan(fld)

    def test_tie_breaks_lexicographic(self):
        vals = np.zeros((161, 161), dtype=complex)
        fld = PhaseField("alpha", grid=self.GRID, values=vals)
        _, loc = negativity_scan(fld)
        assert loc == complex(-4.0, -4.0)


class TestAdmissibility:
    def test_gaussian_threshold(self):
        f = TaylorField.from_exp_quadratic(-1.0)
        # passes at and above 1/sqrt(2), fails below with first order (1,1)
        assert admissible_check(f, 0.75, 60).admissible
        res = admissible_check(f, 0.70, 60)
        assert not res.admissible
        assert res.first_violation == (1, 1)

    def test_constant_admissible_at_zero(self):
        assert admissible_check(TaylorField.constant(1.0), 0.0, 30).admissible

    def test_strongly_growing_function_fails_any_c(self):
        f = TaylorField.from_exp_quadratic(2.0)
        for c in (0.3, 0.7, 0.9, 0.99):
            res = admissible_check(f, c, 40)
            assert not res.admissible
            assert res.first_violation == (1, 1)

    def test_unit_coefficient_edge_case(self):
        # a[n,n] = n! sits exactly on the bound at C = 1/sqrt(2)
        f = TaylorField.from_exp_quadratic(1.0)
        assert admissible_check(f, 1.0 / math.sqrt(2.0) + 1e-12, 40).admissible
        assert not admissible_check(f, 0.70, 40).admissible

    def test_admissible_implies_analytic_bound(self):
        # (sqrt(2) C)^(n+m) sqrt(n! m!) <= M C'^(n+m) n! m! with M=1, C'=sqrt(2)C
        for cval, f in [(0.75, TaylorField.from_exp_quadratic(-1.0)),
                        (0.5, TaylorField.constant(1.0))]:
            assert admissible_check(f, cval, 40).admissible
            cprime = math.sqrt(2.0) * cval
            for n in range(0, 41, 5):
                a = abs(f.coefficient(n, n))
                bound = cprime ** (2 * n) * math.factorial(n) ** 2
                assert a <= bound + 1e-9


class TestPairingBound:
    def test_values(self):
        assert pmax_pairing_bound(0.0) == 1.0
        assert pmax_pairing_bound(1.0 / math.sqrt(2.0)) == pytest.approx(2.0)
        assert pmax_pairing_bound(0.9) == pytest.approx(1.0 / 0.19, rel=1e-12)
        with pytest.raises(ParameterError):
            pmax_pairing_bound(1.0)

    def test_gaussian_saturates_bound(self):
        # width-1 Gaussian is admissible exactly at C = 1/sqrt(2) and its
        # worst-case pairing value 2 meets the bound
        series = exp_laplace_series(-0.5, 400)
        val = abs(pair(series, TaylorField.from_exp_quadratic(-1.0)).value)
        assert val == pytest.approx(pmax_pairing_bound(1.0 / math.sqrt(2.0)), rel=1e-12)

    def test_bound_holds_over_catalog(self):
        series = exp_laplace_series(-0.5, 400)
        catalog = [
            (0.0, TaylorField.constant(1.0)),
            (1.0 / math.sqrt(2.0), TaylorField.from_exp_quadratic(-1.0)),
            (0.5, TaylorField.from_exp_quadratic(-0.5)),       # C = 1/sqrt(2 sigma^2)
            (1.0 / math.sqrt(8.0), TaylorField.from_exp_quadratic(-0.25)),
            (0.6, TaylorField.alternating(0.6, 0.9)),
        ]
        for cval, f in catalog:
            if cval > 0:
                assert admissible_check(f, min(cval + 1e-9, 0.999), 40).admissible
            val = abs(pair(series, f).value)
            assert val <= pmax_pairing_bound(cval) + 1e-9, f.label

    def test_alternating_family_approaches_bound(self):
        series = exp_laplace_series(-0.5, 2000)
        cval = 0.8
        vals = []
        for theta in (0.9, 0.99, 0.999):
            f = TaylorField.alternating(cval, theta, max_order=2000)
            vals.append(abs(pair(series, f).value))
        bound = pmax_pairing_bound(cval)
        assert vals[0] < vals[1] < vals[2] <= bound + 1e-9
        assert bound - vals[2] < 0.01 * bound


class TestRadiusEstimate:
    def test_zero_constant(self):
        assert radius_estimate(0.0, [10, 20]) == [0.0, 0.0]

    def test_decreasing_and_bounded(self):
        ests = radius_estimate(0.9, [50, 100, 200])
        assert ests[0] > ests[1] > ests[2]
        for l, e in zip([50, 100, 200], ests):
            assert e <= radius_estimate_bound(0.9, l) + 1e-12
        assert radius_estimate_bound(0.9, 200) == pytest.approx(0.21, abs=0.01)

    def test_c_half_triple(self):
        ests = radius_estimate(0.5, [50, 100, 200])
        assert ests[0] > ests[1] > ests[2]


class TestDivergenceDemo:
    def test_term_ratio_formula(self):
        demo = analytic_divergence_demo(1.0, 15)
        # ratio of term n to term n-1 is n C^2 / 2
        assert demo.term_ratios[9] == pytest.approx(5.0)

    def test_c_zero_constant_sums(self):
        demo = analytic_divergence_demo(0.0, 10, m_const=1.0)
        assert all(s == 0.0 for s in demo.log10_partial_sums)
        assert demo.first_index_above_1e6 is None

    def test_crossing_index_against_direct_summation(self):
        c = 0.5
        total, term, crossing = 0.0, 1.0, None
        for n in range(0, 200):
            if n > 0:
                term *= n * c * c / 2.0
            total += term
            if crossing is None and total > 1e6:
                crossing = n
        demo = analytic_divergence_demo(c, 200)
        assert demo.first_index_above_1e6 == crossing
        # super-exponential growth: ratios increase without bound
        assert demo.term_ratios[-1] > demo.term_ratios[10] > 1.0


class TestClassify:
    def test_classical_states_never_certified(self):
        classical = [
            StateSpec("fock_element", {"m": 0, "n": 0}),
            StateSpec("thermal", {"nbar": 0.5}),
            StateSpec("cauchy_lorentz", {"t": 3.0}),
            StateSpec("cauchy_lorentz", {"t": 1.0}),
            StateSpec("fock_element", {"m": 0, "n": 0}, displacement=0.7 - 0.2j),
        ]
        for spec in classical:
            rep = classify(make_state(spec))
            assert not rep.certified, spec.kind
            assert rep.overall == VERDICT_CONSISTENT

    def test_squeezed_certified(self):
        rep = classify(make_state(StateSpec("squeezed", {"xi": 1.4})))
        assert rep.certified
        assert rep.entry("characteristic_function").verdict == VERDICT_CERTIFIED
        assert rep.entry("filtered_negativity").verdict == VERDICT_CERTIFIED

    def test_thermal_all_consistent(self):
        rep = classify(make_state(StateSpec("thermal", {"nbar": 0.5})))
        assert [e.verdict for e in rep.entries] == [VERDICT_CONSISTENT] * 4

    def test_heavy_tail_ncl_certified_via_vacuum(self):
        rep = classify(make_state(StateSpec("cauchy_lorentz_ncl", {"t": 1.0})))
        assert rep.certified
        assert rep.entry("vacuum_probability").verdict == VERDICT_CERTIFIED
        assert rep.entry("moment_matrix").verdict == VERDICT_INAPPLICABLE

    def test_report_dict_shape(self):
        rep = classify(make_state(StateSpec("thermal", {"nbar": 0.5})))
        d = rep.to_dict()
        assert d["overall"] == VERDICT_CONSISTENT
        assert len(d["entries"]) == 4
        assert {e["criterion"] for e in d["entries"]} == {
            "characteristic_function", "vacuum_probability",
            "moment_matrix", "filtered_negativity"}
