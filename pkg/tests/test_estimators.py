"""Point-estimator behavior: exact argmaxes, policies, moments, bootstrap."""

import math

import numpy as np
import pytest

import dualrec.estimators as est_module
from dualrec.estimators import (
    BootstrapResult,
    DeltaPolicy,
    EstimatorSpec,
    GridSpec,
    _argmax_windowed,
    _var_dse_first_order,
    bias_dse_under_mtb,
    dse,
    mle_adpl_mt,
    mle_adpl_mtb,
    mle_mpl_mt,
    mle_profile_mt,
    mle_profile_mtb,
    parametric_bootstrap,
    parse_estimator,
    ratio_moment_approx,
    recover_nuisance,
    var_dse_under_mtb,
)
from dualrec.kernels import log_adpl_mtb, log_mpl_mt, log_profile_mt, log_profile_mtb
from dualrec.simulate import TABLE2_POPULATIONS
from dualrec.tables import (
    DualRecordTable,
    EstimationError,
    MtbParams,
    NoFiniteMaximumError,
    UndefinedEstimateError,
    ValidationError,
    cell_probs_mtb,
    p_from_marginals,
)

T = DualRecordTable(50, 30, 20)
SMALL = DualRecordTable(7, 5, 3)


class TestDse:
    def test_worked_values(self):
        rep = dse(T)
        assert rep.n_hat == 112.0
        assert rep.n_hat_integer == 112
        small = dse(SMALL)
        assert small.n_hat == pytest.approx(120.0 / 7.0, rel=1e-15)
        assert small.n_hat_integer == 17

    def test_plug_in_standard_error(self):
        # var = n*(1-p1)(1-p2)/(p1*p2) at the estimate itself: 112*32*42/(80*70)
        assert dse(T).se == pytest.approx(math.sqrt(26.88), rel=1e-12)

    def test_recovered_behavioral_effect_is_unity_at_the_estimate(self, random_tables):
        # x1.*x.1/x11 solves the behavioral score with phi = 1: p_hat equals
        # c_hat identically at the real-valued estimate.
        assert dse(T).phi_hat == 1.0
        for t in random_tables(50):
            rep = dse(t)
            if rep.phi_hat is not None:
                assert rep.phi_hat == pytest.approx(1.0, abs=1e-12)

    def test_undefined_when_no_overlap_count(self):
        with pytest.raises(UndefinedEstimateError):
            dse(DualRecordTable(0, 5, 3))

    def test_degenerate_margins_leave_no_nuisance_or_se(self):
        rep = dse(DualRecordTable(50, 0, 0))
        assert rep.n_hat == 50.0
        assert rep.p1_hat is None
        assert rep.se is None


class TestIndependenceMaximizers:
    def test_reference_table_argmaxes(self):
        assert mle_profile_mt(T).n_hat_integer == 111
        assert mle_mpl_mt(T).n_hat_integer == 112
        assert mle_profile_mt(SMALL).n_hat_integer == 16
        assert mle_mpl_mt(SMALL).n_hat_integer == 17

    def test_profile_maximizer_drifts_below_the_ratio_on_flat_tables(self):
        # The score correction -x0/(2N(N-x0)) pulls the maximizer well below
        # x1.*x.1/x11 - 1 when x11 is small relative to the overlap.
        assert mle_profile_mt(DualRecordTable(22, 62, 58)).n_hat_integer == 302
        assert mle_profile_mt(DualRecordTable(13, 193, 146)).n_hat_integer == 2506
        assert mle_profile_mt(DualRecordTable(1, 200, 200)).n_hat_integer == 40201
        assert mle_profile_mt(DualRecordTable(98, 95, 196)).n_hat_integer == 577
        assert mle_profile_mt(DualRecordTable(20, 10, 40)).n_hat_integer == 88

    def test_modified_profile_tracks_the_ratio(self):
        assert mle_mpl_mt(DualRecordTable(22, 62, 58)).n_hat_integer == 305
        assert mle_mpl_mt(DualRecordTable(13, 193, 146)).n_hat_integer == 2519
        assert mle_mpl_mt(DualRecordTable(1, 200, 200)).n_hat_integer == 40401
        assert mle_mpl_mt(DualRecordTable(20, 10, 40)).n_hat_integer == 90

    def test_empty_off_diagonal_tables(self):
        t = DualRecordTable(50, 0, 30)
        assert mle_profile_mt(t).n_hat_integer == t.x0
        assert mle_mpl_mt(t).n_hat_integer == t.x0 + 1
        t2 = DualRecordTable(50, 0, 0)
        assert mle_profile_mt(t2).n_hat_integer == 50
        assert mle_mpl_mt(t2).n_hat_integer == 51

    def test_equal_to_brute_force_argmax_on_random_tables(self, random_tables, grid_argmax):
        for t in random_tables(300):
            hi = (t.x1_dot * t.x_dot1) // t.x11 + 80
            assert mle_profile_mt(t).n_hat_integer == grid_argmax(
                lambda ns: log_profile_mt(ns, t), t.x0, hi
            )
            assert mle_mpl_mt(t).n_hat_integer == grid_argmax(
                lambda ns: log_mpl_mt(ns, t), t.x0, hi
            )

    def test_modified_profile_never_below_plain_profile(self, random_tables):
        for t in random_tables(300):
            assert mle_profile_mt(t).n_hat_integer <= mle_mpl_mt(t).n_hat_integer

    def test_undefined_when_no_overlap_count(self):
        with pytest.raises(UndefinedEstimateError):
            mle_profile_mt(DualRecordTable(0, 5, 3))
        with pytest.raises(UndefinedEstimateError):
            mle_mpl_mt(DualRecordTable(0, 5, 3))


class TestBehavioralBoundary:
    def test_always_one_above_the_observed_count(self):
        rep = mle_profile_mtb(T)
        assert rep.n_hat_integer == 101
        assert rep.degenerate
        assert "decreasing" in rep.note
        assert mle_profile_mtb(DualRecordTable(1, 1, 1)).n_hat_integer == 4

    def test_matches_grid_argmax_of_decreasing_kernel(self, random_tables, grid_argmax):
        for t in random_tables(10):
            assert mle_profile_mtb(t).n_hat_integer == grid_argmax(
                lambda ns: log_profile_mtb(ns, t), t.x0 + 1, t.x0 + 2000
            )


class TestAdjustedBehavioral:
    def test_reference_argmaxes(self):
        rep = mle_adpl_mtb(T, DeltaPolicy.fixed(0.99))
        assert rep.n_hat_integer == 115
        assert not rep.degenerate
        assert rep.delta_used == 0.99

    def test_strong_shrinkage_collapses_to_lower_bound(self):
        rep = mle_adpl_mtb(T, DeltaPolicy.fixed(0.2))
        assert rep.n_hat_integer == 101
        assert rep.degenerate

    def test_delta_at_or_above_one_has_no_finite_maximum(self, random_tables):
        tables = [T, *random_tables(5)]
        for t in tables:
            for d in (1.0, 1.5):
                with pytest.raises(NoFiniteMaximumError):
                    mle_adpl_mtb(t, DeltaPolicy.fixed(d))

    def test_estimates_shrink_as_delta_shrinks(self, random_tables):
        for t in [T, *random_tables(3, low=20, high=120)]:
            deltas = [0.999, 0.95, 0.8, 0.5, 0.2]
            values = [
                mle_adpl_mtb(t, DeltaPolicy.fixed(d)).n_hat_integer for d in deltas
            ]
            assert all(a >= b for a, b in zip(values, values[1:]))

    def test_window_doubles_past_a_small_initial_cap(self):
        rep = mle_adpl_mtb(T, DeltaPolicy.fixed(0.99), GridSpec(lower=101, cap=105))
        assert rep.n_hat_integer == 115

    def test_recapture_policy_with_full_recapture_is_rejected(self):
        with pytest.raises(NoFiniteMaximumError):
            mle_adpl_mtb(DualRecordTable(50, 0, 30), DeltaPolicy.recapture_scaled(4.0))

    def test_requires_first_list_captures(self):
        with pytest.raises(UndefinedEstimateError):
            mle_adpl_mtb(DualRecordTable(0, 0, 5), DeltaPolicy.fixed(0.99))


class TestAdjustedIndependence:
    def test_unit_delta_recovers_the_modified_profile(self):
        assert mle_adpl_mt(T, DeltaPolicy.fixed(1.0)).n_hat_integer == 112
        assert mle_adpl_mt(T, DeltaPolicy.fixed(0.99)).n_hat_integer == 111

    def test_moderate_inflation_keeps_a_finite_maximum(self):
        rep = mle_adpl_mt(T, DeltaPolicy.fixed(2.0))
        assert rep.n_hat_integer == 112
        assert mle_adpl_mt(T, DeltaPolicy.fixed(25.9)).n_hat_integer > 112

    def test_divergence_threshold_scales_with_the_overlap_count(self):
        # The kernel grows without bound once 2*(delta - 1) reaches x11.
        for d in (26.0, 30.0):
            with pytest.raises(NoFiniteMaximumError):
                mle_adpl_mt(T, DeltaPolicy.fixed(d))
        t = DualRecordTable(2, 30, 20)
        with pytest.raises(NoFiniteMaximumError):
            mle_adpl_mt(t, DeltaPolicy.fixed(2.0))
        assert mle_adpl_mt(t, DeltaPolicy.fixed(1.9)).n_hat_integer > t.x0

    def test_full_recapture_yields_unit_delta_and_still_converges(self):
        # Contrast with the behavioral model, where delta = 1 is rejected.
        rep = mle_adpl_mt(DualRecordTable(50, 0, 30), DeltaPolicy.recapture_scaled(4.0))
        assert rep.delta_used == 1.0
        assert rep.n_hat_integer == 81


class TestDeltaModes:
    def test_fixed_point_golden_and_self_consistency(self):
        rep = mle_adpl_mtb(T, DeltaPolicy.recapture_scaled(4.0))
        assert rep.n_hat_integer == 112
        assert rep.delta_used == 1.0 - 1.5 / 112.0
        # Self-consistent: re-solving at the reported delta reproduces N-hat.
        again = mle_adpl_mtb(T, DeltaPolicy.fixed(rep.delta_used))
        assert again.n_hat_integer == 112

    def test_oracle_mode_requires_the_generating_size(self):
        with pytest.raises(ValidationError):
            mle_adpl_mtb(T, DeltaPolicy.scaled(1.25), delta_mode="oracle")

    def test_oracle_mode_equals_fixed_delta_at_the_generating_size(self):
        oracle = mle_adpl_mtb(
            T, DeltaPolicy.scaled(1.25), delta_mode="oracle", true_n=500.0
        )
        fixed = mle_adpl_mtb(T, DeltaPolicy.fixed(1.0 - 1.25 / 500.0))
        assert oracle.n_hat_integer == fixed.n_hat_integer
        assert oracle.delta_used == 1.0 - 1.25 / 500.0

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValidationError):
            mle_adpl_mtb(T, DeltaPolicy.fixed(0.9), delta_mode="exact")


class TestRecoverNuisance:
    def test_worked_values(self):
        p1_hat, p_hat, c_hat, phi_hat = recover_nuisance(200.0, T)
        assert p1_hat == 0.4
        assert p_hat == pytest.approx(1.0 / 6.0, rel=1e-15)
        assert c_hat == 0.625
        assert phi_hat == pytest.approx(3.75, rel=1e-15)

    def test_infinite_behavioral_effect_without_second_list_only_captures(self):
        assert recover_nuisance(120.0, DualRecordTable(50, 30, 0))[3] == math.inf

    def test_errors(self):
        with pytest.raises(UndefinedEstimateError):
            recover_nuisance(80.0, T)  # does not exceed x1.
        with pytest.raises(UndefinedEstimateError):
            recover_nuisance(50.0, DualRecordTable(0, 0, 5))  # x1. = 0


def _dse_moments(params):
    """Exact multinomial mean vector and covariance of (x1., x.1, x11)."""
    cells = cell_probs_mtb(params)
    p3 = np.array([cells.p11, cells.p10, cells.p01])
    cov_counts = params.n * (np.diag(p3) - np.outer(p3, p3))
    lift = np.array([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    means = lift @ (params.n * p3)
    return tuple(means), lift @ cov_counts @ lift.T


class TestMomentFormulas:
    def test_bias_worked_values(self):
        p = p_from_marginals(0.5, 0.65, 1.25)
        params = MtbParams(n=500, p1_dot=0.5, p=p, phi=1.25)
        assert bias_dse_under_mtb(params) == pytest.approx(-50.0 + 4.0 / 13.0, rel=1e-12)
        p5 = MtbParams(n=500, p1_dot=0.5, p=p_from_marginals(0.5, 0.65, 0.8), phi=0.8)
        assert bias_dse_under_mtb(p5) == pytest.approx(62.5 + 95.0 / 104.0, rel=1e-12)

    def test_bias_reduces_to_unity_for_balanced_independent_lists(self):
        params = MtbParams(n=800, p1_dot=0.5, p=0.5, phi=1.0)
        assert bias_dse_under_mtb(params) == pytest.approx(1.0, rel=1e-12)

    def test_variance_worked_values(self):
        p = p_from_marginals(0.5, 0.65, 1.25)
        params = MtbParams(n=500, p1_dot=0.5, p=p, phi=1.25)
        assert var_dse_under_mtb(params) == pytest.approx(500.0 * 4.0 / 13.0, rel=1e-12)

    def test_variance_reduces_to_classical_form_without_behavior(self):
        params = MtbParams(n=500, p1_dot=0.5, p=0.65, phi=1.0)
        classical = 500.0 * 0.5 * 0.35 / (0.5 * 0.65)
        assert var_dse_under_mtb(params) == pytest.approx(classical, rel=1e-12)

    def test_variance_is_linear_in_population_size(self):
        p = p_from_marginals(0.6, 0.7, 1.25)
        small = MtbParams(n=400, p1_dot=0.6, p=p, phi=1.25)
        large = MtbParams(n=800, p1_dot=0.6, p=p, phi=1.25)
        assert var_dse_under_mtb(large) / var_dse_under_mtb(small) == pytest.approx(2.0)

    def test_first_order_variance_matches_classical_without_behavior(self):
        fo = _var_dse_first_order(500.0, 0.5, 0.65, 1.0)
        assert fo == pytest.approx(500.0 * 0.5 * 0.35 / (0.5 * 0.65), rel=1e-12)

    def test_first_order_variance_exceeds_reduced_form_under_behavior(self):
        p = p_from_marginals(0.5, 0.65, 1.25)
        params = MtbParams(n=500, p1_dot=0.5, p=p, phi=1.25)
        ratio = _var_dse_first_order(500.0, 0.5, p, 1.25) / var_dse_under_mtb(params)
        assert 1.1 < ratio < 1.3

    def test_ratio_moment_identity_with_exact_multinomial_moments(self):
        # Plugging the exact moments of (x1., x.1, x11) reproduces
        # N + bias exactly: the bias formula is this approximation evaluated
        # in closed form.
        for pop in TABLE2_POPULATIONS:
            params = pop.params()
            means, covs = _dse_moments(params)
            approx = ratio_moment_approx(means, covs)
            assert approx == pytest.approx(
                params.n + bias_dse_under_mtb(params), abs=1e-8
            )

    def test_ratio_moment_degenerate_and_error_cases(self):
        assert ratio_moment_approx((6.0, 10.0, 4.0), np.zeros((3, 3))) == 15.0
        with pytest.raises(ValidationError):
            ratio_moment_approx((6.0, 10.0, 0.0), np.zeros((3, 3)))
        with pytest.raises(ValidationError):
            ratio_moment_approx((6.0, 10.0, 4.0), np.zeros((2, 2)))


class TestBootstrap:
    def test_deterministic_for_fixed_seed(self):
        a = parametric_bootstrap(T, "adpl-mtb:recapture:4.0", b=60, seed=11)
        b = parametric_bootstrap(T, "adpl-mtb:recapture:4.0", b=60, seed=11)
        assert a == b
        assert isinstance(a, BootstrapResult)
        assert a.replicates + a.failures == 60

    def test_seed_changes_the_resample(self):
        a = parametric_bootstrap(T, "dse", b=40, seed=1)
        b = parametric_bootstrap(T, "dse", b=40, seed=2)
        assert a.se != b.se

    def test_scale_agrees_with_plug_in_error_for_dse(self):
        boot = parametric_bootstrap(T, "dse", b=200)
        assert 0.6 * 5.18 < boot.se < 1.6 * 5.18
        assert boot.ci_low < 112.0 < boot.ci_high

    def test_degenerate_fit_cannot_seed_a_generating_model(self):
        with pytest.raises(EstimationError):
            parametric_bootstrap(DualRecordTable(50, 30, 0), "dse", b=20)
        with pytest.raises(EstimationError):
            parametric_bootstrap(DualRecordTable(50, 0, 30), "pl-mt", b=20)


class TestDescriptors:
    def test_parse_round_trips(self):
        spec = parse_estimator("adpl-mtb:recapture:4.0@oracle")
        assert spec.method == "adpl-mtb"
        assert spec.policy == DeltaPolicy.recapture_scaled(4.0)
        assert spec.oracle
        assert spec.label == "adpl-mtb:recapture:4.0@oracle"
        plain = parse_estimator("dse")
        assert plain.method == "dse"
        assert plain.policy is None and not plain.oracle

    def test_parse_errors(self):
        with pytest.raises(ValidationError):
            parse_estimator("petersen")
        with pytest.raises(ValidationError):
            parse_estimator("dse:fixed:1.0")
        with pytest.raises(ValidationError):
            parse_estimator("adpl-mtb")
        with pytest.raises(ValidationError):
            parse_estimator("adpl-mtb:shrunk:0.9")
        with pytest.raises(ValidationError):
            parse_estimator("adpl-mt:fixed:lots")

    def test_estimator_spec_dispatch(self):
        assert parse_estimator("pl-mt").estimate(T).n_hat_integer == 111
        assert parse_estimator("mpl-mt").estimate(T).n_hat_integer == 112
        assert parse_estimator("pl-mtb").estimate(T).n_hat_integer == 101
        rep = parse_estimator("adpl-mtb:fixed:0.99").estimate(T)
        assert rep.n_hat_integer == 115

    def test_policy_validation(self):
        with pytest.raises(ValidationError):
            DeltaPolicy.scaled(0.0)
        with pytest.raises(ValidationError):
            DeltaPolicy.fixed(math.inf)
        with pytest.raises(ValidationError):
            DeltaPolicy("tapered", 0.5)
        with pytest.raises(ValidationError):
            DeltaPolicy.scaled(1.25).delta(None)
        with pytest.raises(ValidationError):
            DeltaPolicy.recapture_scaled(4.0).delta(100.0, None)
        with pytest.raises(UndefinedEstimateError):
            DeltaPolicy.recapture_scaled(4.0).delta(100.0, DualRecordTable(0, 0, 5))

    def test_policy_textual_forms(self):
        assert DeltaPolicy.parse("scaled:1.25").spec_string() == "scaled:1.25"
        assert DeltaPolicy.parse("fixed:0.99").delta() == 0.99
        assert DeltaPolicy.parse("scaled:1.25").delta(500.0) == 1.0 - 1.25 / 500.0
        assert DeltaPolicy.parse("recapture:4.0").delta(112.0, T) == 1.0 - 1.5 / 112.0


class TestGridMachinery:
    def test_grid_spec_validation(self):
        with pytest.raises(ValidationError):
            GridSpec(lower=100, cap=100)
        with pytest.raises(ValidationError):
            GridSpec(lower=100, cap=200, growth="triple")

    def test_windowed_search_reports_unbounded_growth(self, monkeypatch):
        monkeypatch.setattr(est_module, "HARD_CEILING", 10**4)
        with pytest.raises(NoFiniteMaximumError):
            _argmax_windowed(lambda ns: 1e-3 * ns, GridSpec(lower=10, cap=20), "test")

    def test_windowed_search_doubles_to_an_interior_maximum(self):
        objective = lambda ns: -((ns - 5000.0) ** 2)
        assert _argmax_windowed(objective, GridSpec(lower=10, cap=20), "test") == 5000
