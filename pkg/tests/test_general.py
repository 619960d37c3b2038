"""Testes do cenário geral: phi^(u), phi^(th), seleção de suporte e agregação."""

import math

import numpy as np
import pytest

from src.generators.presets import null_panel
from src.generators.sampler import generate_sample, split_sample
from src.hypothesis.general import (
    c_star_default,
    general_regime,
    resolve_c_star,
    select_support,
    studentized,
    test_general_ag as run_general_ag,
    test_th as run_th,
    test_th_selected as run_th_selected,
    test_u as run_u,
    u_base,
    u_statistic,
)
from src.hypothesis.selection import (
    MIN_BLOCK_ROWS,
    iteration_count,
    iterative_property_params,
    mcp_property_params,
    select_iterative,
    select_mcp,
)
from src.models.exceptions import BlockTooSmall, ConfigurationError, DegenerateResiduals, DegenerateVariance
from src.models.results import PropertySParams, SupportSet
from src.models.scenario import CovarianceSpec, Scenario
from src.services.calibration_service import CalibrationService
from src.solvers.sqrt_lasso import threshold_sqrt_lasso
from src.validators.property_s import count_small_coefficients, property_S_check, required_property_scale


ALPHA, DELTA, ETA = 0.05, 0.05, 2.0


def _counting_design(leading=(5.0, 3.0, 0.1, 0.0)):
    """m=10, p=4: colunas canônicas nas 4 primeiras linhas, resíduo com ||r||^2 = m."""
    x0 = np.zeros((10, 4))
    x0[:4, :4] = np.eye(4)
    y0 = np.full(10, math.sqrt(10 / 6))
    y0[:4] = leading
    return x0, y0


class TestUStatistic:

    def test_identity_gram_gives_zero(self):
        assert u_statistic(np.eye(4), np.array([1.0, -2.0, 0.5, 3.0])) == pytest.approx(0.0, abs=1e-15)

    def test_small_example(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert u_statistic(x, np.array([1.0, 1.0])) == pytest.approx(11 / 3)

    def test_invariant_to_residual_scale(self, rng):
        x = rng.normal(size=(8, 5))
        r = rng.normal(size=8)
        assert u_statistic(x, 3.0 * r) == pytest.approx(u_statistic(x, r))

    def test_zero_residuals(self):
        with pytest.raises(DegenerateResiduals):
            u_statistic(np.eye(3), np.zeros(3))

    def test_u_base(self):
        assert u_base(50, 0, 100, 0.05, 0.1) == pytest.approx(
            math.log(1000) / 50 + math.sqrt(100 * math.log(40)) / 50
        )


class TestU:

    def test_report(self, make_sample):
        split = split_sample(make_sample(n=120, p=100, k0=2, sigma_known=False), 2)
        report = run_u(split, 2, ALPHA, DELTA, ETA)
        base = u_base(60, 2, 100, ALPHA, DELTA)
        assert report.threshold == pytest.approx(3.0 * base)
        assert report.normalized == pytest.approx(report.statistic / base)
        assert report.reject == (report.statistic > report.threshold)

    def test_requires_two_blocks(self, make_sample):
        with pytest.raises(ConfigurationError):
            run_u(split_sample(make_sample(), 3), 1, ALPHA, DELTA, ETA)

    def test_invalid_eta(self, make_sample):
        with pytest.raises(ConfigurationError):
            run_u(split_sample(make_sample(), 2), 1, ALPHA, DELTA, 0.5)

    def test_dense_alternative_rejects(self, make_sample):
        sample = make_sample(n=400, p=200, k0=1, delta=150, rho=20.0, pattern="flat_small", sigma_known=False)
        assert run_u(split_sample(sample, 2), 1, ALPHA, DELTA, ETA).reject


class TestCStar:

    def test_unit_example(self):
        assert c_star_default(1, 1, 1, 4) == pytest.approx(12.41421, abs=1e-5)

    def test_general_example(self):
        assert c_star_default(0.5, 2, 1.5, 0.05) == pytest.approx(115.5431, abs=1e-3)

    def test_monotone_in_eta(self):
        values = [c_star_default(1, 1, eta, 0.05) for eta in (1.0, 1.5, 2.0, 3.0)]
        assert values == sorted(values)

    def test_a3_below_one_is_clamped(self):
        assert c_star_default(1, 0.2, 1, 0.05) == c_star_default(1, 1, 1, 0.05)

    def test_invalid_delta(self):
        with pytest.raises(ConfigurationError):
            c_star_default(1, 1, 1, 20.0)

    def test_resolve_prefers_calibrated(self, constants):
        assert resolve_c_star(constants.with_values(c_star=2.5), ETA, DELTA) == 2.5
        assert resolve_c_star(constants, ETA, DELTA) == pytest.approx(c_star_default(1, 1, ETA, DELTA))


class TestTh:

    def test_counting(self):
        x0, y0 = _counting_design()
        support = SupportSet(indices=(0, 1, 2, 3))
        rejected = run_th(x0, y0, support, 1, c_star=1.0)
        assert rejected.statistic == 2
        assert rejected.reject
        assert rejected.side_channels['sigma_hat'] == pytest.approx(1.0)
        assert not run_th(x0, y0, support, 2, c_star=1.0).reject

    def test_normalized_order_statistic(self):
        x0, y0 = _counting_design()
        report = run_th(x0, y0, SupportSet(indices=(0, 1, 2, 3)), 1, c_star=1.0)
        assert report.normalized == pytest.approx(3.0 / math.sqrt(math.log(4) / 10))

    def test_empty_support_accepts(self):
        x0, y0 = _counting_design()
        report = run_th(x0, y0, SupportSet(), 0, c_star=1.0)
        assert report.statistic == 0
        assert not report.reject

    def test_vanishing_threshold_counts_only_support(self):
        x0, y0 = _counting_design()
        tiny = float(np.nextafter(0.0, 1.0))
        empty = run_th(x0, y0, SupportSet(), 3, c_star=tiny)
        assert empty.statistic == 0
        assert not empty.reject
        single = run_th(x0, y0, SupportSet(indices=(2,)), 1, c_star=tiny)
        assert single.statistic == 1
        assert not single.reject

    def test_exact_fit_counts_nonzero(self):
        x0 = np.vstack([np.eye(3), np.zeros((3, 3))])
        y0 = np.array([2.0, 0.0, 1.0, 0.0, 0.0, 0.0])
        support = SupportSet(indices=(0, 1, 2))
        report = run_th(x0, y0, support, 1, c_star=1.0)
        assert report.side_channels['degenerate'] is True
        assert report.statistic == 2
        assert report.reject
        assert not run_th(x0, y0, support, 2, c_star=1.0).reject

    def test_studentized_zero_variance(self):
        with pytest.raises(DegenerateVariance):
            studentized(np.ones(2), 0.0)

    def test_scale_invariance(self, rng):
        x0 = rng.normal(size=(30, 8))
        y0 = x0[:, :3] @ np.array([1.0, -0.5, 0.2]) + 0.3 * rng.normal(size=30)
        support = SupportSet(indices=(0, 1, 2, 5))
        for k0 in range(4):
            base = run_th(x0, y0, support, k0, c_star=1.0)
            scaled = run_th(x0, 4.0 * y0, support, k0, c_star=1.0)
            assert base.statistic == scaled.statistic
            assert base.reject == scaled.reject


class TestSelection:

    def test_iteration_count(self):
        assert iteration_count(1) == 1
        assert iteration_count(200) == 8
        assert iteration_count(256) == 9

    def test_block_too_small(self, rng):
        rows = (MIN_BLOCK_ROWS - 1) * iteration_count(40)
        with pytest.raises(BlockTooSmall):
            select_iterative(rng.normal(size=(rows, 5)), rng.normal(size=rows), ETA, DELTA)

    def test_iterative_steps_are_monotone(self, make_sample):
        sample = make_sample(n=200, p=30, k0=3, delta=2, rho=2.0, sigma_known=False)
        support = select_iterative(sample.x, sample.y, ETA, DELTA)
        assert len(support.steps) == iteration_count(200)
        assert list(support.steps) == sorted(support.steps)
        assert support.steps[-1] == len(support)
        assert support.method == "iterative"

    def test_iterative_first_step(self, make_sample, constants):
        sample = make_sample(n=200, p=30, k0=3, sigma_known=False)
        support = select_iterative(sample.x, sample.y, ETA, DELTA, constants)
        rows = 200 // iteration_count(200)
        first = threshold_sqrt_lasso(sample.x[:rows], sample.y[:rows], DELTA, constants.c_SL_eta, constants)
        assert support.steps[0] == np.count_nonzero(first)

    def test_invalid_eta(self, rng):
        with pytest.raises(ConfigurationError):
            select_mcp(rng.normal(size=(20, 5)), rng.normal(size=20), 0.9)

    def test_mcp_deterministic(self, make_sample):
        sample = make_sample(n=150, p=40, k0=3, sigma_known=False)
        assert select_mcp(sample.x, sample.y, ETA).indices == select_mcp(sample.x, sample.y, ETA).indices

    def test_mcp_strong_signal_property_s(self, make_scenario, constants):
        scenario = make_scenario(n=300, p=50, k0=3, spike_scale=5.0, sigma_known=False,
                                 covariance=CovarianceSpec(kind="ar1", param=0.2, eta=ETA))
        sample = generate_sample(scenario, 21)
        support = select_mcp(sample.x, sample.y, ETA, constants)
        assert {0, 1, 2} <= set(support.indices)
        report = property_S_check(support, sample.theta_star, 1.0, mcp_property_params(constants), 300, 50)
        assert report.holds

    def test_iterative_property_params(self, constants):
        params = iterative_property_params(8, constants)
        assert params.a1 == pytest.approx(math.sqrt(8))
        assert params.a2 == 16
        assert params.a3 == pytest.approx(2.0)


class TestPropertyS:

    PARAMS = PropertySParams(a1=1.0, a2=2.0, a3=1.0)
    THETA = np.array([1.0, 0.01, 0.0, 0.0])

    def test_holds_when_only_small_missed(self):
        report = property_S_check(SupportSet(indices=(0,)), self.THETA, 1.0, self.PARAMS, 100, 4)
        assert report.holds
        assert report.small_count == 1

    def test_fails_when_large_missed(self):
        assert not property_S_check(SupportSet(), self.THETA, 1.0, self.PARAMS, 100, 4).holds

    def test_fails_when_support_too_large(self):
        theta = np.array([1.0, 0.0, 0.0, 0.0])
        assert not property_S_check(SupportSet(indices=(0, 1, 2)), theta, 1.0, self.PARAMS, 100, 4).holds

    def test_matches_direct_computation(self, rng):
        theta = rng.normal(size=20) * (rng.random(20) < 0.4)
        support = SupportSet(indices=tuple(np.flatnonzero(rng.random(20) < 0.5)))
        sigma, m, p = 0.7, 50, 20
        params = PropertySParams(a1=3.0, a2=1.5, a3=2.0)
        report = property_S_check(support, theta, sigma, params, m, p)

        small = sum(1 for v in theta if 0 < abs(v) / sigma <= 3.0 * math.sqrt(math.log(p) / m))
        outside = [i for i in range(p) if i not in support.indices]
        missed = sum(theta[i] ** 2 for i in outside)
        expected = (len(support) <= 1.5 * np.count_nonzero(theta)
                    and missed <= 4.0 * sigma ** 2 * small * math.log(p) / m)
        assert count_small_coefficients(theta, sigma, 3.0, m, p) == small
        assert report.missed_lhs == pytest.approx(missed)
        assert report.holds == expected

    def test_required_scale_is_minimal(self):
        base = PropertySParams(a1=1.0, a2=2.0, a3=1.0)
        support = SupportSet(indices=(0,))
        scale = required_property_scale(support, self.THETA, 1.0, base, 100, 4)
        assert scale == pytest.approx(0.01 / math.sqrt(math.log(4) / 100))

        def scaled(c):
            return PropertySParams(a1=c, a2=2.0, a3=c)

        assert property_S_check(support, self.THETA, 1.0, scaled(scale), 100, 4).holds
        assert not property_S_check(support, self.THETA, 1.0, scaled(0.99 * scale), 100, 4).holds

    def test_required_scale_for_missed_spike(self):
        theta = np.array([1.0, 0.0, 0.0, 0.0])
        base = PropertySParams(a1=1.0, a2=2.0, a3=1.0)
        scale = required_property_scale(SupportSet(), theta, 1.0, base, 100, 4)
        assert scale == pytest.approx(1.0 / math.sqrt(math.log(4) / 100))
        assert property_S_check(SupportSet(), theta, 1.0, PropertySParams(scale, 2.0, scale), 100, 4).holds

    def test_required_scale_edge_cases(self):
        base = PropertySParams(a1=1.0, a2=1.0, a3=1.0)
        theta = np.array([1.0, 0.0, 0.0, 0.0])
        assert required_property_scale(SupportSet(indices=(0,)), theta, 1.0, base, 100, 4) == 0.0
        assert required_property_scale(SupportSet(indices=(0, 1)), theta, 1.0, base, 100, 4) == math.inf
        assert required_property_scale(SupportSet(), np.zeros(4), 1.0, base, 100, 4) == 0.0


class TestThSelected:

    def test_mcp_selector(self, make_sample):
        split = split_sample(make_sample(n=200, p=40, k0=2, sigma_known=False), 2)
        report = run_th_selected(split, 2, ALPHA, DELTA, ETA)
        assert report.name == "th"
        assert report.side_channels['support_method'] == "mcp"

    def test_iterative_selector(self, make_sample):
        split = split_sample(make_sample(n=200, p=40, k0=2, sigma_known=False), 2)
        report = run_th_selected(split, 2, ALPHA, DELTA, ETA, selector="iterative")
        assert report.name == "th_ith"
        assert len(report.side_channels['steps']) == iteration_count(200)

    def test_unknown_selector(self, make_sample):
        split = split_sample(make_sample(n=200, p=40, sigma_known=False), 2)
        with pytest.raises(ConfigurationError):
            run_th_selected(split, 1, ALPHA, DELTA, ETA, selector="lasso")

    def test_strong_alternative_rejects(self, make_sample):
        sample = make_sample(n=400, p=40, k0=1, delta=3, rho=40.0, spike_scale=30.0, sigma_known=False)
        assert run_th_selected(split_sample(sample, 2), 1, ALPHA, DELTA, ETA).reject


class TestGeneralAggregate:

    def test_regime(self, constants):
        assert general_regime(60, 30, DELTA, constants)
        assert not general_regime(10, 40, DELTA, constants)

    def test_u_and_th(self, make_sample):
        report = run_general_ag(make_sample(n=200, p=40, k0=2, sigma_known=False), 2, ALPHA, DELTA, ETA)
        assert report.side_channels['regime'] == "u+th"
        assert [r.name for r in report.sub_reports] == ["u", "th"]
        assert report.reject == any(r.reject for r in report.sub_reports)

    def test_th_only_outside_regime(self, make_sample, constants):
        narrow = constants.with_values(c_eta_regime=1e-6)
        report = run_general_ag(make_sample(n=200, p=40, k0=2, sigma_known=False), 2, ALPHA, DELTA, ETA, narrow)
        assert report.side_channels['regime'] == "th"
        assert [r.name for r in report.sub_reports] == ["th"]


class TestUCentering:

    @staticmethod
    def _null_statistics(n, p, trials):
        scenario = Scenario(n=n, p=p, sigma_known=False)
        values = []
        for seed in range(trials):
            split = split_sample(generate_sample(scenario, 300 + seed), 2)
            values.append(run_u(split, 0, ALPHA, DELTA, ETA).statistic)
        return np.array(values)

    def test_null_mean_is_zero(self):
        values = self._null_statistics(200, 150, 300)
        assert abs(values.mean()) <= 3 * values.std(ddof=1) / math.sqrt(values.size)

    @pytest.mark.slow
    def test_null_mean_is_zero_large(self):
        values = self._null_statistics(400, 1200, 2000)
        assert abs(values.mean()) <= 3 * values.std(ddof=1) / math.sqrt(values.size)


@pytest.mark.slow
class TestSelectionAcceptance:

    N, P, K = 400, 1200, 10
    TRIALS = 200

    def _property_params(self, selector, constants):
        if selector == "mcp":
            return mcp_property_params(constants)
        return iterative_property_params(iteration_count(self.N), constants)

    @pytest.mark.parametrize("selector, target", [("mcp", 0.9), ("iterative", 0.85)])
    def test_calibrated_property_s(self, selector, target):
        service = CalibrationService(trials=self.TRIALS, seed=31, use_cache=False)
        constants = service.calibrate_selection(selector, self.K, self.N, self.P, ETA, DELTA,
                                                size_alpha=0.05, coverage=0.95)
        params = self._property_params(selector, constants)
        empty, spikes = null_panel(self.K, self.N, self.P, sigma_known=False)

        small, holds = 0, 0
        for seed in range(self.TRIALS):
            sample = generate_sample(empty, 7000 + seed)
            small += len(select_support(sample.x, sample.y, ETA, DELTA, constants, selector, n=self.N)) <= self.K
            sample = generate_sample(spikes, 9000 + seed)
            support = select_support(sample.x, sample.y, ETA, DELTA, constants, selector, n=self.N)
            holds += property_S_check(support, sample.theta_star, 1.0, params, self.N, self.P).holds
        assert small >= 0.9 * self.TRIALS
        assert holds >= target * self.TRIALS
