"""Testes do harness: risco, calibração, busca de separação, taxas e varredura."""

import io
import math

import numpy as np
import pandas as pd
import pytest
from scipy.stats import chi2, norm

from src.config import settings
from src.generators.presets import null_panel
from src.hypothesis.registry import TestParams, make_runner
from src.loaders.file_exporter import FileExporter
from src.models.design_constants import ANALYTIC, CALIBRATED, DesignConstants
from src.models.exceptions import ConfigurationError, DidNotConverge, InvalidQuery, NotBracketed, NumericalError
from src.models.results import RateQuery
from src.services import calibration_service, sweep_service
from src.services.calibration_service import (
    CalibrationService,
    calibrate_threshold,
    null_statistics,
    worst_case_quantile,
)
from src.services.rates import rate_reference
from src.services.risk_service import RiskService, estimate_risk, wald_half_width
from src.services.search_service import separation_search
from src.services.sweep_service import SweepConfig, sweep
from src.utils.cache_manager import CacheManager


def _always(value):
    return lambda sample, scenario: value


def _coin(sample, scenario):
    return sample.y[0] > 0


def _uniform_threshold(sample, scenario):
    """Rejeita com probabilidade min(1, rho); a variável uniforme só depende de X."""
    return norm.cdf(sample.x[0, 0]) < min(1.0, scenario.signal.rho)


@pytest.fixture
def small_panels(make_scenario):
    nulls = [make_scenario(n=20, p=3), make_scenario(n=20, p=3, k0=1)]
    alts = [make_scenario(n=20, p=3, k0=1, delta=1, rho=1.0)]
    return nulls, alts


class TestRisk:

    def test_always_reject(self, small_panels):
        estimate = estimate_risk(_always(True), *small_panels, trials=10, seed=1)
        assert (estimate.type1, estimate.type2, estimate.risk) == (1.0, 0.0, 1.0)
        assert estimate.half_width == 0.0

    def test_always_accept(self, small_panels):
        estimate = estimate_risk(_always(False), *small_panels, trials=10, seed=1)
        assert (estimate.type1, estimate.type2, estimate.risk) == (0.0, 1.0, 1.0)

    def test_coin(self, small_panels):
        estimate = estimate_risk(_coin, *small_panels, trials=400, seed=3)
        assert estimate.type1 == pytest.approx(0.5, abs=0.1)
        assert estimate.type2 == pytest.approx(0.5, abs=0.1)
        assert estimate.half_width_type1 == pytest.approx(wald_half_width(estimate.type1, 400))

    def test_deterministic(self, small_panels):
        a = estimate_risk(_coin, *small_panels, trials=50, seed=9)
        b = estimate_risk(_coin, *small_panels, trials=50, seed=9)
        assert a == b

    def test_type1_is_worst_null(self, make_scenario):
        nulls = [make_scenario(n=20, p=3), make_scenario(n=20, p=3, sigma=2.0)]
        alts = [make_scenario(n=20, p=3)]
        service = RiskService(trials=30, seed=4)
        rates = service.rejection_rates(_coin, nulls, 0)
        estimate = service.estimate(_coin, nulls, alts)
        assert estimate.type1 == max(rate for rate, _, _ in rates)

    def test_half_width_formula(self):
        assert wald_half_width(0.2, 100) == pytest.approx(1.96 * math.sqrt(0.2 * 0.8 / 100))

    def test_excluded_trials(self, small_panels):
        calls = {'count': 0}

        def flaky(sample, scenario):
            calls['count'] += 1
            if calls['count'] % 2:
                raise DidNotConverge("teste")
            return True

        estimate = estimate_risk(flaky, *small_panels, trials=10, seed=1)
        assert estimate.excluded == 15
        assert estimate.type1 == 1.0

    def test_all_excluded(self, small_panels):
        def never(sample, scenario):
            raise DidNotConverge("teste")

        with pytest.raises(NumericalError):
            estimate_risk(never, *small_panels, trials=5, seed=1)

    def test_empty_panels(self, small_panels):
        with pytest.raises(ConfigurationError):
            estimate_risk(_coin, [], small_panels[1], trials=5, seed=1)

    def test_invalid_trials(self):
        with pytest.raises(ConfigurationError):
            RiskService(trials=0)


class TestCalibration:

    def test_alpha_one_gives_minimum(self):
        per_scenario = [np.array([3.0, 1.0, 2.0]), np.array([5.0, 4.0])]
        assert worst_case_quantile(per_scenario, 1.0) == 4.0

    def test_vector_statistics(self):
        per_scenario = [np.array([[1.0, 10.0], [2.0, 20.0]])]
        np.testing.assert_array_equal(worst_case_quantile(per_scenario, 1.0), [1.0, 10.0])

    def test_invalid_alpha(self):
        with pytest.raises(ConfigurationError):
            worst_case_quantile([np.ones(3)], 0.0)

    def test_chi_square_quantile(self, make_scenario):
        scenario = make_scenario(n=50, p=1)
        threshold = calibrate_threshold(lambda s, sc: float(s.y @ s.y), [scenario], 0.05, 2000, seed=5)
        assert threshold == pytest.approx(chi2.ppf(0.95, 50), abs=1.5)

    def test_requires_enough_trials(self, make_scenario):
        with pytest.raises(ConfigurationError):
            calibrate_threshold(_always(1.0), [make_scenario()], 0.05, 50, seed=1)

    def test_calibrate_test_matches_null_quantile(self, tmp_path):
        params = TestParams(k0=1)
        nulls = null_panel(1, 60, 20)
        service = CalibrationService(trials=100, seed=8, cache=CacheManager(str(tmp_path)))
        constants = service.calibrate_test('t', params, nulls, 0.05)

        runner = make_runner('t', params)
        expected = worst_case_quantile(null_statistics(runner, nulls, 100, 8), 0.05)
        assert constants.c_t == pytest.approx(expected)
        assert constants.provenance_of('c_t') == CALIBRATED

    def test_cache_reused(self, tmp_path, monkeypatch):
        params = TestParams(k0=1)
        nulls = null_panel(1, 60, 20)
        first = CalibrationService(trials=100, seed=8, cache=CacheManager(str(tmp_path)))
        constants = first.calibrate_test('chi', params, nulls, 0.05)

        def fail(*args, **kwargs):
            raise AssertionError("estatísticas deveriam vir do cache")

        monkeypatch.setattr(calibration_service, "null_statistics", fail)
        again = CalibrationService(trials=100, seed=8, cache=CacheManager(str(tmp_path)))
        assert again.calibrate_test('chi', params, nulls, 0.05).c_chi == constants.c_chi

    @pytest.mark.parametrize("name, target, value", [("th", "c_star", 0.0), ("t", "c_t", 0.0), ("u", "c_u_eta", -0.3)])
    def test_nonpositive_quantile_keeps_analytic(self, name, target, value, make_scenario, monkeypatch):
        monkeypatch.setattr(calibration_service, "null_statistics",
                            lambda *args, **kwargs: [np.full(100, value)])
        service = CalibrationService(trials=100, use_cache=False)
        constants = service.calibrate_test(name, TestParams(k0=1), [make_scenario()], 0.05)
        assert getattr(constants, target) == getattr(DesignConstants(), target)
        assert constants.provenance_of(target) == ANALYTIC

    def test_unknown_test(self):
        with pytest.raises(ConfigurationError):
            CalibrationService(trials=100, use_cache=False).calibrate_test('ag', TestParams(k0=1), [], 0.05)

    def test_calibrate_all_order(self, monkeypatch):
        order = []

        def record(self, name, params, nulls, alpha, constants=None):
            order.append(name)
            return constants

        monkeypatch.setattr(CalibrationService, "calibrate_test", record)
        CalibrationService(trials=100, use_cache=False).calibrate_all(
            ['f', 'th_ith', 't', 'th'], TestParams(k0=1), [], 0.05
        )
        assert order == ['t', 'f', 'th']


class TestSeparationSearch:

    @pytest.fixture
    def template(self, make_scenario):
        return make_scenario(n=5, p=2, delta=1, rho=0.5)

    def test_recovers_known_separation(self, template):
        rho_hat = separation_search(_uniform_threshold, template, 0.5, (0.0, 1.5), trials=200, seed=2)
        assert rho_hat == pytest.approx(0.5, abs=0.1)

    def test_monotone_in_gamma(self, template):
        strict = separation_search(_uniform_threshold, template, 0.3, (0.0, 1.5), trials=200, seed=2)
        loose = separation_search(_uniform_threshold, template, 0.7, (0.0, 1.5), trials=200, seed=2)
        assert strict >= loose

    def test_not_bracketed(self, template):
        with pytest.raises(NotBracketed):
            separation_search(_uniform_threshold, template, 0.5, (0.7, 1.5), trials=100, seed=2)

    @pytest.mark.parametrize("gamma, bounds", [(0.5, (1.0, 0.5)), (2.5, (0.0, 1.0)), (0.5, (-1.0, 1.0))])
    def test_invalid_arguments(self, template, gamma, bounds):
        with pytest.raises(ConfigurationError):
            separation_search(_uniform_threshold, template, gamma, bounds, trials=10, seed=2)


class TestRates:

    def test_independent_sparse(self):
        result = rate_reference(RateQuery("independent", 1000, 10 ** 5, 10, 5))
        assert result['rate'] == pytest.approx(0.05756, abs=1e-5)
        assert result['regime'] == 'sparse-Δ'

    def test_general_dense_small(self):
        result = rate_reference(RateQuery("general", 1000, 10 ** 4, 10, 100))
        assert result['rate'] == pytest.approx(0.1)
        assert result['regime'] == 'dense small-k0'

    def test_independent_dense_large(self):
        result = rate_reference(RateQuery("independent", 1000, 10 ** 4, 1000, 100))
        assert result['regime'] == 'dense large-k0'
        assert result['rate'] == pytest.approx(1000 / (1000 * math.log(10 ** 4)))

    def test_general_large_lower_bound(self):
        result = rate_reference(RateQuery("general", 1000, 10 ** 4, 1000, 100))
        sparse = 100 * math.log(10 ** 4) / 1000
        assert result['regime'] == 'sparse-Δ'
        assert result['rate'] == pytest.approx(sparse)
        assert result['lower'] == pytest.approx(1000 / (1000 * math.log(10 ** 4)))

    def test_gap(self):
        result = rate_reference(RateQuery("independent", 1000, 10 ** 4, 100, 100))
        assert result['regime'] == 'gap'
        assert result['rate'] == max(result['candidates'].values())

    @pytest.mark.parametrize("query", [
        RateQuery("independent", 100, 50, 10, 0),
        RateQuery("general", 100, 50, 10, 41),
        RateQuery("mixed", 100, 50, 10, 5),
    ])
    def test_invalid_query(self, query):
        with pytest.raises(InvalidQuery):
            rate_reference(query)

    @pytest.mark.parametrize("setting", ["independent", "general"])
    def test_monotone_on_lattice(self, setting):
        p = 10 ** 4
        for k0 in (5, 50, 500):
            for n in (100, 1000, 10000):
                rates = [rate_reference(RateQuery(setting, n, p, k0, d))['rate'] for d in (1, 10, 100, 1000)]
                assert rates == sorted(rates)
            for d in (1, 10, 100):
                rates = [rate_reference(RateQuery(setting, n, p, k0, d))['rate'] for n in (100, 1000, 10000)]
                assert rates == sorted(rates, reverse=True)


def _sweep_config(**overrides):
    data = dict(n=[60], p=[20], k0=[1], delta=[2, 25], rho=[3.0], tests=['t', 'chi'], trials=4, seed=11)
    data.update(overrides)
    return SweepConfig.from_dict(data)


class TestSweep:

    def test_rows_and_header(self):
        df = sweep(_sweep_config(), show_progress=False)
        assert len(df) == 4
        text = FileExporter().export_sweep(df)
        assert text.splitlines()[0] == ",".join(settings.SWEEP_COLUMNS)

    def test_errors_recorded_per_cell(self):
        df = sweep(_sweep_config(), show_progress=False)
        failed = df[df['delta'] == 25]
        assert all(failed['error'].str.startswith("InvalidQuery"))
        ok = df[df['delta'] == 2]
        assert (ok['error'] == '').all()
        assert ok['type1'].between(0, 1).all()

    def test_byte_deterministic(self):
        exporter = FileExporter()
        first = exporter.export_sweep(sweep(_sweep_config(), show_progress=False))
        second = exporter.export_sweep(sweep(_sweep_config(), show_progress=False))
        assert first == second

    def test_resume_reuses_rows(self, monkeypatch):
        df = sweep(_sweep_config(), show_progress=False)
        text = FileExporter().export_sweep(df)
        previous = pd.read_csv(io.StringIO(text), keep_default_na=False, na_values=[''])
        previous['error'] = previous['error'].fillna('')

        def fail(*args, **kwargs):
            raise AssertionError("células concluídas não devem ser recalculadas")

        monkeypatch.setattr(sweep_service, "estimate_risk", fail)
        resumed = sweep(_sweep_config(), resume_from=previous, show_progress=False)
        assert FileExporter().export_sweep(resumed) == text

    def test_invalid_config(self):
        with pytest.raises(ConfigurationError):
            _sweep_config(tests=['t', 'lasso'])
        with pytest.raises(ConfigurationError):
            _sweep_config(rho=[])
        with pytest.raises(ConfigurationError):
            SweepConfig.from_dict({'n': [10]})


class TestSelectionCalibration:

    def test_mcp_selection(self):
        service = CalibrationService(trials=100, seed=6, use_cache=False)
        constants = service.calibrate_selection("mcp", 1, 120, 20)
        assert constants.provenance_of('c_MCP_eta') == CALIBRATED
        assert constants.c_MCP_eta in settings.SELECTION_TUNING_GRID
        assert constants.c_star_a1 == constants.c_star_a3
        assert constants.provenance_of('c_star_a1') == constants.provenance_of('c_star_a3')

    def test_deterministic(self):
        first = CalibrationService(trials=100, seed=6, use_cache=False).calibrate_selection("mcp", 1, 120, 20)
        second = CalibrationService(trials=100, seed=6, use_cache=False).calibrate_selection("mcp", 1, 120, 20)
        assert first.to_dict() == second.to_dict()

    @pytest.mark.parametrize("selector, k0, trials", [("lasso", 1, 100), ("mcp", 0, 100), ("mcp", 1, 50)])
    def test_invalid_arguments(self, selector, k0, trials):
        with pytest.raises(ConfigurationError):
            CalibrationService(trials=trials, use_cache=False).calibrate_selection(selector, k0, 120, 20)


def _general_null_levels(k0, n, p, calibration_trials, trials):
    """Nível empírico de u e th em modo calibrado, com sementes distintas das da calibração."""
    params = TestParams(k0=k0)
    nulls = null_panel(k0, n, p, sigma_known=False)
    constants = CalibrationService(trials=calibration_trials, seed=17, use_cache=False).calibrate_all(
        ('u', 'th'), params, nulls, 0.05
    )
    service = RiskService(trials=trials, seed=23)
    return {
        name: max(rate for rate, _, _ in service.rejection_rates(make_runner(name, params, constants), nulls, 0))
        for name in ('u', 'th')
    }


class TestGeneralCalibratedLevel:

    def test_level_small(self):
        levels = _general_null_levels(2, 120, 60, 100, 100)
        assert levels['u'] <= 0.15
        assert levels['th'] <= 0.15

    @pytest.mark.slow
    @pytest.mark.parametrize("k0", [5, 20])
    def test_level_acceptance(self, k0):
        levels = _general_null_levels(k0, 300, 1000, 500, 500)
        assert levels['u'] <= 0.08
        assert levels['th'] <= 0.08


@pytest.mark.slow
class TestChiRateShape:

    P, K0, DELTA_EXTRA = 2000, 5, 400

    def _rho_sq(self, n):
        params = TestParams(k0=self.K0)
        nulls = null_panel(self.K0, n, self.P)
        constants = CalibrationService(trials=100, seed=41, use_cache=False).calibrate_test(
            'chi', params, nulls, 0.05
        )
        template = nulls[1].with_signal(delta=self.DELTA_EXTRA, rho=1.0)
        runner = make_runner('chi', params, constants)
        rho_hat = separation_search(runner, template, 0.5, (0.0, 20.0), trials=200, seed=43,
                                    null_scenarios=nulls)
        return rho_hat ** 2

    def test_rate_ratio(self):
        ratio = self._rho_sq(200) / self._rho_sq(800)
        assert 1.5 <= ratio <= 4.5
