"""Testes do modelo: cenários, covariâncias, sinais, amostragem, constantes e condições."""

import itertools
import json
import math

import numpy as np
import pytest

from src.generators.covariance import cholesky_factor, covariance_matrix
from src.generators.presets import alternative_panel, null_panel, null_spike_scale
from src.generators.sampler import generate_sample, split_sample
from src.generators.signal import d2_to_sparse, make_theta
from src.models.design_constants import ANALYTIC, CALIBRATED, DesignConstants
from src.models.exceptions import (
    ConfigurationError,
    NotSymmetric,
    PatternInfeasible,
    SpectrumOutOfClass,
    TooFewRows,
)
from src.models.scenario import CovarianceSpec, Scenario, SignalSpec
from src.validators.conditions import ConditionChecker, check_conditions


def _d2_exhaustive(theta, k0):
    """min sobre suportes de tamanho k0 da norma fora do suporte."""
    p = theta.size
    best = math.inf
    for support in itertools.combinations(range(p), min(k0, p)):
        rest = np.delete(theta, list(support))
        best = min(best, float(np.linalg.norm(rest)))
    return best


class TestScenario:

    def test_rejects_small_n(self):
        with pytest.raises(ConfigurationError):
            Scenario(n=2, p=5)

    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(ConfigurationError):
            Scenario(n=10, p=5, sigma=0.0)

    def test_dict_roundtrip_keeps_fields(self):
        scenario = Scenario(
            n=30, p=12, sigma=0.5, sigma_known=False,
            covariance=CovarianceSpec(kind="ar1", param=0.3, eta=3.0),
            signal=SignalSpec(k0=2, delta=3, rho=1.5, pattern="decaying", spike_scale=4.0),
        )
        restored = Scenario.from_dict(json.loads(json.dumps(scenario.to_dict())))
        assert restored.to_dict() == scenario.to_dict()

    def test_missing_required_field(self):
        with pytest.raises(ConfigurationError):
            Scenario.from_dict({'p': 10})

    def test_unknown_pattern(self):
        with pytest.raises(ConfigurationError):
            SignalSpec(pattern="triangular")


class TestCovariance:

    def test_identity(self):
        np.testing.assert_array_equal(covariance_matrix(CovarianceSpec(), 4), np.eye(4))
        assert cholesky_factor(CovarianceSpec(), 4) is None

    def test_ar1_entries(self):
        sigma = covariance_matrix(CovarianceSpec(kind="ar1", param=0.2, eta=2.0), 4)
        assert sigma[0, 3] == pytest.approx(0.2 ** 3)
        np.testing.assert_allclose(sigma, sigma.T)

    def test_ar1_outside_class(self):
        # (1 + a)/(1 - a) = 3 > eta = 2
        with pytest.raises(SpectrumOutOfClass):
            covariance_matrix(CovarianceSpec(kind="ar1", param=0.5, eta=2.0), 10)

    def test_equicorrelation_spectrum(self):
        p, r = 5, 0.1
        sigma = covariance_matrix(CovarianceSpec(kind="equicorrelation", param=r, eta=2.0), p)
        eigenvalues = np.linalg.eigvalsh(sigma)
        assert eigenvalues[0] == pytest.approx(1 - r)
        assert eigenvalues[-1] == pytest.approx(1 + (p - 1) * r)

    def test_explicit_asymmetric(self):
        matrix = np.eye(3)
        matrix[0, 1] = 1e-6
        with pytest.raises(NotSymmetric):
            covariance_matrix(CovarianceSpec(kind="explicit", matrix=matrix, eta=2.0), 3)

    def test_explicit_out_of_band(self):
        matrix = np.diag([1.0, 1.0, 5.0])
        with pytest.raises(SpectrumOutOfClass):
            covariance_matrix(CovarianceSpec(kind="explicit", matrix=matrix, eta=2.0), 3)

    def test_cholesky_reconstructs(self):
        spec = CovarianceSpec(kind="ar1", param=0.3, eta=2.0)
        factor = cholesky_factor(spec, 6)
        np.testing.assert_allclose(factor @ factor.T, covariance_matrix(spec, 6), atol=1e-12)


class TestSignal:

    @pytest.mark.parametrize("p", range(1, 9))
    def test_d2_matches_exhaustive_search(self, p, rng):
        for _ in range(5):
            theta = rng.normal(size=p)
            for k0 in range(p + 1):
                assert d2_to_sparse(theta, k0) == pytest.approx(_d2_exhaustive(theta, k0), abs=1e-12)

    @pytest.mark.parametrize("pattern", ["spikes", "flat_small", "decaying"])
    def test_distance_equals_rho_sigma(self, pattern):
        signal = SignalSpec(k0=3, delta=5, rho=2.0, pattern=pattern, spike_scale=10.0)
        theta = make_theta(signal, 20, sigma=0.5)
        assert d2_to_sparse(theta, 3) == pytest.approx(1.0, abs=1e-12)
        assert np.count_nonzero(theta) == 8

    def test_flat_small_all_equal(self):
        theta = make_theta(SignalSpec(k0=2, delta=4, rho=2.0, pattern="flat_small"), 10, 1.0)
        np.testing.assert_allclose(np.abs(theta[:6]), 1.0)

    def test_signs_alternate(self):
        theta = make_theta(SignalSpec(k0=2, delta=2, rho=1.0), 6, 1.0)
        assert list(np.sign(theta[:4])) == [1, -1, 1, -1]

    def test_delta_zero_with_rho(self):
        with pytest.raises(PatternInfeasible):
            make_theta(SignalSpec(k0=1, delta=0, rho=1.0), 5, 1.0)

    def test_too_many_coefficients(self):
        with pytest.raises(PatternInfeasible):
            make_theta(SignalSpec(k0=3, delta=3, rho=1.0), 5, 1.0)

    def test_spikes_smaller_than_tail(self):
        with pytest.raises(PatternInfeasible):
            make_theta(SignalSpec(k0=1, delta=1, rho=5.0, spike_scale=1.0), 5, 1.0)

    def test_explicit_vector(self):
        vector = np.array([0.0, 2.0, 0.0])
        theta = make_theta(SignalSpec(pattern="explicit", vector=vector), 3, 1.0)
        np.testing.assert_array_equal(theta, vector)


class TestSampler:

    def test_deterministic_given_seed(self, make_scenario):
        scenario = make_scenario(n=12, p=5, k0=1, delta=1, rho=1.0)
        a = generate_sample(scenario, 99)
        b = generate_sample(scenario, 99)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    def test_different_seeds_differ(self, make_scenario):
        scenario = make_scenario(n=12, p=5)
        assert not np.array_equal(generate_sample(scenario, 1).y, generate_sample(scenario, 2).y)

    def test_noiseless_relation(self, make_scenario):
        sample = generate_sample(make_scenario(n=40, p=5, k0=2, delta=1, rho=1.0, sigma=1e-300), 3)
        np.testing.assert_allclose(sample.y, sample.x @ sample.theta_star)

    def test_first_and_second_moments(self, make_scenario):
        spec = CovarianceSpec(kind="ar1", param=0.3, eta=2.0)
        scenario = make_scenario(n=20000, p=4, k0=1, delta=1, rho=1.0, sigma=0.5, covariance=spec)
        sample = generate_sample(scenario, 5)
        n = sample.n

        np.testing.assert_allclose(sample.x.mean(axis=0), 0.0, atol=4 / np.sqrt(n))
        np.testing.assert_allclose(np.cov(sample.x, rowvar=False), covariance_matrix(spec, 4), atol=0.05)

        noise = sample.y - sample.x @ sample.theta_star
        assert abs(noise.mean()) <= 4 * 0.5 / np.sqrt(n)
        assert noise.var() == pytest.approx(0.25, abs=0.0125)

    def test_split_discards_trailing_rows(self, make_sample):
        split = split_sample(make_sample(n=10, p=3), 3)
        assert split.m == 3
        assert split.discarded == 1
        x2, y2 = split.part(2)
        np.testing.assert_array_equal(x2, split.sample.x[6:9])

    def test_split_too_few_rows(self, make_sample):
        sample = make_sample(n=3, p=2)
        split_sample(sample, 3)
        with pytest.raises(ConfigurationError):
            split_sample(sample, 4)

    def test_too_few_rows_error(self, make_sample):
        sample = make_sample(n=3, p=2)
        small = type(sample)(sample.x[:2], sample.y[:2], sample.theta_star, sample.seed)
        with pytest.raises(TooFewRows):
            split_sample(small, 3)


class TestPresets:

    def test_null_panel(self):
        panel = null_panel(k0=5, n=300, p=1000)
        assert len(panel) == 2
        assert panel[0].signal.k0 == 0
        theta = make_theta(panel[1].signal, 1000, 1.0)
        assert np.count_nonzero(theta) == 5
        assert d2_to_sparse(theta, 5) == 0.0
        assert abs(theta[0]) == pytest.approx(null_spike_scale(300, 1000))

    def test_null_panel_k0_zero(self):
        assert len(null_panel(k0=0, n=300, p=1000)) == 1

    def test_alternative_panel_distances(self):
        for scenario in alternative_panel(k0=2, delta=4, rho=1.5, n=100, p=50):
            theta = make_theta(scenario.signal, 50, 1.0)
            assert d2_to_sparse(theta, 2) == pytest.approx(1.5)


class TestDesignConstants:

    def test_defaults_are_analytic(self, constants):
        assert constants.mode_of('c_t') == "analytic"
        assert constants.provenance_of('c_t') == ANALYTIC

    def test_with_values_tags_provenance(self, constants):
        updated = constants.with_values(c_t=2.0)
        assert updated.c_t == 2.0
        assert updated.provenance_of('c_t') == CALIBRATED
        assert updated.mode_of('c_t', 'c_chi') == "calibrated"
        assert constants.c_t != 2.0

    def test_rejects_nonpositive(self):
        with pytest.raises(ConfigurationError):
            DesignConstants(c_t=0.0)

    def test_rejects_small_kappa(self):
        with pytest.raises(ConfigurationError):
            DesignConstants(c_MCP_prime_eta=0.5)

    def test_unknown_constant(self, constants):
        with pytest.raises(ConfigurationError):
            constants.with_values(c_unknown=1.0)

    def test_analytic_only_resets_calibrated(self, constants):
        calibrated = constants.with_values(c_t=1.7, v_f=3.0)
        reset = calibrated.analytic_only()
        assert reset.c_t == DesignConstants().c_t
        assert reset.v_f is None
        assert reset.calibrated_names() == ()

    def test_save_and_load(self, constants, tmp_path):
        original = constants.with_values(c_chi=1.25, v_i=(0.5, 0.75))
        path = tmp_path / "constants.json"
        original.save(str(path))
        loaded = DesignConstants.load(str(path))
        assert loaded.c_chi == 1.25
        assert loaded.v_i == (0.5, 0.75)
        assert loaded.provenance_of('c_chi') == CALIBRATED
        assert loaded.provenance_of('c_t') == ANALYTIC


class TestConditions:

    def test_condition_A_margin(self, constants):
        n, p, k0, alpha = 1000, 100, 2, 0.05
        log_term = math.log(p / alpha)
        report = ConditionChecker.evaluate(n, p, k0, alpha, constants)
        assert report.margin_A == pytest.approx(n - (2 * log_term + log_term ** 2))
        assert report.condition_A

    def test_condition_B_full_inequality(self, constants):
        n, p, k0, alpha = 200, 50, 0, 0.1
        lhs = 1 * (1 + math.log(p / alpha)) + math.log(1 / alpha) ** 3 + math.log(p) * math.log(1 / alpha)
        report = ConditionChecker.evaluate(n, p, k0, alpha, constants)
        assert report.margin_B == pytest.approx(n - lhs)

    def test_failure_logs_warning(self, constants, caplog):
        report = check_conditions(Scenario(n=10, p=1000), 5, 0.05, constants)
        assert not report.condition_A
        assert "Condição A falhou" in caplog.text

    def test_invalid_alpha(self, constants):
        with pytest.raises(ConfigurationError):
            ConditionChecker.evaluate(100, 10, 1, 1.5, constants)
