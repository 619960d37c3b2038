"""Fixtures compartilhadas pelos testes."""

import numpy as np
import pytest

from src.generators.sampler import generate_sample
from src.models.design_constants import DesignConstants
from src.models.scenario import CovarianceSpec, Scenario, SignalSpec


@pytest.fixture
def constants():
    return DesignConstants()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_scenario():
    def factory(n=90, p=60, k0=0, delta=0, rho=0.0, pattern="spikes", spike_scale=10.0,
                sigma=1.0, sigma_known=True, covariance=None):
        return Scenario(
            n=n, p=p, sigma=sigma, sigma_known=sigma_known,
            covariance=covariance or CovarianceSpec(),
            signal=SignalSpec(k0=k0, delta=delta, rho=rho, pattern=pattern, spike_scale=spike_scale),
        )
    return factory


@pytest.fixture
def make_sample(make_scenario):
    def factory(seed=7, **kwargs):
        return generate_sample(make_scenario(**kwargs), seed)
    return factory
