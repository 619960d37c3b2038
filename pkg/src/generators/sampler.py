"""
Amostragem do modelo Y = X theta* + sigma eps e divisão em blocos contíguos.
"""

import logging

import numpy as np

from ..models.exceptions import ConfigurationError, TooFewRows
from ..models.scenario import RegressionSample, Scenario, SplitSample
from ..utils.rng import make_generator
from .covariance import cholesky_factor
from .signal import make_theta


logger = logging.getLogger(__name__)


def generate_sample(scenario: Scenario, seed: int) -> RegressionSample:
    """
    Gera (X, Y) reprodutível a partir de (cenário, semente).

    Linhas de X i.i.d. N(0, Sigma) via fator de Cholesky, eps i.i.d. N(0, 1),
    Y = X theta* + sigma eps.
    """
    n, p = scenario.n, scenario.p
    theta = make_theta(scenario.signal, p, scenario.sigma)
    factor = cholesky_factor(scenario.covariance, p)

    rng = make_generator(seed)
    x = rng.standard_normal((n, p))
    if factor is not None:
        x = x @ factor.T
    eps = rng.standard_normal(n)
    y = x @ theta + scenario.sigma * eps

    return RegressionSample(x=x, y=y, theta_star=theta, seed=int(seed))


def split_sample(sample: RegressionSample, parts: int) -> SplitSample:
    """
    Divide as linhas em `parts` blocos contíguos de tamanho floor(n/parts).

    Examples:
        n=10, parts=3 -> blocos de 3 linhas, linha final descartada

    Raises:
        TooFewRows: n < parts
    """
    if parts not in (2, 3):
        raise ConfigurationError(f"parts deve ser 2 ou 3 (recebido {parts})")
    n = sample.n
    if n < parts:
        raise TooFewRows(f"n = {n} < {parts} blocos")

    m = n // parts
    blocks = [(i * m, (i + 1) * m) for i in range(parts)]
    discarded = n - m * parts
    if discarded:
        logger.debug(f"Divisão em {parts} blocos: {discarded} linha(s) final(is) descartada(s)")
    return SplitSample(sample=sample, parts=blocks, m=m, discarded=discarded)
