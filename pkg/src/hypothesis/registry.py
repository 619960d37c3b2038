"""
Registro dos testes por nome, com interface uniforme (amostra, cenário) -> relatório.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

from ..generators.sampler import split_sample
from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError
from ..models.results import TestReport
from ..models.scenario import RegressionSample, Scenario
from ..validators.conditions import check_conditions
from . import general, independent


logger = logging.getLogger(__name__)

TestRunner = Callable[[RegressionSample, Scenario], TestReport]

INDEPENDENT_TESTS = ("t", "chi", "f", "i", "ag")
GENERAL_TESTS = ("u", "th", "th_ith", "general_ag")
TEST_NAMES = INDEPENDENT_TESTS + GENERAL_TESTS

# Constante calibrada por cada teste (quantidade 'normalized' do relatório)
CALIBRATED_CONSTANT = {
    't': 'c_t',
    'chi': 'c_chi',
    'f': 'v_f',
    'i': 'v_i',
    'u': 'c_u_eta',
    'th': 'c_star',
    'th_ith': 'c_star',
}


@dataclass(frozen=True)
class TestParams:
    """Parâmetros comuns dos testes; sigma None usa o sigma do cenário."""

    __test__ = False

    k0: int
    alpha: float = 0.05
    delta: float = 0.05
    eta: float = 2.0
    sigma: Optional[float] = None
    use_classical_lasso: bool = False
    selector: str = "mcp"

    @classmethod
    def from_dict(cls, data: dict) -> "TestParams":
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Parâmetros de teste inválidos: {e}") from e


def setting_of(name: str) -> str:
    """'independent' ou 'general'."""
    if name in INDEPENDENT_TESTS:
        return "independent"
    if name in GENERAL_TESTS:
        return "general"
    raise ConfigurationError(f"Teste desconhecido: {name} (disponíveis: {', '.join(TEST_NAMES)})")


def _known_sigma(params: TestParams, scenario: Scenario) -> float:
    if params.sigma is not None:
        return params.sigma
    if not scenario.sigma_known:
        raise ConfigurationError("Testes do cenário independente exigem sigma conhecido")
    return scenario.sigma


def make_runner(
    name: str,
    params: TestParams,
    constants: Optional[DesignConstants] = None,
) -> TestRunner:
    """Devolve a função (amostra, cenário) -> TestReport do teste pedido."""
    setting_of(name)
    constants = constants or DesignConstants()
    split_tests: Dict[str, Callable] = {
        't': independent.test_t,
        'chi': independent.test_chi,
        'f': independent.test_f,
        'i': independent.test_i,
    }

    def run(sample: RegressionSample, scenario: Scenario) -> TestReport:
        if name in split_tests:
            sigma = _known_sigma(params, scenario)
            return split_tests[name](
                split_sample(sample, 3), params.k0, sigma, params.alpha, params.delta,
                constants, params.use_classical_lasso,
            )
        if name == "ag":
            return independent.test_ag(
                sample, params.k0, _known_sigma(params, scenario), params.alpha, params.delta,
                constants, params.use_classical_lasso,
            )
        if name == "u":
            return general.test_u(
                split_sample(sample, 2), params.k0, params.alpha, params.delta, params.eta, constants
            )
        if name in ("th", "th_ith"):
            return general.test_th_selected(
                split_sample(sample, 2), params.k0, params.alpha, params.delta, params.eta, constants,
                selector="iterative" if name == "th_ith" else "mcp",
            )
        return general.test_general_ag(
            sample, params.k0, params.alpha, params.delta, params.eta, constants, params.selector
        )

    return run


def run_test(
    name: str,
    sample: RegressionSample,
    scenario: Scenario,
    params: TestParams,
    constants: Optional[DesignConstants] = None,
) -> TestReport:
    """Executa um teste pelo nome sobre uma amostra, avisando se A/B falham."""
    check_conditions(scenario, params.k0, params.alpha, constants or DesignConstants())
    report = make_runner(name, params, constants)(sample, scenario)
    logger.info(f"Teste {name}: rejeita={report.reject} (modo {report.threshold_mode})")
    return report
