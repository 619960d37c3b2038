"""
Calibração dos limiares por quantis nulos de Monte Carlo.

Cada teste expõe em TestReport.normalized a quantidade comparada à sua
constante calibrável; o limiar calibrado é o quantil (1 - alpha) empírico
dessa quantidade no pior cenário nulo do painel.
"""

import logging
import math
from dataclasses import asdict
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from tqdm import tqdm

from ..config import settings
from ..generators.presets import null_panel
from ..generators.sampler import generate_sample
from ..hypothesis.general import SELECTORS, select_support
from ..hypothesis.registry import CALIBRATED_CONSTANT, TestParams, make_runner
from ..hypothesis.selection import iteration_count, iterative_property_params, mcp_property_params
from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError, DidNotConverge
from ..models.results import TestReport
from ..models.scenario import CovarianceSpec, RegressionSample, Scenario
from ..utils.cache_manager import CacheManager
from ..utils.rng import derive_seed
from ..validators.property_s import required_property_scale


logger = logging.getLogger(__name__)

Statistic = Callable[[RegressionSample, Scenario], Union[float, np.ndarray, TestReport]]

CALIBRATION_STREAM = 2
SELECTION_STREAM = 3
MIN_CALIBRATION_TRIALS = 100

# phi^(f) e phi^(i) dependem de c_t pelo pré-teste e pelo truncamento
CALIBRATION_ORDER = ('t', 'chi', 'f', 'i', 'u', 'th', 'th_ith')

# Constante de ajuste do seletor e constantes dos parâmetros da Propriedade S
SELECTION_CONSTANTS = {
    'mcp': ('c_MCP_eta', ('c_star_a1', 'c_star_a3')),
    'iterative': ('c_SL_eta', ('c_ith_eta',)),
}


def _normalized(outcome) -> np.ndarray:
    if isinstance(outcome, TestReport):
        outcome = outcome.normalized
    return np.asarray(outcome, dtype=float)


def null_statistics(
    statistic: Statistic,
    null_scenarios: Sequence[Scenario],
    trials: int,
    seed: int,
    show_progress: bool = False,
) -> List[np.ndarray]:
    """Estatísticas normalizadas por cenário nulo: arrays (ensaios,) ou (ensaios, L)."""
    per_scenario = []
    for index, scenario in enumerate(null_scenarios):
        values = []
        iterator = range(trials)
        if show_progress:
            iterator = tqdm(iterator, desc=f"Calibração (nulo {index + 1}/{len(null_scenarios)})", leave=False)
        for trial in iterator:
            sample = generate_sample(scenario, derive_seed(seed, CALIBRATION_STREAM, index, trial))
            try:
                values.append(_normalized(statistic(sample, scenario)))
            except DidNotConverge as e:
                logger.debug(f"Ensaio de calibração {trial} excluído: {e}")
        if not values:
            raise ConfigurationError(f"Nenhum ensaio válido no cenário nulo {index}")
        per_scenario.append(np.stack(values))
    return per_scenario


def worst_case_quantile(per_scenario: Sequence[np.ndarray], alpha: float) -> Union[float, np.ndarray]:
    """
    Máximo entre cenários do quantil (1 - alpha) empírico (método 'higher').

    alpha = 1 devolve o mínimo observado.
    """
    if not 0 < alpha <= 1:
        raise ConfigurationError(f"alpha deve estar em (0, 1] (recebido {alpha})")
    quantiles = [np.quantile(values, 1 - alpha, method="higher", axis=0) for values in per_scenario]
    worst = np.max(np.stack(quantiles), axis=0)
    return float(worst) if np.ndim(worst) == 0 else worst


def calibrate_threshold(
    statistic: Statistic,
    null_scenarios: Sequence[Scenario],
    alpha: float,
    trials: int,
    seed: int,
    show_progress: bool = False,
) -> Union[float, np.ndarray]:
    """
    Limiar calibrado de uma família de estatísticas.

    Raises:
        ConfigurationError: trials < 100 ou painel vazio
    """
    if trials < MIN_CALIBRATION_TRIALS:
        raise ConfigurationError(f"Calibração exige ao menos {MIN_CALIBRATION_TRIALS} ensaios (recebido {trials})")
    if not null_scenarios:
        raise ConfigurationError("Painel de cenários nulos vazio")
    per_scenario = null_statistics(statistic, null_scenarios, trials, seed, show_progress)
    return worst_case_quantile(per_scenario, alpha)


def _as_constant(name: str, value) -> Optional[Union[float, tuple]]:
    """Valor calibrado da constante; None quando o quantil nulo não é positivo."""
    if name == 'v_i':
        return tuple(float(v) for v in np.atleast_1d(value))
    value = float(value)
    if name != 'v_f' and not value > 0:
        return None
    return value


class CalibrationService:
    """Calibra as constantes dos testes, com cache opcional das estatísticas nulas."""

    def __init__(self, trials: int = settings.CALIBRATION_TRIALS, seed: int = settings.DEFAULT_SEED,
                 use_cache: bool = True, cache: Optional[CacheManager] = None, show_progress: bool = False):
        self.trials = int(trials)
        self.seed = int(seed)
        self.cache = (cache or CacheManager()) if use_cache else None
        self.show_progress = show_progress

    def _statistics(self, name: str, params: TestParams, null_scenarios: Sequence[Scenario],
                    constants: DesignConstants) -> List[np.ndarray]:
        key = None
        if self.cache is not None:
            key = CacheManager.make_key(
                test=name,
                params=asdict(params),
                scenarios=[s.to_dict() for s in null_scenarios],
                trials=self.trials,
                seed=self.seed,
                constants=constants.to_dict(),
            )
            cached = self.cache.get(key)
            if cached is not None:
                logger.info(f"Estatísticas nulas de {name} recuperadas do cache")
                return cached

        runner = make_runner(name, params, constants)
        statistics = null_statistics(runner, null_scenarios, self.trials, self.seed, self.show_progress)
        if self.cache is not None:
            self.cache.set(key, statistics)
        return statistics

    def calibrate_test(
        self,
        name: str,
        params: TestParams,
        null_scenarios: Sequence[Scenario],
        alpha: float,
        constants: Optional[DesignConstants] = None,
    ) -> DesignConstants:
        """Devolve constants com a constante do teste calibrada (proveniência 'calibrated')."""
        constants = constants or DesignConstants()
        if name not in CALIBRATED_CONSTANT:
            raise ConfigurationError(
                f"Teste {name} não tem constante calibrável (use {', '.join(CALIBRATED_CONSTANT)})"
            )
        if self.trials < MIN_CALIBRATION_TRIALS:
            raise ConfigurationError(
                f"Calibração exige ao menos {MIN_CALIBRATION_TRIALS} ensaios (recebido {self.trials})"
            )
        if not null_scenarios:
            raise ConfigurationError("Painel de cenários nulos vazio")

        target = CALIBRATED_CONSTANT[name]
        if target == 'v_i':
            # a grade é fixa por (k0, p); um valor provisório de v_i seria rejeitado pelo tamanho
            constants = constants.with_values(provenance=constants.provenance_of('v_i'), v_i=None)

        logger.info(f"Calibrando {target} via teste {name} ({self.trials} ensaios, {len(null_scenarios)} nulos)")
        statistics = self._statistics(name, params, null_scenarios, constants)
        quantile = worst_case_quantile(statistics, alpha)
        value = _as_constant(target, quantile)
        if value is None:
            # qualquer limiar positivo já controla o nível sob esse painel
            logger.warning(f"Quantil nulo de {target} = {quantile:.4g} <= 0; mantendo o valor analítico")
            return constants
        logger.info(f"  {target} calibrado = {value}")
        return constants.with_values(**{target: value})

    def calibrate_all(
        self,
        names: Sequence[str],
        params: TestParams,
        null_scenarios: Sequence[Scenario],
        alpha: float,
        constants: Optional[DesignConstants] = None,
    ) -> DesignConstants:
        """Calibra vários testes na ordem em que as constantes dependem umas das outras."""
        constants = constants or DesignConstants()
        ordered = [n for n in CALIBRATION_ORDER if n in names]
        unknown = set(names) - set(ordered)
        if unknown:
            raise ConfigurationError(f"Testes sem constante calibrável: {sorted(unknown)}")

        calibrated: Dict[str, str] = {}
        for name in ordered:
            target = CALIBRATED_CONSTANT[name]
            if target in calibrated:
                logger.info(f"{target} já calibrado via {calibrated[target]}; {name} ignorado")
                continue
            constants = self.calibrate_test(name, params, null_scenarios, alpha, constants)
            calibrated[target] = name
        return constants

    # ─────────────────────────────────────────────────────────────────────
    # Seleção de suporte
    # ─────────────────────────────────────────────────────────────────────

    def _samples(self, scenario: Scenario, index: int, label: str):
        iterator = range(self.trials)
        if self.show_progress:
            iterator = tqdm(iterator, desc=label, leave=False)
        for trial in iterator:
            yield trial, generate_sample(scenario, derive_seed(self.seed, SELECTION_STREAM, index, trial))

    def _tuning_requirement(self, selector: str, sample: RegressionSample, max_size: int,
                            eta: float, delta: float, constants: DesignConstants) -> float:
        """Menor valor da grade com |S| <= max_size; |S| decresce com a constante de ajuste."""
        tuning = SELECTION_CONSTANTS[selector][0]
        for value in settings.SELECTION_TUNING_GRID:
            trial_constants = constants.with_values(**{tuning: value})
            support = select_support(sample.x, sample.y, eta, delta, trial_constants, selector, n=sample.n)
            if len(support) <= max_size:
                return value
        return math.inf

    def calibrate_selection(
        self,
        selector: str,
        k0: int,
        n: int,
        p: int,
        eta: float = 2.0,
        delta: float = 0.05,
        constants: Optional[DesignConstants] = None,
        size_alpha: float = settings.SELECTION_SIZE_ALPHA,
        coverage: float = settings.PROPERTY_S_COVERAGE,
        sigma: float = 1.0,
        covariance: Optional[CovarianceSpec] = None,
    ) -> DesignConstants:
        """
        Calibra a constante de ajuste de um seletor e a escala da Propriedade S.

        Etapa 1: sob theta* = 0, o menor valor da grade de ajuste com
        |S| <= k0 em pelo menos (1 - size_alpha) dos ensaios.
        Etapa 2: sob k0 spikes de 10 sigma sqrt(log p / n), o quantil
        `coverage` da menor escala c com que S satisfaz a Propriedade S
        [c a1, a2, c a3]. Quantil 0 mantém os parâmetros analíticos.

        Raises:
            ConfigurationError: seletor desconhecido, k0 < 1, trials < 100,
                nenhum valor da grade controla |S| ou o limite de tamanho
                falha em mais de (1 - coverage) dos ensaios
        """
        constants = constants or DesignConstants()
        if selector not in SELECTION_CONSTANTS:
            raise ConfigurationError(f"Seletor desconhecido: {selector} (use {', '.join(SELECTORS)})")
        if k0 < 1:
            raise ConfigurationError(f"Calibração da seleção exige k0 >= 1 (recebido {k0})")
        if self.trials < MIN_CALIBRATION_TRIALS:
            raise ConfigurationError(
                f"Calibração exige ao menos {MIN_CALIBRATION_TRIALS} ensaios (recebido {self.trials})"
            )
        if not (0 < size_alpha < 1 and 0 < coverage < 1):
            raise ConfigurationError(f"size_alpha e coverage devem estar em (0, 1) (recebido {size_alpha}, {coverage})")

        tuning, property_names = SELECTION_CONSTANTS[selector]
        empty, spikes = null_panel(k0, n, p, sigma, sigma_known=False, covariance=covariance)
        logger.info(f"Calibrando a seleção {selector} (k0={k0}, n={n}, p={p}, {self.trials} ensaios)")

        requirements = []
        for trial, sample in self._samples(empty, 0, f"Seleção {selector} (theta* = 0)"):
            try:
                requirements.append(self._tuning_requirement(selector, sample, k0, eta, delta, constants))
            except DidNotConverge as e:
                logger.debug(f"Ensaio de seleção {trial} excluído: {e}")
        if not requirements:
            raise ConfigurationError("Nenhum ensaio válido sob theta* = 0")
        value = float(np.quantile(requirements, 1 - size_alpha, method="higher"))
        if not math.isfinite(value):
            raise ConfigurationError(
                f"Nenhum valor de {tuning} na grade mantém |S| <= {k0} sob theta* = 0"
            )
        constants = constants.with_values(**{tuning: value})
        logger.info(f"  {tuning} calibrado = {value}")

        unit = constants.with_values(**{name: 1.0 for name in property_names})
        if selector == "mcp":
            base = mcp_property_params(unit)
        else:
            base = iterative_property_params(iteration_count(n), unit)

        scales = []
        for trial, sample in self._samples(spikes, 1, f"Seleção {selector} (Propriedade S)"):
            try:
                support = select_support(sample.x, sample.y, eta, delta, constants, selector, n=sample.n)
            except DidNotConverge as e:
                logger.debug(f"Ensaio de seleção {trial} excluído: {e}")
                continue
            scales.append(required_property_scale(support, sample.theta_star, sigma, base, n, p))
        if not scales:
            raise ConfigurationError("Nenhum ensaio válido sob k0 spikes")
        scale = float(np.quantile(scales, coverage, method="higher"))
        if not math.isfinite(scale):
            raise ConfigurationError(
                f"|S| > {base.a2:g} k0 em mais de {1 - coverage:.0%} dos ensaios com {selector}"
            )
        if scale == 0.0:
            logger.info("  Propriedade S já vale com os parâmetros analíticos")
            return constants

        logger.info(f"  escala da Propriedade S = {scale:.4g} ({', '.join(property_names)})")
        return constants.with_values(**{name: scale for name in property_names})
