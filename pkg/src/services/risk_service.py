"""
Estimação de Monte Carlo dos erros de tipo I e II.

Cada ensaio usa uma subsequência própria do gerador, derivada de
(semente, fluxo, cenário, ensaio), de modo que a ordem de execução não
altera o resultado.
"""

import logging
import math
from typing import Callable, List, Sequence, Tuple, Union

from tqdm import tqdm

from ..config import settings
from ..generators.sampler import generate_sample
from ..models.exceptions import ConfigurationError, DidNotConverge, NumericalError
from ..models.results import RiskEstimate, TestReport
from ..models.scenario import RegressionSample, Scenario
from ..utils.rng import derive_seed


logger = logging.getLogger(__name__)

Decision = Callable[[RegressionSample, Scenario], Union[bool, TestReport]]

NULL_STREAM = 0
ALTERNATIVE_STREAM = 1


def wald_half_width(rate: float, trials: int) -> float:
    """1.96 sqrt(r (1 - r) / trials)."""
    return settings.WALD_Z * math.sqrt(rate * (1 - rate) / trials)


def _rejects(outcome: Union[bool, TestReport]) -> bool:
    if isinstance(outcome, TestReport):
        return bool(outcome.reject)
    return bool(outcome)


class RiskService:
    """Executa ensaios de Monte Carlo de um teste sobre painéis de cenários."""

    def __init__(self, trials: int = settings.DEFAULT_TRIALS, seed: int = settings.DEFAULT_SEED,
                 show_progress: bool = False):
        if trials < 1:
            raise ConfigurationError(f"trials deve ser >= 1 (recebido {trials})")
        self.trials = int(trials)
        self.seed = int(seed)
        self.show_progress = show_progress

    def rejection_counts(self, test: Decision, scenario: Scenario, stream: Tuple[int, ...]) -> Tuple[int, int]:
        """
        (rejeições, ensaios excluídos) sobre `trials` amostras do cenário.

        Só DidNotConverge exclui um ensaio; outros erros se propagam.
        """
        rejects = 0
        excluded = 0
        iterator = range(self.trials)
        if self.show_progress:
            iterator = tqdm(iterator, desc=f"Ensaios (fluxo {stream})", leave=False)

        for trial in iterator:
            sample = generate_sample(scenario, derive_seed(self.seed, *stream, trial))
            try:
                rejects += _rejects(test(sample, scenario))
            except DidNotConverge as e:
                excluded += 1
                logger.debug(f"Ensaio {trial} excluído: {e}")

        if excluded:
            logger.warning(
                f"{excluded}/{self.trials} ensaios excluídos por não convergência "
                f"({100 * excluded / self.trials:.1f}%)"
            )
        if excluded == self.trials:
            raise NumericalError(f"Todos os {self.trials} ensaios do fluxo {stream} foram excluídos")
        return rejects, excluded

    def rejection_rates(self, test: Decision, scenarios: Sequence[Scenario], stream: int) -> List[Tuple[float, int, int]]:
        """(taxa de rejeição, ensaios válidos, excluídos) por cenário."""
        rates = []
        for index, scenario in enumerate(scenarios):
            rejects, excluded = self.rejection_counts(test, scenario, (stream, index))
            valid = self.trials - excluded
            rates.append((rejects / valid, valid, excluded))
        return rates

    def estimate(self, test: Decision, null_scenarios: Sequence[Scenario],
                 alt_scenarios: Sequence[Scenario]) -> RiskEstimate:
        """Tipo I = pior nulo, tipo II = pior alternativa."""
        if not null_scenarios or not alt_scenarios:
            raise ConfigurationError("Listas de cenários nulos e alternativos não podem ser vazias")

        null_rates = self.rejection_rates(test, null_scenarios, NULL_STREAM)
        alt_rates = self.rejection_rates(test, alt_scenarios, ALTERNATIVE_STREAM)

        type1, valid1, _ = max(null_rates, key=lambda r: r[0])
        power, valid2, _ = min(alt_rates, key=lambda r: r[0])
        type2 = 1.0 - power
        excluded = sum(r[2] for r in null_rates + alt_rates)

        estimate = RiskEstimate(
            type1=type1,
            type2=type2,
            trials=self.trials,
            half_width_type1=wald_half_width(type1, valid1),
            half_width_type2=wald_half_width(type2, valid2),
            seed=self.seed,
            excluded=excluded,
        )
        logger.info(
            f"Risco estimado: tipo I={type1:.3f}, tipo II={type2:.3f}, "
            f"risco={estimate.risk:.3f} (+-{estimate.half_width:.3f}, {self.trials} ensaios)"
        )
        return estimate


def estimate_risk(
    test: Decision,
    null_scenarios: Sequence[Scenario],
    alt_scenarios: Sequence[Scenario],
    trials: int,
    seed: int,
    show_progress: bool = False,
) -> RiskEstimate:
    """Atalho funcional para RiskService.estimate."""
    return RiskService(trials, seed, show_progress).estimate(test, null_scenarios, alt_scenarios)
