"""
Diagnóstico das condições de aplicabilidade A[alpha] e B[alpha].

As condições são apenas consultivas: nunca abortam, só registram folgas e
emitem WARNING quando falham.
"""

import logging
import math
from dataclasses import dataclass

from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError
from ..models.scenario import Scenario


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConditionReport:
    """
    Resultado das condições A e B.

    Attributes:
        condition_A: (k0 v 1) log(p/alpha) + log^2(p/alpha) <= c_A n
        condition_B: (k0 v 1)[1 + log(p/alpha)] + log^3(1/alpha)
            + log(p) log(1/alpha) <= c_B n  e  p >= c_B'
        margin_A: c_A n - lado esquerdo de A
        margin_B: c_B n - lado esquerdo de B
    """

    condition_A: bool
    condition_B: bool
    margin_A: float
    margin_B: float

    def to_dict(self) -> dict:
        return {
            'condition_A': self.condition_A,
            'condition_B': self.condition_B,
            'margins': {'A': self.margin_A, 'B': self.margin_B},
        }


class ConditionChecker:
    """Avalia as condições A/B com as constantes do registro."""

    @staticmethod
    def lhs_condition_A(n: int, p: int, k0: int, alpha: float) -> float:
        log_term = math.log(p / alpha)
        return max(k0, 1) * log_term + log_term ** 2

    @staticmethod
    def lhs_condition_B(n: int, p: int, k0: int, alpha: float) -> float:
        log_inv = math.log(1 / alpha)
        return max(k0, 1) * (1 + math.log(p / alpha)) + log_inv ** 3 + math.log(p) * log_inv

    @staticmethod
    def evaluate(n: int, p: int, k0: int, alpha: float, constants: DesignConstants) -> ConditionReport:
        """Avaliação silenciosa, usada pelos testes a cada ensaio."""
        if not 0 < alpha < 1:
            raise ConfigurationError(f"alpha deve estar em (0, 1) (recebido {alpha})")

        margin_A = constants.condition_A_c * n - ConditionChecker.lhs_condition_A(n, p, k0, alpha)
        margin_B = constants.condition_B_c * n - ConditionChecker.lhs_condition_B(n, p, k0, alpha)
        return ConditionReport(
            condition_A=margin_A >= 0,
            condition_B=margin_B >= 0 and p >= constants.condition_B_p_min,
            margin_A=margin_A,
            margin_B=margin_B,
        )

    @staticmethod
    def check(scenario: Scenario, k0: int, alpha: float, constants: DesignConstants) -> ConditionReport:
        n, p = scenario.n, scenario.p
        report = ConditionChecker.evaluate(n, p, k0, alpha, constants)

        if not report.condition_A:
            logger.warning(f"Condição A falhou (n={n}, p={p}, k0={k0}, alpha={alpha}): folga {report.margin_A:.3g}")
        if not report.condition_B:
            logger.warning(f"Condição B falhou (n={n}, p={p}, k0={k0}, alpha={alpha}): folga {report.margin_B:.3g}")
        return report


def check_conditions(
    scenario: Scenario,
    k0: int,
    alpha: float,
    constants: DesignConstants
) -> ConditionReport:
    """Atalho funcional para ConditionChecker.check."""
    return ConditionChecker.check(scenario, k0, alpha, constants)
