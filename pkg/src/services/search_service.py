"""
Busca empírica da distância de separação rho_gamma por bisseção.
"""

import logging
from typing import Optional, Sequence, Tuple

from ..config import settings
from ..generators.presets import at_separation
from ..models.exceptions import ConfigurationError, NotBracketed
from ..models.scenario import Scenario
from .risk_service import ALTERNATIVE_STREAM, Decision, NULL_STREAM, RiskService


logger = logging.getLogger(__name__)


def separation_search(
    test: Decision,
    scenario_template: Scenario,
    gamma: float,
    rho_bounds: Tuple[float, float],
    trials: int,
    seed: int,
    null_scenarios: Optional[Sequence[Scenario]] = None,
    steps: int = settings.BISECTION_STEPS,
    show_progress: bool = False,
) -> float:
    """
    Menor rho (em unidades de sigma) com risco estimado <= gamma.

    O erro de tipo I é estimado uma vez; cada sonda reaproveita as mesmas
    sementes para a alternativa, no padrão do template com a separação
    sondada. Nulo padrão: o template com rho = 0.

    Raises:
        NotBracketed: risco(lo) < gamma ou risco(hi) > gamma
    """
    lo, hi = float(rho_bounds[0]), float(rho_bounds[1])
    if not 0 <= lo < hi:
        raise ConfigurationError(f"rho_bounds inválido: {rho_bounds}")
    if not 0 < gamma < 2:
        raise ConfigurationError(f"gamma deve estar em (0, 2) (recebido {gamma})")

    service = RiskService(trials, seed, show_progress)
    nulls = list(null_scenarios) if null_scenarios else [at_separation(scenario_template, 0.0)]
    type1 = max(rate for rate, _, _ in service.rejection_rates(test, nulls, NULL_STREAM))
    logger.info(f"Busca de separação: tipo I = {type1:.3f}, gamma = {gamma}")

    def risk_at(rho: float) -> float:
        rejects, excluded = service.rejection_counts(
            test, at_separation(scenario_template, rho), (ALTERNATIVE_STREAM, 0)
        )
        risk = type1 + 1.0 - rejects / (trials - excluded)
        logger.debug(f"  rho={rho:.6g}: risco={risk:.3f}")
        return risk

    risk_lo, risk_hi = risk_at(lo), risk_at(hi)
    if not risk_lo >= gamma >= risk_hi:
        raise NotBracketed(
            f"gamma={gamma} fora de [risco(hi)={risk_hi:.3f}, risco(lo)={risk_lo:.3f}] "
            f"para rho em [{lo}, {hi}]"
        )

    for _ in range(steps):
        mid = (lo + hi) / 2
        if risk_at(mid) > gamma:
            lo = mid
        else:
            hi = mid

    rho_hat = (lo + hi) / 2
    logger.info(f"Separação empírica: rho_hat = {rho_hat:.6g} (célula [{lo:.6g}, {hi:.6g}])")
    return rho_hat
