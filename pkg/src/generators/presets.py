"""
Painéis de cenários usados na calibração e na estimação de risco.

O supremo sobre hipóteses compostas é aproximado por um painel finito:
nulos {theta* = 0, k0 spikes grandes} e alternativas spikes, flat_small e
decaying à separação pedida.
"""

import logging
import math
from typing import List, Optional, Sequence

from ..config import settings
from ..models.exceptions import PatternInfeasible
from ..models.scenario import CovarianceSpec, Scenario, SignalSpec
from .signal import make_theta


logger = logging.getLogger(__name__)

ALTERNATIVE_PATTERNS = ("spikes", "flat_small", "decaying")


def null_spike_scale(n: int, p: int) -> float:
    """Magnitude dos spikes nulos em unidades de sigma: 10 sqrt(log p / n)."""
    return settings.NULL_SPIKE_FACTOR * math.sqrt(math.log(max(p, 2)) / n)


def null_panel(
    k0: int,
    n: int,
    p: int,
    sigma: float = 1.0,
    sigma_known: bool = True,
    covariance: Optional[CovarianceSpec] = None,
) -> List[Scenario]:
    """
    Nulos {theta* = 0} e, para k0 > 0, {k0 spikes de 10 sigma sqrt(log p / n)}.
    """
    covariance = covariance or CovarianceSpec()
    base = Scenario(n=n, p=p, sigma=sigma, sigma_known=sigma_known, covariance=covariance)
    panel = [base]
    if k0 > 0:
        panel.append(base.with_signal(k0=k0, delta=0, rho=0.0, pattern="spikes",
                                      spike_scale=null_spike_scale(n, p)))
    return panel


def alternative_panel(
    k0: int,
    delta: int,
    rho: float,
    n: int,
    p: int,
    sigma: float = 1.0,
    sigma_known: bool = True,
    covariance: Optional[CovarianceSpec] = None,
    patterns: Sequence[str] = ALTERNATIVE_PATTERNS,
) -> List[Scenario]:
    """
    Alternativas a distância rho*sigma de B0[k0], uma por padrão viável.

    Padrões inviáveis para (k0, delta, rho, p) são omitidos.
    """
    covariance = covariance or CovarianceSpec()
    spike_scale = max(null_spike_scale(n, p), rho / math.sqrt(delta) if delta else 0.0)
    panel = []
    for pattern in patterns:
        signal = SignalSpec(k0=k0, delta=delta, rho=rho, pattern=pattern, spike_scale=spike_scale)
        try:
            make_theta(signal, p, sigma)
        except PatternInfeasible as e:
            logger.debug(f"Padrão {pattern} omitido do painel: {e}")
            continue
        panel.append(Scenario(n=n, p=p, sigma=sigma, sigma_known=sigma_known,
                              covariance=covariance, signal=signal))
    if not panel:
        raise PatternInfeasible(f"Nenhum padrão viável para k0={k0}, delta={delta}, rho={rho}, p={p}")
    return panel


def at_separation(template: Scenario, rho: float) -> Scenario:
    """Cenário do template com a separação trocada por rho."""
    return template.with_signal(rho=float(rho))
