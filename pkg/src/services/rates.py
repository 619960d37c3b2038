"""
Taxas de referência rho*^2 das tabelas de separação minimax.

Os regimes são separados por p^{1/2 - varsigma} e p^{1/2 + varsigma}; entre
os dois limites a taxa fica em aberto e o resultado traz os dois candidatos.
"""

import logging
import math
from typing import Dict

from ..config import settings
from ..models.exceptions import InvalidQuery
from ..models.results import RateQuery


logger = logging.getLogger(__name__)

SETTINGS = ("independent", "general")


def _validate(q: RateQuery):
    if q.setting not in SETTINGS:
        raise InvalidQuery(f"setting deve ser um de {SETTINGS} (recebido {q.setting})")
    if q.n < 1 or q.p < 1 or q.k0 < 0:
        raise InvalidQuery(f"Consulta inválida: n={q.n}, p={q.p}, k0={q.k0}")
    if not 1 <= q.delta <= q.p - q.k0:
        raise InvalidQuery(f"delta deve estar em [1, p - k0] = [1, {q.p - q.k0}] (recebido {q.delta})")


def _branch(sparse: float, dense: float, dense_regime: str) -> Dict:
    if sparse <= dense:
        return {'rate': sparse, 'regime': 'sparse-Δ'}
    return {'rate': dense, 'regime': dense_regime}


def rate_reference(q: RateQuery, varsigma: float = settings.REGIME_VARSIGMA) -> Dict:
    """
    rho*^2 do regime da consulta.

    Examples:
        independent, k0=10, delta=5, n=1000, p=10^5 -> 0.05756, 'sparse-Δ'
        general, k0=10, delta=100, n=1000, p=10^4  -> 0.1, 'dense small-k0'

    Raises:
        InvalidQuery: delta fora de [1, p - k0]
    """
    _validate(q)
    n, p, k0 = q.n, q.p, q.k0
    log_p = math.log(p) if p > 1 else 1.0
    sparse = q.delta * log_p / n
    small_k0 = k0 <= p ** (0.5 - varsigma)
    large_k0 = k0 >= p ** (0.5 + varsigma)

    if q.setting == "independent":
        small_rate = 1 / math.sqrt(n) + k0 * log_p / n
        large_rate = k0 / (n * log_p)
        large = _branch(sparse, large_rate, 'dense large-k0')
    else:
        small_rate = math.sqrt(p) / n
        large = _branch(sparse, k0 * log_p / n, 'dense large-k0')
        large['lower'] = min(sparse, k0 / (n * log_p))

    small = _branch(sparse, small_rate, 'dense small-k0')
    if small_k0:
        result = small
    elif large_k0:
        result = large
    else:
        result = {
            'rate': max(small['rate'], large['rate']),
            'regime': 'gap',
            'candidates': {'small-k0': small['rate'], 'large-k0': large['rate']},
        }

    logger.debug(f"Taxa de referência {q}: {result}")
    return result
