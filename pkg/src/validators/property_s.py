"""
Verificação da Propriedade S[a1, a2, a3] de um suporte selecionado.

Só é usada pelo harness, pois exige o theta* verdadeiro:
    |S| <= a2 ||theta*||_0
    ||theta*_{fora de S}||^2 <= a3^2 sigma^2 M(a1, theta*/sigma) log(p) / m
onde M conta as entradas com 0 < |theta*_i|/sigma <= a1 sqrt(log(p)/m).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..models.results import PropertySParams, SupportSet


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropertySReport:
    holds: bool
    size_lhs: float
    size_rhs: float
    missed_lhs: float
    missed_rhs: float
    small_count: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def count_small_coefficients(theta_star: np.ndarray, sigma: float, a1: float, m: int, p: int) -> int:
    """M(a1, theta*/sigma): coeficientes não nulos com |theta_i|/sigma <= a1 sqrt(log p / m)."""
    scaled = np.abs(np.asarray(theta_star, dtype=float)) / sigma
    level = a1 * math.sqrt(math.log(p) / m)
    return int(np.sum((scaled > 0) & (scaled <= level)))


def property_S_check(
    s: SupportSet,
    theta_star: np.ndarray,
    sigma: float,
    params: PropertySParams,
    m: int,
    p: int
) -> PropertySReport:
    """Avalia as duas desigualdades da Propriedade S."""
    theta_star = np.asarray(theta_star, dtype=float)
    sparsity = int(np.count_nonzero(theta_star))

    size_lhs = float(len(s))
    size_rhs = params.a2 * sparsity

    outside = np.ones(theta_star.size, dtype=bool)
    outside[s.as_array()] = False
    missed_lhs = float(np.sum(theta_star[outside] ** 2))
    small = count_small_coefficients(theta_star, sigma, params.a1, m, p)
    missed_rhs = params.a3 ** 2 * sigma ** 2 * small * math.log(p) / m

    holds = size_lhs <= size_rhs and missed_lhs <= missed_rhs
    logger.debug(
        f"Propriedade S ({s.method}): |S|={size_lhs:.0f} <= {size_rhs:.3g}, "
        f"perda {missed_lhs:.3g} <= {missed_rhs:.3g} -> {holds}"
    )
    return PropertySReport(holds, size_lhs, size_rhs, missed_lhs, missed_rhs, small)


def required_property_scale(
    s: SupportSet,
    theta_star: np.ndarray,
    sigma: float,
    base: PropertySParams,
    m: int,
    p: int
) -> float:
    """
    Menor c tal que S satisfaz a Propriedade S[c a1, a2, c a3].

    Devolve 0 quando S não perde massa e inf quando |S| > a2 ||theta*||_0,
    pois o limite de tamanho não depende de c.
    """
    theta_star = np.asarray(theta_star, dtype=float)
    if len(s) > base.a2 * np.count_nonzero(theta_star):
        return math.inf

    outside = np.ones(theta_star.size, dtype=bool)
    outside[s.as_array()] = False
    missed = float(np.sum(theta_star[outside] ** 2))
    if missed == 0.0:
        return 0.0

    unit = math.sqrt(math.log(p) / m)
    # a partir de levels[j - 1] o contador M vale pelo menos j
    levels = np.sort(np.abs(theta_star[theta_star != 0])) / (sigma * base.a1 * unit)
    counts = np.arange(1, levels.size + 1)
    needed = np.sqrt(missed / (base.a3 ** 2 * sigma ** 2 * counts * unit ** 2))
    # folga relativa para a comparação <= na fronteira de M
    return float(np.min(np.maximum(levels, needed))) * (1 + 1e-9)
