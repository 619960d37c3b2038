"""
Seleção de suporte para phi^(th): MCP e square-root Lasso truncado iterativo.
"""

import logging
import math
from typing import List, Optional

import numpy as np

from ..models.design_constants import DesignConstants
from ..models.exceptions import BlockTooSmall, ConfigurationError
from ..models.results import PropertySParams, SupportSet
from ..solvers.mcp import mcp_fit
from ..solvers.projections import orthogonal_complement_projector
from ..solvers.sqrt_lasso import sqrt_lasso, threshold_sqrt_lasso


logger = logging.getLogger(__name__)

MIN_BLOCK_ROWS = 8


def _check_eta(eta: float):
    if not eta >= 1:
        raise ConfigurationError(f"eta deve ser >= 1 (recebido {eta})")


def select_mcp(
    x1: np.ndarray,
    y1: np.ndarray,
    eta: float,
    constants: Optional[DesignConstants] = None,
) -> SupportSet:
    """
    Suporte de um ponto estacionário do MCP.

    sigma_SL vem do square-root Lasso com delta = 1/p; o MCP usa
    lambda = c_MCP * sigma_SL * sqrt(log p), kappa = c_MCP' e parte do
    estimador do square-root Lasso. As constantes do registro são as da
    classe U(eta) informada.
    """
    _check_eta(eta)
    constants = constants or DesignConstants()
    x1 = np.asarray(x1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    p = x1.shape[1]

    fit = sqrt_lasso(x1, y1, min(1.0 / p, 0.5), constants)
    if fit.sigma_hat == 0.0:
        logger.debug("select_mcp: ajuste exato (sigma_SL = 0), usando o suporte do square-root Lasso")
        return SupportSet(indices=tuple(np.flatnonzero(fit.theta_hat)), method="mcp")

    lambda_ = constants.c_MCP_eta * fit.sigma_hat * math.sqrt(math.log(max(p, 2)))
    theta, residual = mcp_fit(x1, y1, lambda_, constants.c_MCP_prime_eta, init=fit.theta_hat)
    support = SupportSet(indices=tuple(np.flatnonzero(theta)), method="mcp")
    logger.debug(
        f"select_mcp: sigma_SL={fit.sigma_hat:.4g}, lambda={lambda_:.4g}, "
        f"|S|={len(support)}, resíduo={residual:.2g}"
    )
    return support


def iteration_count(n: int) -> int:
    """T = floor(log2 n) + 1."""
    return int(math.floor(math.log2(n))) + 1


def select_iterative(
    x1: np.ndarray,
    y1: np.ndarray,
    eta: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    n: Optional[int] = None,
) -> SupportSet:
    """
    Construção iterativa do suporte com o square-root Lasso truncado.

    As linhas de (x1, y1) são divididas em T blocos iguais. Na etapa t o
    bloco t é projetado no complemento ortogonal das colunas já
    selecionadas e o suporte do square-root Lasso truncado é somado ao
    conjunto corrente, de modo que S_0 ⊆ S_1 ⊆ ... ⊆ S_T.

    Args:
        n: tamanho amostral que define T (padrão: linhas de x1)

    Returns:
        SupportSet com steps = |S_t| após cada etapa

    Raises:
        BlockTooSmall: blocos com menos de 8 linhas
    """
    _check_eta(eta)
    constants = constants or DesignConstants()
    x1 = np.asarray(x1, dtype=float)
    y1 = np.asarray(y1, dtype=float)
    rows = x1.shape[0]
    blocks = iteration_count(n or rows)
    block_rows = rows // blocks
    if block_rows < MIN_BLOCK_ROWS:
        raise BlockTooSmall(f"{rows} linhas em {blocks} blocos: {block_rows} < {MIN_BLOCK_ROWS} por bloco")

    selected: set = set()
    steps: List[int] = []
    for t in range(blocks):
        rows_t = slice(t * block_rows, (t + 1) * block_rows)
        x_t, y_t = x1[rows_t], y1[rows_t]
        columns = sorted(selected)
        projector = orthogonal_complement_projector(x_t[:, columns])

        if projector.shape[0] < 2:
            logger.warning(f"select_iterative: etapa {t + 1} sem graus de liberdade (|S|={len(selected)})")
            steps.append(len(selected))
            continue

        theta = threshold_sqrt_lasso(projector @ x_t, projector @ y_t, delta, constants.c_SL_eta, constants)
        selected.update(int(i) for i in np.flatnonzero(theta))
        steps.append(len(selected))
        logger.debug(f"select_iterative: etapa {t + 1}/{blocks}, |S|={len(selected)}")

    return SupportSet(indices=tuple(selected), method="iterative", steps=tuple(steps))


def mcp_property_params(constants: DesignConstants) -> PropertySParams:
    return PropertySParams(a1=constants.c_star_a1, a2=constants.a2, a3=constants.c_star_a3)


def iterative_property_params(blocks: int, constants: DesignConstants) -> PropertySParams:
    """Parâmetros (c sqrt(T), 2T, c sqrt(T/2)) garantidos para a seleção iterativa."""
    c = constants.c_ith_eta
    return PropertySParams(a1=c * math.sqrt(blocks), a2=2.0 * blocks, a3=c * math.sqrt(blocks / 2))
