"""
Square-root Lasso por iterações escaladas alternadas.

Minimiza ||Y - T theta||_2 + lambda ||theta||_1 sobre o design de colunas
normalizadas T. Cada iteração externa fixa a escala ||Y - T theta||_2 e faz
uma passada de descida coordenada do Lasso com penalidade lambda * escala;
o objetivo externo é não crescente.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.stats import norm

from ..config import settings
from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError, DidNotConverge, ensure_finite
from ..models.results import SqrtLassoFit
from .projections import column_normalize


logger = logging.getLogger(__name__)


def sqrt_lasso_lambda(p: int, m: int, delta: float, scale: float, tail_split: int = 4) -> float:
    """Penalidade no design normalizado: scale * Phibar^{-1}(delta/(tail_split p)) / sqrt(m)."""
    return scale * float(norm.isf(delta / (tail_split * p))) / math.sqrt(m)


def _soft(z: float, level: float) -> float:
    if z > level:
        return z - level
    if z < -level:
        return z + level
    return 0.0


def _lasso_sweep(tt: np.ndarray, theta: np.ndarray, r: np.ndarray, active: np.ndarray, penalty: float) -> float:
    """Uma passada cíclica de descida coordenada para 1/2||r||^2 + penalty ||theta||_1."""
    max_change = 0.0
    for j in active:
        col = tt[j]
        old = theta[j]
        new = _soft(old + col @ r, penalty)
        if new != old:
            r -= (new - old) * col
            theta[j] = new
            max_change = max(max_change, abs(new - old))
    return max_change


def _kkt_residual(tt: np.ndarray, theta: np.ndarray, r: np.ndarray, active: np.ndarray, lam: float) -> float:
    r_norm = float(np.linalg.norm(r))
    if r_norm == 0.0 or active.size == 0:
        return 0.0
    grad = tt[active] @ r / r_norm
    coef = theta[active]
    on = coef != 0
    violation = np.where(
        on,
        np.abs(grad - lam * np.sign(coef)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    return float(violation.max())


def sqrt_lasso(
    x: np.ndarray,
    y: np.ndarray,
    delta: float,
    constants: Optional[DesignConstants] = None,
    sigma: Optional[float] = None,
    classical: bool = False,
    tail_split: int = 4,
    trace_path: Optional[str] = None,
) -> SqrtLassoFit:
    """
    Ajusta o square-root Lasso (ou o Lasso clássico com sigma conhecido).

    Args:
        x: design m x p
        y: resposta de tamanho m
        delta: nível em (0, 1) da penalidade
        constants: registro de constantes (usa sl_lambda_scale)
        sigma: nível de ruído conhecido, exigido quando classical=True
        classical: resolve 1/2||Y - T theta||^2 + lambda sigma sqrt(m) ||theta||_1
        tail_split: divisor de delta/p no quantil (4 no ajuste padrão, 2 na versão truncada)
        trace_path: CSV opcional com (iteration, objective, sigma_hat)

    Returns:
        SqrtLassoFit com theta_hat na escala do design original

    Raises:
        NonFinite: entrada com NaN/inf
        DidNotConverge: 500 iterações sem queda relativa < 1e-10
    """
    constants = constants or DesignConstants()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ensure_finite(x, y, name="sqrt_lasso")
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta deve estar em (0, 1) (recebido {delta})")
    m, p = x.shape
    if m < 2:
        raise ConfigurationError(f"sqrt_lasso exige ao menos 2 linhas (recebido {m})")
    if classical and sigma is None:
        raise ConfigurationError("Lasso clássico exige sigma conhecido")

    t, norms, zero_columns = column_normalize(x)
    tt = np.ascontiguousarray(t.T)
    active = np.setdiff1d(np.arange(p), zero_columns)
    lam = sqrt_lasso_lambda(p, m, delta, constants.sl_lambda_scale, tail_split)

    theta = np.zeros(p)
    r = y.copy()
    trace: List[Tuple[int, float, float]] = []

    def objective() -> float:
        l1 = float(np.abs(theta).sum())
        if classical:
            return 0.5 * float(r @ r) + lam * sigma * math.sqrt(m) * l1
        return float(np.linalg.norm(r)) + lam * l1

    current = objective()
    converged = False
    iterations = 0
    for iterations in range(1, settings.SQRT_LASSO_MAX_ITER + 1):
        scale = sigma * math.sqrt(m) if classical else float(np.linalg.norm(r))
        _lasso_sweep(tt, theta, r, active, lam * scale)

        previous, current = current, objective()
        trace.append((iterations, current, float(np.linalg.norm(r)) / math.sqrt(m)))
        if current > previous * (1 + 1e-12) + 1e-300:
            logger.warning(f"Objetivo do square-root Lasso cresceu: {previous:.12g} -> {current:.12g}")
        if previous - current <= settings.SQRT_LASSO_TOL * previous:
            converged = True
            break

    theta_hat = np.zeros(p)
    theta_hat[active] = theta[active] / norms[active]
    kkt = _kkt_residual(tt, theta, r, active, lam) if not classical else 0.0

    if trace_path:
        from ..loaders.file_exporter import FileExporter
        FileExporter().export_trace(trace, trace_path)

    if not converged:
        logger.warning(f"square-root Lasso não convergiu em {iterations} iterações (KKT {kkt:.3g})")
        raise DidNotConverge("square-root Lasso não convergiu", iterate=theta_hat, residual=kkt)

    sigma_hat = float(np.linalg.norm(y - x @ theta_hat)) / math.sqrt(m)
    logger.debug(
        f"square-root Lasso: {iterations} iterações, lambda={lam:.4g}, "
        f"sigma_hat={sigma_hat:.4g}, suporte={np.count_nonzero(theta_hat)}, KKT={kkt:.2g}"
    )
    return SqrtLassoFit(
        theta_hat=theta_hat,
        sigma_hat=sigma_hat,
        lambda_=lam,
        iterations=iterations,
        kkt_residual=kkt,
        zero_columns=tuple(zero_columns),
    )


def sl_threshold(sigma_hat: float, c_sl: float, p: int, delta: float, m: int) -> float:
    """Nível de truncamento c_sl * sigma_hat * (8/3) * sqrt(log(p/delta)/m)."""
    return c_sl * sigma_hat * (8.0 / 3.0) * math.sqrt(math.log(p / delta) / m)


def threshold_sqrt_lasso(
    x: np.ndarray,
    y: np.ndarray,
    delta: float,
    c_sl: float,
    constants: Optional[DesignConstants] = None,
) -> np.ndarray:
    """
    Square-root Lasso truncado.

    Remove as linhas nulas do design, ajusta o square-root Lasso com
    lambda baseado em delta/(2p) e zera as entradas abaixo de
    c_sl * sigma_hat * (8/3) * sqrt(log(p/delta)/m), m = linhas efetivas.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = x.shape[1]
    keep = np.linalg.norm(x, axis=1) >= settings.ZERO_COLUMN_TOL
    x_c, y_c = x[keep], y[keep]
    m_eff = x_c.shape[0]

    fit = sqrt_lasso(x_c, y_c, delta, constants, tail_split=2)
    level = sl_threshold(fit.sigma_hat, c_sl, p, delta, m_eff)
    theta = np.where(np.abs(fit.theta_hat) >= level, fit.theta_hat, 0.0)
    logger.debug(f"square-root Lasso truncado: nível {level:.4g}, {np.count_nonzero(theta)} entradas mantidas")
    return theta
