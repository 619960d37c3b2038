"""
Operações lineares usadas pelos testes: normalização de colunas, projeção em
B0[k], estimador debiased, mínimos quadrados restritos e projetor no
complemento ortogonal.
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy import linalg

from ..config import settings
from ..models.exceptions import SupportTooLarge, ensure_finite
from ..models.results import SupportSet


logger = logging.getLogger(__name__)


def top_k_indices(theta: np.ndarray, k: int) -> np.ndarray:
    """Índices das k maiores magnitudes; empates resolvidos pelo menor índice."""
    order = np.argsort(-np.abs(theta), kind="stable")
    return order[:max(int(k), 0)]


def top_k_project(theta: np.ndarray, k0: int) -> np.ndarray:
    """
    Projeção de theta em B0[k0]: mantém as k0 maiores magnitudes.

    Examples:
        (3, -2, 1), k0=1 -> (3, 0, 0)
        (1, 1), k0=1     -> (1, 0)
    """
    theta = np.asarray(theta, dtype=float)
    projected = np.zeros_like(theta)
    keep = top_k_indices(theta, k0)
    projected[keep] = theta[keep]
    return projected


def column_normalize(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """
    Normaliza as colunas de x para norma euclidiana 1.

    Colunas com norma < 1e-12 ficam nulas e são sinalizadas.

    Returns:
        (t, norms, zero_columns)
    """
    x = np.asarray(x, dtype=float)
    norms = np.sqrt(np.einsum('ij,ij->j', x, x))
    zero = norms < settings.ZERO_COLUMN_TOL
    safe = np.where(zero, 1.0, norms)
    t = x / safe
    t[:, zero] = 0.0
    zero_columns = np.flatnonzero(zero).tolist()
    if zero_columns:
        logger.debug(f"{len(zero_columns)} colunas de norma nula sinalizadas")
    return t, norms, zero_columns


def debias(theta_sl: np.ndarray, x2: np.ndarray, y2: np.ndarray) -> np.ndarray:
    """
    Correção de um passo: theta_I = x2^T (y2 - x2 theta_sl) / m + theta_sl.
    """
    ensure_finite(theta_sl, x2, y2, name="debias")
    m = x2.shape[0]
    return x2.T @ (y2 - x2 @ theta_sl) / m + theta_sl


def restricted_least_squares(
    x0: np.ndarray,
    y0: np.ndarray,
    s: SupportSet
) -> Tuple[np.ndarray, float]:
    """
    Mínimos quadrados restritos ao suporte s e variância plug-in.

    Resolve por QR com pivoteamento nas colunas selecionadas; seleções com
    posto incompleto usam a solução de norma mínima.

    Returns:
        (theta_ls, sigma_hat) com sigma_hat^2 = ||y0 - x0 theta_ls||^2 / m

    Raises:
        SupportTooLarge: |s| >= m
    """
    m, p = x0.shape
    if len(s) >= m:
        raise SupportTooLarge(f"|S| = {len(s)} >= m = {m}")

    theta = np.zeros(p)
    idx = s.as_array()
    if idx.size:
        xs = x0[:, idx]
        q, r, piv = linalg.qr(xs, mode='economic', pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int(np.sum(diag > settings.RANK_TOL * max(diag[0], 1.0))) if diag.size else 0
        if rank == idx.size:
            coef = np.empty(idx.size)
            coef[piv] = linalg.solve_triangular(r, q.T @ y0)
        else:
            logger.debug(f"Seleção com posto {rank} < {idx.size}: solução de norma mínima")
            coef = linalg.lstsq(xs, y0, cond=settings.RANK_TOL)[0]
        theta[idx] = coef

    residual = y0 - x0 @ theta
    sigma_hat = float(np.sqrt(residual @ residual / m))
    return theta, sigma_hat


def orthogonal_complement_projector(x_s: np.ndarray) -> np.ndarray:
    """
    Base ortonormal (linhas) do complemento ortogonal do espaço das colunas de x_s.

    Returns:
        Matriz (m - posto) x m, com Pi @ x_s = 0 e Pi @ Pi.T = I
    """
    x_s = np.asarray(x_s, dtype=float)
    m = x_s.shape[0]
    if x_s.ndim == 1:
        x_s = x_s[:, None]
    if x_s.shape[1] == 0:
        return np.eye(m)

    q, r, _ = linalg.qr(x_s, mode='full', pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > settings.RANK_TOL * max(diag[0], 1.0))) if diag.size else 0
    return q[:, rank:].T
