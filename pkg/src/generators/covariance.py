"""
Famílias de covariância dentro de U(eta) = {Sigma : espectro em [1/eta, eta]}.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from ..config import settings
from ..models.exceptions import ConfigurationError, NotSymmetric, SpectrumOutOfClass
from ..models.scenario import CovarianceSpec


logger = logging.getLogger(__name__)


def _analytic_spectrum(spec: CovarianceSpec, p: int) -> Optional[Tuple[float, float]]:
    """Limites fechados (min, max) do espectro; None para matrizes explícitas."""
    if spec.kind == "identity":
        return 1.0, 1.0
    if spec.kind == "ar1":
        a = abs(spec.param)
        if a >= 1:
            raise SpectrumOutOfClass(f"ar1 exige |a| < 1 (recebido {spec.param})")
        if p == 1:
            return 1.0, 1.0
        return (1 - a) / (1 + a), (1 + a) / (1 - a)
    if spec.kind == "equicorrelation":
        r = spec.param
        if p == 1:
            return 1.0, 1.0
        values = (1 - r, 1 + (p - 1) * r)
        return min(values), max(values)
    return None


def _check_band(low: float, high: float, eta: float, origin: str):
    tol = settings.SPECTRUM_TOL
    if low < 1 / eta - tol or high > eta + tol:
        raise SpectrumOutOfClass(
            f"Espectro {origin} [{low:.6g}, {high:.6g}] fora de [1/eta, eta] = "
            f"[{1 / eta:.6g}, {eta:.6g}]"
        )


def covariance_matrix(spec: CovarianceSpec, p: int) -> np.ndarray:
    """
    Constrói Sigma (p x p) e verifica que pertence a U(eta).

    Args:
        spec: família de covariância
        p: dimensão

    Returns:
        Matriz simétrica definida positiva com espectro em [1/eta, eta]

    Raises:
        SpectrumOutOfClass: autovalor fora da banda
        NotSymmetric: matriz explícita assimétrica além de 1e-12
    """
    if p < 1:
        raise ConfigurationError(f"p deve ser >= 1 (recebido {p})")

    if spec.kind == "identity":
        sigma = np.eye(p)
    elif spec.kind == "ar1":
        idx = np.arange(p)
        sigma = float(spec.param) ** np.abs(idx[:, None] - idx[None, :])
    elif spec.kind == "equicorrelation":
        r = float(spec.param)
        sigma = np.full((p, p), r)
        np.fill_diagonal(sigma, 1.0)
    else:
        sigma = np.asarray(spec.matrix, dtype=float)
        if sigma.shape != (p, p):
            raise ConfigurationError(f"Matriz explícita com forma {sigma.shape}, esperado {(p, p)}")
        asym = np.max(np.abs(sigma - sigma.T)) if p > 1 else 0.0
        if asym > settings.SYMMETRY_TOL:
            raise NotSymmetric(f"Matriz explícita assimétrica (desvio {asym:.3g})")
        sigma = (sigma + sigma.T) / 2

    bounds = _analytic_spectrum(spec, p)
    if bounds is not None:
        _check_band(bounds[0], bounds[1], spec.eta, "analítico")

    if spec.kind == "explicit" or (spec.kind != "identity" and p <= settings.NUMERIC_SPECTRUM_MAX_P):
        eigenvalues = linalg.eigvalsh(sigma)
        _check_band(float(eigenvalues[0]), float(eigenvalues[-1]), spec.eta, "numérico")

    return sigma


def cholesky_factor(spec: CovarianceSpec, p: int) -> Optional[np.ndarray]:
    """Fator de Cholesky inferior de Sigma; None para a identidade."""
    if spec.kind == "identity":
        return None
    sigma = covariance_matrix(spec, p)
    return linalg.cholesky(sigma, lower=True)
