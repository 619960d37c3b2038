"""
Kernels de Fourier dos testes phi^(f) e phi^(i).

    varphi(s; x) = int_{-1}^{1} (1 - |xi|) cos(xi s x) exp(xi^2 s^2 / 2) dxi
    g_pop(u)     = 1 - 2 (1 - cos u) / u^2       (E[1 - varphi(s; Z)], Z ~ N(a, 1), u = s a)
    eta(r, w; x) = r / (1 - 2 Phibar(r)) int_{-1}^{1} phi_N(r xi) exp(xi^2 w^2 / 2) cos(xi w x) dxi
    psi_pop      = 1 / (1 - 2 Phibar(r)) int_{-r}^{r} phi_N(xi) cos(xi x w / r) dxi

Os integrandos são pares em xi; integra-se em [0, 1] (ou [0, r]) e dobra-se,
avaliando sempre em |x|, o que torna todos os kernels exatamente pares em x.
"""

import logging
import math
from typing import Union

import numpy as np
from scipy.stats import norm

from ..config import settings
from ..models.exceptions import ConfigurationError
from ..models.results import KernelParams
from .quadrature import integrate


logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

_CHUNK = 4096
_INV_SQRT_2PI = 1.0 / math.sqrt(2 * math.pi)


def _vectorized(kernel_at_abs, x: ArrayLike) -> ArrayLike:
    """Aplica kernel_at_abs em blocos de |x|; preserva escalar/array."""
    arr = np.abs(np.asarray(x, dtype=float))
    flat = arr.ravel()
    out = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        chunk = flat[start:start + _CHUNK]
        out[start:start + _CHUNK] = kernel_at_abs(chunk)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def varphi(s: float, x: ArrayLike) -> ArrayLike:
    """Kernel varphi(s; x) por quadratura adaptativa (tolerância absoluta 1e-10)."""
    if s <= 0:
        raise ConfigurationError(f"s deve ser > 0 (recebido {s})")

    def at_abs(values: np.ndarray) -> np.ndarray:
        def integrand(xi: np.ndarray) -> np.ndarray:
            weight = (1.0 - xi) * np.exp(xi ** 2 * s ** 2 / 2)
            return weight[:, None] * np.cos(np.outer(xi, s * values))
        total, _ = integrate(integrand, 0.0, 1.0, abs_tol=settings.QUAD_ABS_TOL / 2)
        return 2.0 * total

    return _vectorized(at_abs, x)


def g_pop(u: ArrayLike) -> ArrayLike:
    """
    1 - 2 (1 - cos u)/u^2, com g(0) = 0 pela série u^2/12 - u^4/360.

    Examples:
        g_pop(2 pi) = 1
        g_pop(pi)   = 1 - 4/pi^2
    """
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < settings.SERIES_CUTOFF
    safe = np.where(small, 1.0, u)
    value = np.where(
        small,
        u ** 2 / 12 - u ** 4 / 360,
        1.0 - 2.0 * (1.0 - np.cos(safe)) / safe ** 2,
    )
    return float(value) if value.ndim == 0 else value


def _truncation_mass(r: float) -> float:
    return 1.0 - 2.0 * float(norm.sf(r))


def eta_kernel(r: float, w: float, x: ArrayLike) -> ArrayLike:
    """Kernel eta_{r,w}(x) de phi^(i)."""
    if r <= 0 or w <= 0:
        raise ConfigurationError(f"r e w devem ser > 0 (recebido r={r}, w={w})")
    prefactor = r / _truncation_mass(r)

    def at_abs(values: np.ndarray) -> np.ndarray:
        def integrand(xi: np.ndarray) -> np.ndarray:
            weight = _INV_SQRT_2PI * np.exp(-r ** 2 * xi ** 2 / 2 + xi ** 2 * w ** 2 / 2)
            return weight[:, None] * np.cos(np.outer(xi, w * values))
        total, _ = integrate(integrand, 0.0, 1.0, abs_tol=settings.QUAD_ABS_TOL / (2 * prefactor))
        return 2.0 * prefactor * total

    return _vectorized(at_abs, x)


def psi_pop(r: float, w: float, x: ArrayLike) -> ArrayLike:
    """Transformada populacional E[eta_{r,w}(X)], X ~ N(x, 1); psi(r, w, 0) = 1."""
    if r <= 0 or w <= 0:
        raise ConfigurationError(f"r e w devem ser > 0 (recebido r={r}, w={w})")
    mass = _truncation_mass(r)

    def at_abs(values: np.ndarray) -> np.ndarray:
        def integrand(xi: np.ndarray) -> np.ndarray:
            density = _INV_SQRT_2PI * np.exp(-xi ** 2 / 2)
            return density[:, None] * np.cos(np.outer(xi, values * w / r))
        total, _ = integrate(integrand, 0.0, r, abs_tol=settings.QUAD_ABS_TOL * mass / 2)
        return np.where(values == 0, 1.0, 2.0 * total / mass)

    return _vectorized(at_abs, x)


def kernel_params(k0: int, p: int) -> KernelParams:
    """
    Parâmetros de phi^(f) e phi^(i).

    s = max(1, sqrt(log(e k0 / sqrt(p)))) com o log truncado em 0;
    l0 = ceil(k0^{4/5} p^{1/10}); a grade diádica l0, 2 l0, ... até
    l_max = 2^{floor(log2(k0/l0))} l0 / 4 só existe se k0 >= 2^11 sqrt(p).
    Grade vazia significa que phi^(i) sempre aceita.
    """
    root_p = math.sqrt(p)
    inner = math.log(math.e * k0 / root_p) if k0 > 0 else 0.0
    s = max(1.0, math.sqrt(max(inner, 0.0)))
    l0 = int(math.ceil(k0 ** 0.8 * p ** 0.1)) if k0 > 0 else 0

    grid = []
    if k0 > 0 and k0 >= 2 ** 11 * root_p and l0 > 0:
        l_max = 2 ** math.floor(math.log2(k0 / l0)) * l0 / 4
        l = l0
        while l <= l_max:
            grid.append((l, math.sqrt(2 * math.log(k0 / l)), math.sqrt(math.log(l / root_p))))
            l *= 2

    if not grid:
        logger.debug(f"Grade de phi^(i) vazia para k0={k0}, p={p}")
    return KernelParams(s=s, l0=l0, grid=tuple(grid))
