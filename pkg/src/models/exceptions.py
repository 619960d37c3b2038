"""
Hierarquia de exceções dos testes de esparsidade.

ConfigurationError cobre entradas inválidas (código de saída 2 na CLI) e
NumericalError cobre falhas numéricas (código de saída 3).
"""

from typing import Optional

import numpy as np


class SparsityTestError(Exception):
    """Raiz de todas as exceções do pacote."""


class ConfigurationError(SparsityTestError, ValueError):
    """Configuração ou entrada inválida."""


class SpectrumOutOfClass(ConfigurationError):
    """Autovalor de Sigma fora de [1/eta, eta]."""


class NotSymmetric(ConfigurationError):
    """Matriz explícita não simétrica."""


class PatternInfeasible(ConfigurationError):
    """Padrão de sinal incompatível com (k0, delta, rho)."""


class TooFewRows(ConfigurationError):
    """Amostra pequena demais para a divisão pedida."""


class SupportTooLarge(ConfigurationError):
    """Suporte com |S| >= m linhas."""


class BlockTooSmall(ConfigurationError):
    """Sub-bloco do algoritmo iterativo com menos de 8 linhas."""


class NotBracketed(ConfigurationError):
    """Risco nos extremos não envolve gamma."""


class InvalidQuery(ConfigurationError):
    """Consulta de taxa fora do domínio."""


class NumericalError(SparsityTestError, ArithmeticError):
    """Falha numérica."""


class NonFinite(NumericalError):
    """Entrada com NaN ou infinito."""


class DidNotConverge(NumericalError):
    """Solver atingiu o limite de iterações."""

    def __init__(self, message: str, iterate: Optional[np.ndarray] = None, residual: float = float('nan')):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class QuadratureFailure(NumericalError):
    """Quadratura adaptativa não atingiu a tolerância."""


class DegenerateResiduals(NumericalError):
    """Resíduos identicamente nulos."""


class DegenerateVariance(NumericalError):
    """Variância estimada nula."""


def ensure_finite(*arrays, name: str = "entrada"):
    """Levanta NonFinite se algum array contiver NaN/inf."""
    for arr in arrays:
        if not np.all(np.isfinite(np.asarray(arr, dtype=float))):
            raise NonFinite(f"{name} contém valores não finitos")
