"""
Resultados produzidos pelos solvers, kernels, testes e pelo harness.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError


@dataclass(frozen=True, eq=False)
class SqrtLassoFit:
    """
    Ajuste do square-root Lasso.

    Attributes:
        theta_hat: estimador na escala do design original
        sigma_hat: ||Y - X theta_hat||_2 / sqrt(m)
        lambda_: penalidade usada no design normalizado
        iterations: iterações externas
        kkt_residual: violação máxima das condições KKT
        zero_columns: índices de colunas de norma nula
    """

    theta_hat: np.ndarray
    sigma_hat: float
    lambda_: float
    iterations: int
    kkt_residual: float
    zero_columns: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SupportSet:
    """Conjunto de índices selecionados, com diagnósticos por etapa."""

    indices: Tuple[int, ...] = ()
    method: str = "oracle"
    steps: Tuple[int, ...] = ()

    def __post_init__(self):
        unique = tuple(sorted({int(i) for i in self.indices}))
        if any(i < 0 for i in unique):
            raise ConfigurationError("Índices de suporte devem ser não negativos")
        object.__setattr__(self, 'indices', unique)
        object.__setattr__(self, 'steps', tuple(int(s) for s in self.steps))

    def __len__(self) -> int:
        return len(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    def to_dict(self) -> dict:
        return {'indices': list(self.indices), 'method': self.method, 'steps': list(self.steps)}


@dataclass(frozen=True)
class KernelParams:
    """Parâmetros dos kernels: s de phi^(f), l0 e a grade (l, r_l, w_l) de phi^(i)."""

    s: float
    l0: int
    grid: Tuple[Tuple[int, float, float], ...] = ()


@dataclass(frozen=True)
class PropertySParams:
    """Parâmetros (a1, a2, a3) da Propriedade S."""

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0 and self.a3 > 0):
            raise ConfigurationError("Parâmetros da Propriedade S devem ser positivos")


@dataclass
class TestReport:
    """
    Relatório de um teste: estatística, limiar, decisão e proveniência.

    statistic/threshold são escalares ou listas (uma entrada por l em phi^(i)).
    normalized é a quantidade comparada à constante calibrável do teste.
    """

    __test__ = False  # não é uma classe de teste do pytest

    name: str
    statistic: Any
    threshold: Any
    reject: bool
    threshold_mode: str = "analytic"
    normalized: Any = None
    side_channels: Dict[str, Any] = field(default_factory=dict)
    sub_reports: List["TestReport"] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'statistic': _jsonable(self.statistic),
            'threshold': _jsonable(self.threshold),
            'reject': bool(self.reject),
            'mode': self.threshold_mode,
            'side_channels': {k: _jsonable(v) for k, v in self.side_channels.items()},
            'sub_reports': [r.to_dict() for r in self.sub_reports],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class RiskEstimate:
    """Erros de tipo I/II empíricos com meia-largura de Wald 95%."""

    type1: float
    type2: float
    trials: int
    half_width_type1: float
    half_width_type2: float
    seed: int
    excluded: int = 0

    @property
    def risk(self) -> float:
        return self.type1 + self.type2

    @property
    def half_width(self) -> float:
        return max(self.half_width_type1, self.half_width_type2)

    def to_dict(self) -> dict:
        return {
            'type1': self.type1,
            'type2': self.type2,
            'risk': self.risk,
            'trials': self.trials,
            'half_width': self.half_width,
            'seed': self.seed,
            'excluded': self.excluded,
        }


@dataclass(frozen=True)
class RateQuery:
    """Consulta à tabela de taxas de separação."""

    setting: str
    n: int
    p: int
    k0: int
    delta: int


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value
