"""
Modelo de dados do gerador: Y = X theta* + sigma eps, com linhas de X ~ N(0, Sigma).

Contém a descrição completa do cenário (covariância, sinal), a amostra
realizada e a divisão da amostra em blocos contíguos.
"""

from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .exceptions import ConfigurationError


COVARIANCE_KINDS = ("identity", "ar1", "equicorrelation", "explicit")
SIGNAL_PATTERNS = ("spikes", "flat_small", "decaying", "explicit")


@dataclass(frozen=True, eq=False)
class CovarianceSpec:
    """
    Família de covariância dentro de U(eta).

    Attributes:
        kind: identity, ar1, equicorrelation ou explicit
        param: a (ar1) ou r (equicorrelation)
        eta: limite da classe, autovalores em [1/eta, eta]
        matrix: matriz p x p quando kind == 'explicit'
    """

    kind: str = "identity"
    param: Optional[float] = None
    eta: float = 2.0
    matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in COVARIANCE_KINDS:
            raise ConfigurationError(f"Covariância desconhecida: {self.kind}")
        if not self.eta > 1:
            raise ConfigurationError(f"eta deve ser > 1 (recebido {self.eta})")
        if self.kind in ("ar1", "equicorrelation") and self.param is None:
            raise ConfigurationError(f"Covariância {self.kind} exige 'param'")
        if self.kind == "explicit" and self.matrix is None:
            raise ConfigurationError("Covariância explicit exige 'matrix'")

    def to_dict(self) -> dict:
        data = {'kind': self.kind, 'param': self.param, 'eta': self.eta}
        if self.matrix is not None:
            data['matrix'] = np.asarray(self.matrix).tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "CovarianceSpec":
        matrix = data.get('matrix')
        return cls(
            kind=data.get('kind', 'identity'),
            param=data.get('param'),
            eta=float(data.get('eta', 2.0)),
            matrix=None if matrix is None else np.asarray(matrix, dtype=float),
        )


@dataclass(frozen=True, eq=False)
class SignalSpec:
    """
    Construção de theta* à distância d2 = rho*sigma de B0[k0].

    Attributes:
        k0: esparsidade da hipótese nula
        delta: número de coeficientes além de k0
        rho: separação em unidades de sigma
        pattern: spikes, flat_small, decaying ou explicit
        spike_scale: magnitude (em sigma) dos k0 coeficientes grandes
        vector: theta* quando pattern == 'explicit'
    """

    k0: int = 0
    delta: int = 0
    rho: float = 0.0
    pattern: str = "spikes"
    spike_scale: float = 10.0
    vector: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pattern not in SIGNAL_PATTERNS:
            raise ConfigurationError(f"Padrão de sinal desconhecido: {self.pattern}")
        if self.k0 < 0 or self.delta < 0:
            raise ConfigurationError("k0 e delta devem ser não negativos")
        if self.rho < 0:
            raise ConfigurationError("rho deve ser >= 0")
        if self.pattern == "explicit" and self.vector is None:
            raise ConfigurationError("Sinal explicit exige 'vector'")

    def to_dict(self) -> dict:
        data = {
            'k0': self.k0,
            'delta': self.delta,
            'rho': self.rho,
            'pattern': self.pattern,
            'spike_scale': self.spike_scale,
        }
        if self.vector is not None:
            data['vector'] = np.asarray(self.vector).tolist()
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "SignalSpec":
        vector = data.get('vector')
        return cls(
            k0=int(data.get('k0', 0)),
            delta=int(data.get('delta', 0)),
            rho=float(data.get('rho', 0.0)),
            pattern=data.get('pattern', 'spikes'),
            spike_scale=float(data.get('spike_scale', 10.0)),
            vector=None if vector is None else np.asarray(vector, dtype=float),
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    """Descrição gerativa completa: (n, p, sigma, covariância, sinal)."""

    n: int
    p: int
    sigma: float = 1.0
    sigma_known: bool = True
    covariance: CovarianceSpec = field(default_factory=CovarianceSpec)
    signal: SignalSpec = field(default_factory=SignalSpec)

    def __post_init__(self):
        if self.n < 3:
            raise ConfigurationError(f"n deve ser >= 3 (recebido {self.n})")
        if self.p < 1:
            raise ConfigurationError(f"p deve ser >= 1 (recebido {self.p})")
        if not self.sigma > 0:
            raise ConfigurationError(f"sigma deve ser > 0 (recebido {self.sigma})")

    def with_signal(self, **changes) -> "Scenario":
        """Cópia do cenário com campos do sinal alterados."""
        return replace(self, signal=replace(self.signal, **changes))

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'p': self.p,
            'sigma': self.sigma,
            'sigma_known': self.sigma_known,
            'covariance': self.covariance.to_dict(),
            'signal': self.signal.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            return cls(
                n=int(data['n']),
                p=int(data['p']),
                sigma=float(data.get('sigma', 1.0)),
                sigma_known=bool(data.get('sigma_known', True)),
                covariance=CovarianceSpec.from_dict(data.get('covariance', {})),
                signal=SignalSpec.from_dict(data.get('signal', {})),
            )
        except KeyError as e:
            raise ConfigurationError(f"Cenário sem campo obrigatório: {e}") from e


@dataclass(frozen=True, eq=False)
class RegressionSample:
    """Uma realização (X, Y) do modelo; theta_star só é usado pelo harness."""

    x: np.ndarray
    y: np.ndarray
    theta_star: np.ndarray
    seed: int

    def __post_init__(self):
        n, p = self.x.shape
        if self.y.shape != (n,) or self.theta_star.shape != (p,):
            raise ConfigurationError(
                f"Dimensões inconsistentes: x {self.x.shape}, y {self.y.shape}, "
                f"theta {self.theta_star.shape}"
            )

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def scaled(self, c: float) -> "RegressionSample":
        """Amostra com Y (e theta*) multiplicados por c."""
        return RegressionSample(self.x, c * self.y, c * self.theta_star, self.seed)


@dataclass(frozen=True, eq=False)
class SplitSample:
    """
    Divisão em blocos contíguos de tamanho m = floor(n / partes).

    Attributes:
        sample: amostra de origem
        parts: intervalos [início, fim) de cada bloco
        m: linhas por bloco
        discarded: linhas finais descartadas (n mod partes)
    """

    sample: RegressionSample
    parts: List[Tuple[int, int]]
    m: int
    discarded: int = 0

    def part(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        """Retorna (X, Y) do bloco index."""
        start, stop = self.parts[index]
        return self.sample.x[start:stop], self.sample.y[start:stop]

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    @property
    def p(self) -> int:
        return self.sample.p
