"""
Registro das constantes de projeto que a teoria deixa sem valor numérico.

Cada entrada tem um valor padrão analítico (config.settings.DEFAULT_CONSTANTS)
e uma proveniência: 'analytic-default' ou 'calibrated'. O registro é imutável;
atualizações devolvem uma nova instância.
"""

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..config import settings
from .exceptions import ConfigurationError


ANALYTIC = "analytic-default"
CALIBRATED = "calibrated"

_D = settings.DEFAULT_CONSTANTS


@dataclass(frozen=True)
class DesignConstants:
    """
    Constantes dos limiares, da seleção de suporte e das condições A/B.

    Attributes:
        c_t: limiar de phi^(t) (em sigma*sqrt(log(p/alpha)/n))
        c_chi: limiar de phi^(chi)
        c_u_eta: limiar de phi^(u)
        c_SL_eta: limiar do square-root Lasso truncado
        c_MCP_eta: lambda_MCP = c * sigma_SL * sqrt(log p)
        c_MCP_prime_eta: kappa do MCP
        c_star_a1, c_star_a3: parâmetros (a1, a3) de c_* em phi^(th)
        c_ith_eta: escala do parâmetro a1 da seleção iterativa
        condition_A_c, condition_B_c, condition_B_p_min: condições A/B
        c_eta_regime: constante de regime da agregação geral
        sl_lambda_scale: escala da penalidade do square-root Lasso
        a2: fator de tamanho da Propriedade S
        c_star: c_* calibrado (None usa c_star_default)
        v_f: limiar aditivo calibrado de phi^(f) (None usa a fórmula)
        v_i: limiares aditivos calibrados de phi^(i), um por l (None usa a fórmula)
        provenance: proveniência por entrada
    """

    c_t: float = _D['c_t']
    c_chi: float = _D['c_chi']
    c_u_eta: float = _D['c_u_eta']
    c_SL_eta: float = _D['c_SL_eta']
    c_MCP_eta: float = _D['c_MCP_eta']
    c_MCP_prime_eta: float = _D['c_MCP_prime_eta']
    c_star_a1: float = _D['c_star_a1']
    c_star_a3: float = _D['c_star_a3']
    c_ith_eta: float = _D['c_ith_eta']
    condition_A_c: float = _D['condition_A_c']
    condition_B_c: float = _D['condition_B_c']
    condition_B_p_min: float = _D['condition_B_p_min']
    c_eta_regime: float = _D['c_eta_regime']
    sl_lambda_scale: float = _D['sl_lambda_scale']
    a2: float = _D['a2']
    c_star: Optional[float] = None
    v_f: Optional[float] = None
    v_i: Optional[Tuple[float, ...]] = None
    provenance: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in _D:
            value = getattr(self, name)
            if not value > 0:
                raise ConfigurationError(f"Constante {name} deve ser > 0 (recebido {value})")
        if self.c_star is not None and not self.c_star > 0:
            raise ConfigurationError(f"Constante c_star deve ser > 0 (recebido {self.c_star})")
        if self.c_MCP_prime_eta <= 0.5:
            raise ConfigurationError("kappa (c_MCP_prime_eta) deve ser > 1/2")
        if self.v_i is not None:
            object.__setattr__(self, 'v_i', tuple(float(v) for v in self.v_i))

    def provenance_of(self, name: str) -> str:
        return self.provenance.get(name, ANALYTIC)

    def mode_of(self, *names: str) -> str:
        """'calibrated' se alguma das constantes veio de calibração."""
        if any(self.provenance_of(n) == CALIBRATED for n in names):
            return "calibrated"
        return "analytic"

    def with_values(self, provenance: str = CALIBRATED, **values) -> "DesignConstants":
        """Nova instância com valores substituídos e proveniência registrada."""
        unknown = set(values) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigurationError(f"Constantes desconhecidas: {sorted(unknown)}")
        tags = dict(self.provenance)
        tags.update({name: provenance for name in values})
        return replace(self, provenance=tags, **values)

    def calibrated_names(self) -> Tuple[str, ...]:
        return tuple(sorted(n for n, tag in self.provenance.items() if tag == CALIBRATED))

    def analytic_only(self) -> "DesignConstants":
        """Descarta as entradas calibradas, voltando aos padrões analíticos."""
        names = self.calibrated_names()
        if not names:
            return self
        defaults = {n: _D.get(n) for n in names}
        return self.with_values(provenance=ANALYTIC, **defaults)

    def to_dict(self) -> dict:
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != 'provenance'}
        if data['v_i'] is not None:
            data['v_i'] = list(data['v_i'])
        names = [n for n in data if data[n] is not None]
        data['provenance'] = {n: self.provenance_of(n) for n in names}
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "DesignConstants":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"Constantes desconhecidas: {sorted(unknown)}")
        values = dict(data)
        if values.get('v_i') is not None:
            values['v_i'] = tuple(values['v_i'])
        values['provenance'] = dict(values.get('provenance') or {})
        return cls(**values)

    def save(self, path: str):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load(cls, path: str) -> "DesignConstants":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))
