"""
Varredura de parâmetros: produto cartesiano (n, p, k0, delta, rho, teste).

Cada célula tem semente própria derivada da semente mestre e da posição
da célula, o que permite retomar uma varredura interrompida.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd
from tqdm import tqdm

from ..config import settings
from ..generators.presets import alternative_panel, null_panel
from ..hypothesis.registry import TEST_NAMES, TestParams, make_runner, setting_of
from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError, SparsityTestError
from ..models.results import RateQuery
from ..models.scenario import CovarianceSpec
from ..utils.rng import derive_seed
from .rates import rate_reference
from .risk_service import estimate_risk


logger = logging.getLogger(__name__)

CELL_KEYS = ['n', 'p', 'k0', 'delta', 'rho', 'test']


@dataclass(frozen=True)
class SweepConfig:
    """Descrição de uma varredura; delta é o número de coeficientes extras."""

    n: Sequence[int]
    p: Sequence[int]
    k0: Sequence[int]
    delta: Sequence[int]
    rho: Sequence[float]
    tests: Sequence[str]
    trials: int = settings.DEFAULT_TRIALS
    seed: int = settings.DEFAULT_SEED
    alpha: float = 0.05
    level_delta: float = 0.05
    eta: float = 2.0
    sigma: float = 1.0
    patterns: Sequence[str] = ("spikes", "flat_small", "decaying")
    covariance: Dict = field(default_factory=dict)

    def __post_init__(self):
        grids = {k: getattr(self, k) for k in ('n', 'p', 'k0', 'delta', 'rho', 'tests')}
        empty = [k for k, v in grids.items() if not v]
        if empty:
            raise ConfigurationError(f"Grade vazia: {', '.join(empty)}")
        unknown = set(self.tests) - set(TEST_NAMES)
        if unknown:
            raise ConfigurationError(f"Testes desconhecidos: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigurationError(f"Configuração de varredura inválida: {e}") from e

    def cells(self) -> List[tuple]:
        return list(itertools.product(self.n, self.p, self.k0, self.delta, self.rho, self.tests))


def _cell_row(config: SweepConfig, cell: tuple, cell_seed: int, constants: DesignConstants) -> dict:
    n, p, k0, delta, rho, test = cell
    row = dict(zip(CELL_KEYS, cell))
    row.update({'type1': math.nan, 'type2': math.nan, 'risk': math.nan, 'half_width': math.nan,
                'rate_ref': math.nan, 'regime': '', 'seed': cell_seed, 'error': ''})

    setting = setting_of(test)
    try:
        rate = rate_reference(RateQuery(setting, n, p, k0, delta))
        row['rate_ref'], row['regime'] = rate['rate'], rate['regime']

        known = setting == "independent"
        covariance = CovarianceSpec() if known else CovarianceSpec.from_dict(config.covariance)
        nulls = null_panel(k0, n, p, config.sigma, known, covariance)
        alternatives = alternative_panel(k0, delta, rho, n, p, config.sigma, known, covariance, config.patterns)
        params = TestParams(k0=k0, alpha=config.alpha, delta=config.level_delta, eta=config.eta)

        estimate = estimate_risk(make_runner(test, params, constants), nulls, alternatives,
                                 config.trials, cell_seed)
        row.update({'type1': estimate.type1, 'type2': estimate.type2,
                    'risk': estimate.risk, 'half_width': estimate.half_width})

    except SparsityTestError as e:
        logger.warning(f"Célula {cell} falhou: {e}")
        row['error'] = f"{type(e).__name__}: {e}"
    return row


def sweep(
    config: SweepConfig,
    constants: Optional[DesignConstants] = None,
    resume_from: Optional[pd.DataFrame] = None,
    show_progress: bool = True,
) -> pd.DataFrame:
    """
    Uma linha por célula com o RiskEstimate e a taxa de referência.

    Erros por célula vão para a coluna 'error' e a varredura continua.
    Linhas sem erro de resume_from são reaproveitadas sem recalcular.
    """
    constants = constants or DesignConstants()
    cells = config.cells()
    done = {}
    if resume_from is not None and not resume_from.empty:
        ok = resume_from[resume_from['error'].fillna('') == '']
        done = {tuple(r[k] for k in CELL_KEYS): r for r in ok.to_dict('records')}
        logger.info(f"Retomando varredura: {len(done)} células já concluídas")

    logger.info(f"Varredura com {len(cells)} células, {config.trials} ensaios por cenário")
    rows = []
    iterator = tqdm(list(enumerate(cells)), desc="Varredura") if show_progress else enumerate(cells)
    for index, cell in iterator:
        if cell in done:
            rows.append(done[cell])
            continue
        rows.append(_cell_row(config, cell, derive_seed(config.seed, index), constants))

    df = pd.DataFrame(rows, columns=settings.SWEEP_COLUMNS)
    failed = int((df['error'] != '').sum())
    logger.info(f"Varredura concluída: {len(df) - failed}/{len(df)} células sem erro")
    return df
