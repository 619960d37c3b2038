"""
Testes do cenário independente (sigma conhecido, Sigma = I).

Todos consomem uma amostra dividida em três blocos. O bloco 1 ajusta o
square-root Lasso, o bloco 2 corrige o viés (theta_I) e o bloco 3 produz as
covariâncias corrigidas W usadas por phi^(f) e phi^(i).
"""

import logging
import math
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np

from ..generators.sampler import split_sample
from ..generators.signal import d2_to_sparse
from ..kernels.fourier import eta_kernel, kernel_params, varphi
from ..models.design_constants import DesignConstants
from ..models.exceptions import ConfigurationError
from ..models.results import SqrtLassoFit, TestReport
from ..models.scenario import RegressionSample, SplitSample
from ..solvers.projections import debias, top_k_project
from ..solvers.sqrt_lasso import sqrt_lasso
from ..validators.conditions import ConditionChecker


logger = logging.getLogger(__name__)


def order_statistic(theta: np.ndarray, j: int) -> float:
    """j-ésima maior magnitude de theta (1-indexada); 0 se j > len(theta)."""
    magnitudes = np.abs(np.asarray(theta, dtype=float))
    if j < 1:
        raise ConfigurationError(f"Ordem deve ser >= 1 (recebido {j})")
    if j > magnitudes.size:
        return 0.0
    return float(np.partition(magnitudes, magnitudes.size - j)[magnitudes.size - j])


def f_statistic(w_normalized: np.ndarray, theta_bar: np.ndarray, s: float) -> float:
    """Z_f = sum_j [1{theta_bar_j = 0}(1 - varphi(s, W_j/||Y||)) + 1{theta_bar_j != 0}]."""
    w_normalized = np.asarray(w_normalized, dtype=float)
    zero = np.asarray(theta_bar) == 0
    kernel = varphi(s, w_normalized[zero]) if zero.any() else np.zeros(0)
    return float(np.sum(1.0 - kernel) + np.count_nonzero(~zero))


def i_statistic(w_normalized: np.ndarray, theta_bar: np.ndarray, r: float, w: float) -> float:
    """V(r, w) com o kernel eta_{r,w} no lugar de varphi."""
    w_normalized = np.asarray(w_normalized, dtype=float)
    zero = np.asarray(theta_bar) == 0
    kernel = eta_kernel(r, w, w_normalized[zero]) if zero.any() else np.zeros(0)
    return float(np.sum(1.0 - kernel) + np.count_nonzero(~zero))


def f_margin(s: float, p: int, alpha: float) -> float:
    """v^(f) = s^2/5 + s e^{s^2/2} sqrt(2 p log(2/alpha))."""
    return s ** 2 / 5 + s * math.exp(s ** 2 / 2) * math.sqrt(2 * p * math.log(2 / alpha))


def i_margin(l: int, l0: int, w: float, p: int, alpha: float) -> float:
    """v^(i)_l = (e^{1/2}/2) w_l^2 + sqrt(2 l sqrt(p) log(pi^2 [1 + log2(l/l0)]^2 / (6 alpha)))."""
    log_term = math.log(math.pi ** 2 * (1 + math.log2(l / l0)) ** 2 / (6 * alpha))
    return math.exp(0.5) / 2 * w ** 2 + math.sqrt(2 * l * math.sqrt(p) * log_term)


class IndependentPipeline:
    """
    Quantidades compartilhadas pelos testes do cenário independente.

    Cada quantidade é calculada uma única vez, sob demanda: o ajuste do
    square-root Lasso (bloco 1), theta_I (bloco 2), theta_bar e W (bloco 3).
    """

    def __init__(
        self,
        split: SplitSample,
        k0: int,
        sigma: float,
        alpha: float,
        delta: float,
        constants: Optional[DesignConstants] = None,
        use_classical_lasso: bool = False,
    ):
        if split.n_parts != 3:
            raise ConfigurationError(f"Cenário independente exige 3 blocos (recebido {split.n_parts})")
        if not sigma > 0:
            raise ConfigurationError(f"sigma deve ser > 0 (recebido {sigma})")
        if not 0 < alpha < 1 or not 0 < delta < 1:
            raise ConfigurationError(f"alpha e delta devem estar em (0, 1) (recebido {alpha}, {delta})")
        if k0 < 0:
            raise ConfigurationError(f"k0 deve ser >= 0 (recebido {k0})")

        self.split = split
        self.k0 = int(k0)
        self.sigma = float(sigma)
        self.alpha = alpha
        self.delta = delta
        self.constants = constants or DesignConstants()
        self.use_classical_lasso = use_classical_lasso
        self.n = split.sample.n
        self.p = split.p
        self.m = split.m

    @cached_property
    def fit(self) -> SqrtLassoFit:
        x1, y1 = self.split.part(0)
        return sqrt_lasso(
            x1, y1, self.delta, self.constants,
            sigma=self.sigma if self.use_classical_lasso else None,
            classical=self.use_classical_lasso,
        )

    @cached_property
    def theta_tilde(self) -> np.ndarray:
        x2, y2 = self.split.part(1)
        return debias(self.fit.theta_hat, x2, y2)

    @cached_property
    def tail_order_stat(self) -> float:
        return order_statistic(self.theta_tilde, self.k0 + 1)

    @cached_property
    def precheck_level(self) -> float:
        """c_t sigma sqrt(log(2p/alpha)/n), nível do pré-teste e do truncamento de theta_bar."""
        return self.constants.c_t * self.sigma * math.sqrt(math.log(2 * self.p / self.alpha) / self.n)

    @cached_property
    def theta_bar(self) -> np.ndarray:
        theta = self.theta_tilde
        return np.where(np.abs(theta) > self.precheck_level, theta, 0.0)

    @cached_property
    def corrected_covariances(self) -> Tuple[np.ndarray, float]:
        """(W, ||Y_bar||) no bloco 3, W = X3^T (Y3 - X3 theta_bar)."""
        x3, y3 = self.split.part(2)
        y_bar = y3 - x3 @ self.theta_bar
        return x3.T @ y_bar, float(np.linalg.norm(y_bar))

    def side_channels(self) -> dict:
        conditions = ConditionChecker.evaluate(self.n, self.p, self.k0, self.alpha, self.constants)
        return {
            'theta_tilde_max_order_stat': self.tail_order_stat,
            'support_size': int(np.count_nonzero(self.fit.theta_hat)),
            'condition_flags': {'A': conditions.condition_A, 'B': conditions.condition_B},
        }


def _pipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso, pipeline) -> IndependentPipeline:
    if pipeline is not None:
        return pipeline
    return IndependentPipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso)


def test_t(
    split: SplitSample,
    k0: int,
    sigma: float,
    alpha: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    use_classical_lasso: bool = False,
    pipeline: Optional[IndependentPipeline] = None,
) -> TestReport:
    """
    phi^(t): rejeita se |theta_I|_(k0+1) >= c_t sigma sqrt(log(p/alpha)/n).

    Examples:
        c_t=1, sigma=1, p=100, alpha=0.05, n=300 -> limiar 0.15920
    """
    pipe = _pipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso, pipeline)
    unit = pipe.sigma * math.sqrt(math.log(pipe.p / alpha) / pipe.n)
    statistic = pipe.tail_order_stat
    threshold = pipe.constants.c_t * unit
    reject = statistic >= threshold

    logger.debug(f"phi^(t): |theta_I|_(k0+1)={statistic:.4g} limiar={threshold:.4g} rejeita={reject}")
    return TestReport(
        name="t",
        statistic=statistic,
        threshold=threshold,
        reject=bool(reject),
        threshold_mode=pipe.constants.mode_of('c_t'),
        normalized=statistic / unit,
        side_channels=pipe.side_channels(),
    )


def chi_base(m: int, k0: int, p: int, alpha: float, delta: float) -> float:
    """sqrt(log(1/alpha)/m) + (k0 v 1) log(p/delta)/m."""
    return math.sqrt(math.log(1 / alpha) / m) + max(k0, 1) * math.log(p / delta) / m


def test_chi(
    split: SplitSample,
    k0: int,
    sigma: float,
    alpha: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    use_classical_lasso: bool = False,
    pipeline: Optional[IndependentPipeline] = None,
) -> TestReport:
    """phi^(chi): Z_chi = ||Y2 - X2 theta_SL,k0||^2 / (m sigma^2) - 1 contra c_chi * base."""
    pipe = _pipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso, pipeline)
    x2, y2 = pipe.split.part(1)
    projected = top_k_project(pipe.fit.theta_hat, pipe.k0)
    residuals = y2 - x2 @ projected
    statistic = float(residuals @ residuals) / (pipe.m * pipe.sigma ** 2) - 1.0

    base = chi_base(pipe.m, pipe.k0, pipe.p, alpha, delta)
    threshold = pipe.constants.c_chi * base
    reject = statistic > threshold

    logger.debug(f"phi^(chi): Z={statistic:.4g} limiar={threshold:.4g} rejeita={reject}")
    return TestReport(
        name="chi",
        statistic=statistic,
        threshold=threshold,
        reject=bool(reject),
        threshold_mode=pipe.constants.mode_of('c_chi'),
        normalized=statistic / base,
        side_channels=pipe.side_channels(),
    )


def test_f(
    split: SplitSample,
    k0: int,
    sigma: float,
    alpha: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    use_classical_lasso: bool = False,
    pipeline: Optional[IndependentPipeline] = None,
) -> TestReport:
    """
    phi^(f): contagem suavizada por Fourier das entradas não nulas.

    Rejeita de imediato se |theta_I|_(k0+1) excede o nível de truncamento;
    caso contrário compara Z_f a k0 + v^(f). ||Y_bar|| = 0 aceita.
    """
    pipe = _pipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso, pipeline)
    s = kernel_params(pipe.k0, pipe.p).s
    margin = pipe.constants.v_f if pipe.constants.v_f is not None else f_margin(s, pipe.p, alpha)
    threshold = pipe.k0 + margin
    mode = pipe.constants.mode_of('c_t', 'v_f')
    channels = pipe.side_channels()
    channels['s'] = s

    if pipe.tail_order_stat > pipe.precheck_level:
        channels['precheck'] = True
        logger.debug(f"phi^(f): pré-teste rejeitou (|theta_I|_(k0+1)={pipe.tail_order_stat:.4g})")
        return TestReport(
            name="f", statistic=math.inf, threshold=threshold, reject=True,
            threshold_mode=mode, normalized=math.inf, side_channels=channels,
        )

    w, y_norm = pipe.corrected_covariances
    if y_norm == 0.0:
        channels['degenerate'] = True
        logger.warning("phi^(f): ||Y_bar|| = 0, aceitando")
        return TestReport(
            name="f", statistic=math.nan, threshold=threshold, reject=False,
            threshold_mode=mode, normalized=-math.inf, side_channels=channels,
        )

    statistic = f_statistic(w / y_norm, pipe.theta_bar, s)
    reject = statistic >= threshold
    logger.debug(f"phi^(f): Z_f={statistic:.4g} limiar={threshold:.4g} rejeita={reject}")
    return TestReport(
        name="f",
        statistic=statistic,
        threshold=threshold,
        reject=bool(reject),
        threshold_mode=mode,
        normalized=statistic - pipe.k0,
        side_channels=channels,
    )


def test_i(
    split: SplitSample,
    k0: int,
    sigma: float,
    alpha: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    use_classical_lasso: bool = False,
    pipeline: Optional[IndependentPipeline] = None,
) -> TestReport:
    """
    phi^(i): uma estatística V(r_l, w_l) por l da grade diádica.

    Rejeita se V >= k0 + l + v^(i)_l para algum l; grade vazia aceita sempre.
    """
    pipe = _pipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso, pipeline)
    params = kernel_params(pipe.k0, pipe.p)
    mode = pipe.constants.mode_of('c_t', 'v_i')

    if not params.grid:
        return TestReport(
            name="i", statistic=[], threshold=[], reject=False, threshold_mode=mode,
            normalized=[], side_channels={'grid': [], 'trivial': True},
        )

    calibrated = pipe.constants.v_i
    if calibrated is not None and len(calibrated) != len(params.grid):
        raise ConfigurationError(
            f"v_i calibrado tem {len(calibrated)} entradas, a grade tem {len(params.grid)}"
        )
    margins = [
        calibrated[idx] if calibrated is not None else i_margin(l, params.l0, w, pipe.p, alpha)
        for idx, (l, _, w) in enumerate(params.grid)
    ]
    thresholds = [pipe.k0 + l + v for (l, _, _), v in zip(params.grid, margins)]
    channels = pipe.side_channels()
    channels['grid'] = [list(entry) for entry in params.grid]

    w_cov, y_norm = pipe.corrected_covariances
    if y_norm == 0.0:
        channels['degenerate'] = True
        logger.warning("phi^(i): ||Y_bar|| = 0, aceitando")
        return TestReport(
            name="i", statistic=[math.nan] * len(thresholds), threshold=thresholds, reject=False,
            threshold_mode=mode, normalized=[-math.inf] * len(thresholds), side_channels=channels,
        )

    normalized_w = w_cov / y_norm
    statistics: List[float] = [
        i_statistic(normalized_w, pipe.theta_bar, r, w) for (_, r, w) in params.grid
    ]
    reject = any(v >= thr for v, thr in zip(statistics, thresholds))
    logger.debug(f"phi^(i): {len(statistics)} valores de l, rejeita={reject}")
    return TestReport(
        name="i",
        statistic=statistics,
        threshold=thresholds,
        reject=bool(reject),
        threshold_mode=mode,
        normalized=[v - pipe.k0 - l for v, (l, _, _) in zip(statistics, params.grid)],
        side_channels=channels,
    )


def dense_guard(theta_hat: np.ndarray, k0: int, sigma: float) -> TestReport:
    """Guarda para alternativas muito densas: d2^2(theta_SL, B0[k0]) >= sigma^2/2."""
    distance_sq = d2_to_sparse(theta_hat, k0) ** 2
    threshold = sigma ** 2 / 2
    return TestReport(
        name="guard",
        statistic=distance_sq,
        threshold=threshold,
        reject=bool(distance_sq >= threshold),
        normalized=distance_sq / sigma ** 2,
    )


def test_ag(
    sample: RegressionSample,
    k0: int,
    sigma: float,
    alpha: float,
    delta: float,
    constants: Optional[DesignConstants] = None,
    use_classical_lasso: bool = False,
) -> TestReport:
    """
    Teste agregado: máximo de phi^(t), phi^(chi), phi^(f), phi^(i) e da guarda densa.

    Uma única divisão em três blocos e um único ajuste do square-root Lasso.
    """
    split = split_sample(sample, 3)
    pipe = IndependentPipeline(split, k0, sigma, alpha, delta, constants, use_classical_lasso)

    sub_reports = [
        test(split, k0, sigma, alpha, delta, pipeline=pipe)
        for test in (test_t, test_chi, test_f, test_i)
    ]
    sub_reports.append(dense_guard(pipe.fit.theta_hat, pipe.k0, pipe.sigma))
    decisions = [r.reject for r in sub_reports]
    reject = any(decisions)

    logger.debug(f"phi^(ag): decisões {dict(zip([r.name for r in sub_reports], decisions))}")
    return TestReport(
        name="ag",
        statistic=[int(d) for d in decisions],
        threshold=1,
        reject=reject,
        threshold_mode=pipe.constants.mode_of('c_t', 'c_chi', 'v_f', 'v_i'),
        side_channels=pipe.side_channels(),
        sub_reports=sub_reports,
    )


# Nomes test_* não são casos de teste do pytest
for _test in (test_t, test_chi, test_f, test_i, test_ag):
    _test.__test__ = False
