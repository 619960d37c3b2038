"""
Construção de theta* com distância prescrita ao conjunto B0[k0] dos vetores
k0-esparsos.
"""

import logging

import numpy as np

from ..models.exceptions import PatternInfeasible
from ..models.scenario import SignalSpec
from ..solvers.projections import top_k_indices


logger = logging.getLogger(__name__)


def d2_to_sparse(theta: np.ndarray, k0: int) -> float:
    """
    Distância euclidiana de theta a B0[k0]: norma de theta sem suas k0
    maiores entradas em magnitude (empates pelo menor índice).

    Examples:
        theta=(3, 2, 1), k0=1 -> sqrt(5)
        k0 >= p              -> 0
    """
    theta = np.asarray(theta, dtype=float)
    if k0 >= theta.size:
        return 0.0
    rest = np.delete(theta, top_k_indices(theta, k0))
    return float(np.linalg.norm(rest))


def _alternating_signs(count: int) -> np.ndarray:
    return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)


def make_theta(signal: SignalSpec, p: int, sigma: float) -> np.ndarray:
    """
    Realiza theta* para o padrão pedido.

    Padrões:
        spikes: k0 entradas +-spike_scale*sigma nos índices 0..k0-1 e delta
            entradas rho*sigma/sqrt(delta) em seguida
        flat_small: k0+delta entradas iguais a rho*sigma/sqrt(delta)
        decaying: cauda proporcional a 1 + log(k0/min(q, k0)), q = 1..delta,
            escalada para que d2 = rho*sigma; cabeça com k0 entradas
            max(spike_scale*sigma, maior entrada da cauda)
        explicit: o vetor fornecido

    Raises:
        PatternInfeasible: delta = 0 com rho > 0, k0 + delta > p ou
            spikes menores que a cauda
    """
    k0, delta, rho = signal.k0, signal.delta, signal.rho

    if signal.pattern == "explicit":
        theta = np.asarray(signal.vector, dtype=float)
        if theta.shape != (p,):
            raise PatternInfeasible(f"Vetor explícito com forma {theta.shape}, esperado ({p},)")
        return theta.copy()

    if delta == 0 and rho > 0:
        raise PatternInfeasible("rho > 0 exige delta > 0")
    if k0 + delta > p:
        raise PatternInfeasible(f"k0 + delta = {k0 + delta} > p = {p}")

    theta = np.zeros(p)
    tail_signs = _alternating_signs(delta)
    head_signs = _alternating_signs(k0)

    if signal.pattern == "spikes":
        tail = rho * sigma / np.sqrt(delta) if delta else 0.0
        head = signal.spike_scale * sigma
        if k0 and tail > head:
            raise PatternInfeasible(
                f"Cauda {tail:.4g} maior que os spikes {head:.4g}: d2 deixaria de ser rho*sigma"
            )
        theta[:k0] = head * head_signs
        theta[k0:k0 + delta] = tail * tail_signs

    elif signal.pattern == "flat_small":
        level = rho * sigma / np.sqrt(delta) if delta else 0.0
        theta[:k0] = level * head_signs
        theta[k0:k0 + delta] = level * tail_signs

    else:  # decaying
        base = max(k0, 1)
        q = np.arange(1, delta + 1)
        profile = 1.0 + np.log(base / np.minimum(q, base))
        norm = np.linalg.norm(profile)
        tail = rho * sigma * profile / norm if delta else profile
        head = max(signal.spike_scale * sigma, float(tail[0]) if delta else 0.0)
        theta[:k0] = head * head_signs
        theta[k0:k0 + delta] = tail * tail_signs

    logger.debug(
        f"theta* ({signal.pattern}): ||theta||_0 = {np.count_nonzero(theta)}, "
        f"d2 = {d2_to_sparse(theta, k0):.6g}"
    )
    return theta
