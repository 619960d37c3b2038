"""
Sementes derivadas e geradores contáveis (Philox) para Monte Carlo reprodutível.

Cada (semente mestre, índices) gera uma subsequência independente, de modo que
ensaios podem rodar em qualquer ordem ou em paralelo com o mesmo resultado.
"""

import numpy as np


def derive_seed(master_seed: int, *indices: int) -> int:
    """Deriva uma semente de 64 bits a partir da semente mestre e de índices."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [int(i) for i in indices]
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def make_generator(seed: int) -> np.random.Generator:
    """Gerador Philox (baseado em contador) para uma semente de 64 bits."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))
