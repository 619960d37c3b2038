"""
Formato binário SPTD de datasets gerados.

Layout (little-endian):
    cabeçalho '<4sIQQ'  magic b'SPTD', versão 1, n, p
    X                   n*p float64, por linhas
    y                   n float64
    theta*              p float64
    semente             '<Q'
"""

import logging
import struct
from pathlib import Path

import numpy as np

from ..models.exceptions import ConfigurationError
from ..models.scenario import RegressionSample


logger = logging.getLogger(__name__)

MAGIC = b'SPTD'
VERSION = 1
_HEADER = struct.Struct('<4sIQQ')
_SEED = struct.Struct('<Q')
_FLOAT = np.dtype('<f8')


def write_dataset(sample: RegressionSample, path: str) -> Path:
    """Grava a amostra em `path` e devolve o caminho."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n, p = sample.n, sample.p
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, n, p))
        f.write(np.ascontiguousarray(sample.x, dtype=_FLOAT).tobytes())
        f.write(np.ascontiguousarray(sample.y, dtype=_FLOAT).tobytes())
        f.write(np.ascontiguousarray(sample.theta_star, dtype=_FLOAT).tobytes())
        f.write(_SEED.pack(sample.seed % 2 ** 64))
    logger.info(f"Dataset gravado: {path} (n={n}, p={p}, semente={sample.seed})")
    return path


def read_dataset(path: str) -> RegressionSample:
    """
    Lê um dataset SPTD.

    Raises:
        FileNotFoundError: arquivo inexistente
        ConfigurationError: magic, versão ou tamanho inválidos
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ConfigurationError(f"{path}: arquivo menor que o cabeçalho SPTD")

    magic, version, n, p = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: magic {magic!r} inválido")
    if version != VERSION:
        raise ConfigurationError(f"{path}: versão {version} não suportada")

    expected = _HEADER.size + 8 * (n * p + n + p) + _SEED.size
    if len(data) != expected:
        raise ConfigurationError(f"{path}: {len(data)} bytes, esperado {expected}")

    offset = _HEADER.size
    x = np.frombuffer(data, dtype=_FLOAT, count=n * p, offset=offset).reshape(n, p)
    offset += 8 * n * p
    y = np.frombuffer(data, dtype=_FLOAT, count=n, offset=offset)
    offset += 8 * n
    theta = np.frombuffer(data, dtype=_FLOAT, count=p, offset=offset)
    offset += 8 * p
    (seed,) = _SEED.unpack_from(data, offset)

    logger.debug(f"Dataset lido: {path} (n={n}, p={p})")
    return RegressionSample(
        x=x.astype(float),
        y=y.astype(float),
        theta_star=theta.astype(float),
        seed=int(seed),
    )
