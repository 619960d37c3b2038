"""
Cache em disco das estatísticas nulas da calibração.

Cada entrada é indexada por um resumo SHA-256 da descrição da calibração
(teste, parâmetros, cenários, ensaios, semente) e guardada com pickle.
"""

import hashlib
import json
import logging
import pickle
from pathlib import Path
from typing import Any, Optional

from ..config import settings

logger = logging.getLogger(__name__)


class CacheManager:
    """Gerencia o cache em disco de resultados determinísticos."""

    def __init__(self, cache_dir: Optional[str] = None):
        self.cache_dir = Path(cache_dir) if cache_dir else settings.CACHE_DIR
        self._ensure_cache_dir()

    def _ensure_cache_dir(self):
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.warning(f"Não foi possível criar diretório de cache {self.cache_dir}: {e}")

    @staticmethod
    def make_key(**descriptor) -> str:
        """Chave estável para uma descrição serializável em JSON."""
        canonical = json.dumps(descriptor, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def _get_file_path(self, key: str) -> Path:
        return self.cache_dir / f"{key}.pickle"

    def get(self, key: str) -> Optional[Any]:
        """Objeto guardado ou None se ausente/ilegível."""
        file_path = self._get_file_path(key)
        if not file_path.exists():
            return None

        try:
            with open(file_path, "rb") as f:
                data = pickle.load(f)
            logger.debug(f"Cache hit: {key[:12]}")
            return data

        except (OSError, pickle.UnpicklingError, EOFError) as e:
            logger.warning(f"Erro ao ler cache {key[:12]}: {e}")
            return None

    def set(self, key: str, value: Any):
        file_path = self._get_file_path(key)
        try:
            with open(file_path, "wb") as f:
                pickle.dump(value, f)
            logger.debug(f"Cache saved: {key[:12]}")
        except OSError as e:
            logger.warning(f"Erro ao salvar cache {key[:12]}: {e}")

    def delete(self, key: str):
        file_path = self._get_file_path(key)
        if file_path.exists():
            try:
                file_path.unlink()
            except OSError as e:
                logger.warning(f"Erro ao excluir cache {key[:12]}: {e}")

    def clear_all(self):
        try:
            for file in self.cache_dir.glob("*.pickle"):
                file.unlink()
            logger.info("Cache limpo com sucesso.")
        except OSError as e:
            logger.error(f"Erro ao limpar cache: {e}")
