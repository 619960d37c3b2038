"""
Configuração de Logging centralizada e padronizada.

Recursos:
- Logs em arquivo e console (stderr, para não misturar com JSON/CSV no stdout)
- Rotação de arquivos (limite 10MB, mantém 5 backups)
- Formato detalhado com timestamp, nível e módulo
"""

import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = "sparsity_tests.log"
):
    """
    Configura o sistema de logging da aplicação.

    Args:
        log_level: Nível de log (DEBUG, INFO, WARNING, ERROR)
        log_file: Caminho do arquivo de log (None desativa o arquivo)
    """
    log_format = '%(asctime)s - %(levelname)s - [%(name)s] - %(message)s'
    date_format = '%Y-%m-%d %H:%M:%S'
    formatter = logging.Formatter(log_format, date_format)

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, log_level.upper()))

    # Limpar handlers anteriores para evitar duplicação
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    if log_file:
        log_path = Path(log_file)
        try:
            log_path.parent.mkdir(parents=True, exist_ok=True)
        except OSError:
            pass

        # Handler de Arquivo com Rotação (Max 10MB per file, keep 5)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10*1024*1024,
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    logging.info(f"Logging configurado. Nível: {log_level}, Arquivo: {log_file}")
