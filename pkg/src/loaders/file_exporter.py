"""
Exportador de tabelas CSV e relatórios JSON.

CSV sempre com separador ',', floats '%.10g' e quebra de linha '\\n', para
que a mesma semente produza os mesmos bytes.
"""

import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Tuple

import pandas as pd

from ..config import settings


logger = logging.getLogger(__name__)


class FileExporter:
    """Exporta tabelas de varredura, traços de solver e relatórios."""

    def __init__(self):
        self.encoding = settings.EXPORT_ENCODING
        self.sep = settings.EXPORT_SEP
        self.float_format = settings.FLOAT_FORMAT

    def to_csv_text(self, df: pd.DataFrame) -> str:
        return df.to_csv(
            index=False,
            sep=self.sep,
            float_format=self.float_format,
            lineterminator='\n',
        )

    def export_to_csv(self, df: pd.DataFrame, output_path: str) -> bool:
        """Grava df em output_path; False em caso de erro de escrita."""
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, "w", encoding=self.encoding, newline='') as f:
                f.write(self.to_csv_text(df))
            logger.info(f"CSV exportado com sucesso: {output_path}")
            logger.info(f"  Linhas: {len(df):,} | Colunas: {len(df.columns)}")
            return True

        except OSError as e:
            logger.error(f"Erro ao exportar CSV {output_path}: {e}")
            return False

    def export_sweep(self, df: pd.DataFrame, output_path: Optional[str] = None) -> Optional[str]:
        """
        Tabela de varredura com as colunas fixas.

        Returns:
            O texto CSV quando output_path é None, senão None
        """
        df = df.reindex(columns=settings.SWEEP_COLUMNS)
        if output_path is None:
            return self.to_csv_text(df)
        if not self.export_to_csv(df, output_path):
            raise OSError(f"Falha ao gravar {output_path}")
        return None

    def export_trace(self, trace: Iterable[Tuple[int, float, float]], output_path: str) -> bool:
        """Traço do square-root Lasso: (iteration, objective, sigma_hat)."""
        df = pd.DataFrame(list(trace), columns=['iteration', 'objective', 'sigma_hat'])
        return self.export_to_csv(df, output_path)

    def export_json(self, payload: dict, output_path: str) -> bool:
        try:
            Path(output_path).parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, "w", encoding=self.encoding) as f:
                json.dump(payload, f, indent=2)
            logger.info(f"JSON exportado: {output_path}")
            return True

        except OSError as e:
            logger.error(f"Erro ao exportar JSON {output_path}: {e}")
            return False
