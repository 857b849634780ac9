"""
Repository de modelos ajustados.

Un directorio por modelo:
    g_intra.csv          g' con nombres de gen en filas y columnas
    g_shell1.csv, ...    g^(k)
    meta.json            genes, q por capa, K, configuración y procedencia
    trace.csv            epoch,nll,grad_norm (si hay traza)
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from spatial_couplings import __version__
from spatial_couplings.exceptions import DataFormatError, IdMismatchError, SpatialCouplingsError
from spatial_couplings.models.inference import FitTrace, StopReason
from spatial_couplings.models.interaction import InteractionModel
from spatial_couplings.repositories.base_repository import (
    BaseRepository,
    PathLike,
    format_float,
    parse_floats,
    read_matrix_csv,
    read_table,
    write_matrix_csv
)

logger = logging.getLogger(__name__)

INTRA_FILE = 'g_intra.csv'
META_FILE = 'meta.json'
TRACE_FILE = 'trace.csv'
GENE_COLUMN = 'gene'


def shell_file(k: int) -> str:
    """Nombre del fichero de la capa k (1, 2, ...)"""
    return f'g_shell{k}.csv'


class ModelRepository(BaseRepository[InteractionModel]):
    """
    Repository para persistir InteractionModel y su FitTrace.
    """

    def save(self, entity: InteractionModel, path: PathLike, trace: Optional[FitTrace] = None,
             metadata: Optional[Dict[str, Any]] = None, **kwargs) -> None:
        """
        Guarda un modelo en un directorio.

        Args:
            entity: Modelo
            path: Directorio destino (se crea si no existe)
            trace: Traza del ajuste
            metadata: Campos extra para meta.json (config, procedencia, semilla, ...)
        """
        directory = Path(path)
        directory.mkdir(parents=True, exist_ok=True)
        genes = entity.gene_names
        write_matrix_csv(directory / INTRA_FILE, genes, genes, entity.g_intra, GENE_COLUMN)
        for k, g in enumerate(entity.g_shells, start=1):
            write_matrix_csv(directory / shell_file(k), genes, genes, g, GENE_COLUMN)

        meta = dict(metadata or {})
        meta.update({
            'version': __version__,
            'gene_names': list(genes),
            'q_shells': [float(q) for q in entity.q_shells],
            'n_shells': entity.n_shells
        })
        if trace is not None:
            meta['stop_reason'] = trace.stop_reason.value if trace.stop_reason else None
            frame = pd.DataFrame({
                'epoch': [str(e) for e in trace.epochs],
                'nll': [format_float(v) for v in trace.nll],
                'grad_norm': [format_float(v) for v in trace.grad_norm]
            })
            frame.to_csv(directory / TRACE_FILE, index=False)
        (directory / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True))
        logger.info("Saved model with %d genes and %d shells to %s", len(genes), entity.n_shells, directory)

    def load_meta(self, path: PathLike) -> Dict[str, Any]:
        """Lee meta.json"""
        meta_path = self.require_file(Path(path) / META_FILE)
        try:
            meta = json.loads(meta_path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(exc.msg, path=str(meta_path), line=exc.lineno) from None
        for key in ('gene_names', 'q_shells', 'n_shells'):
            if key not in meta:
                raise DataFormatError(f"missing key '{key}'", path=str(meta_path))
        return meta

    def _load_matrix(self, path: Path, genes: Tuple[str, ...]) -> np.ndarray:
        rows, columns, values = read_matrix_csv(self.require_file(path))
        for kind, names in (('row', rows), ('column', columns)):
            if tuple(names) != genes:
                differing = [a for a, b in zip(names, genes) if a != b] or list(names) or ['?']
                raise IdMismatchError(
                    f"{path}: {kind} genes do not match the model panel (e.g. '{differing[0]}')",
                    identifier=differing[0]
                )
        return values

    def load(self, path: PathLike, **kwargs) -> InteractionModel:
        """
        Reconstruye el modelo guardado.

        Raises:
            DataFormatError: Ficheros ausentes o corruptos
            IdMismatchError: Genes distintos entre ficheros
        """
        directory = Path(path)
        meta = self.load_meta(directory)
        genes = tuple(str(g) for g in meta['gene_names'])
        g_intra = self._load_matrix(directory / INTRA_FILE, genes)
        g_shells = [
            self._load_matrix(directory / shell_file(k), genes)
            for k in range(1, int(meta['n_shells']) + 1)
        ]
        try:
            return InteractionModel(
                g_intra=g_intra, g_shells=tuple(g_shells), q_shells=tuple(meta['q_shells']), gene_names=genes
            )
        except SpatialCouplingsError as exc:
            raise DataFormatError(f"invalid model ({exc})", path=str(directory)) from None

    def load_trace(self, path: PathLike) -> Optional[FitTrace]:
        """Lee trace.csv si existe"""
        directory = Path(path)
        trace_path = directory / TRACE_FILE
        if not trace_path.is_file():
            return None
        table = read_table(trace_path)
        values = parse_floats(table, ['epoch', 'nll', 'grad_norm'], trace_path)
        trace = FitTrace()
        for epoch, loss, grad in values:
            trace.record(int(epoch), loss, grad)
        stop = self.load_meta(directory).get('stop_reason')
        trace.stop_reason = StopReason(stop) if stop else None
        return trace
