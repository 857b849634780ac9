"""
Repository de datasets de conteos: CSV denso o Matrix Market con ficheros
de nombres, más coordenadas en CSV (spot_id,x,y).
"""
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

from spatial_couplings.exceptions import (
    DataFormatError,
    DuplicateIdError,
    GeneNotFoundError,
    IdMismatchError,
    InvalidInputError
)
from spatial_couplings.models.base import identifiers
from spatial_couplings.models.expression import RawDataset
from spatial_couplings.models.generation import FreezeMask
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

SPOT_ID_COLUMN = 'spot_id'
GENES_SIDECAR = 'genes.txt'
SPOTS_SIDECAR = 'spots.txt'


class DatasetFormat(Enum):
    """Formatos de conteos soportados"""
    DENSE_CSV = "dense-csv"
    MTX = "mtx"


def _read_names(path: Path) -> List[str]:
    if not path.is_file():
        raise DataFormatError("sidecar name file not found", path=str(path))
    names = [line.strip() for line in path.read_text().splitlines()]
    while names and names[-1] == '':
        names.pop()
    for number, name in enumerate(names, start=1):
        if name == '':
            raise DataFormatError("empty name", path=str(path), line=number)
    return names


class DatasetRepository(BaseRepository[RawDataset]):
    """
    Repository para leer y escribir RawDataset.
    """

    def __init__(self, fmt: DatasetFormat = DatasetFormat.DENSE_CSV):
        self.fmt = DatasetFormat(fmt)

    def load(self, path: PathLike, coords_path: Optional[PathLike] = None, **kwargs) -> RawDataset:
        """
        Lee conteos y, opcionalmente, coordenadas unidas por spot_id.

        Args:
            path: Fichero de conteos (CSV denso o .mtx)
            coords_path: CSV con columnas spot_id,x,y

        Returns:
            RawDataset

        Raises:
            DataFormatError: Fallo de parseo (con línea y columna)
            DuplicateIdError: Identificadores repetidos
            IdMismatchError: Falta la coordenada de algún spot
        """
        path = self.require_file(path)
        if self.fmt == DatasetFormat.DENSE_CSV:
            spot_ids, gene_names, counts = self._load_dense(path)
        else:
            spot_ids, gene_names, counts = self._load_mtx(path)

        coordinates = None
        if coords_path is not None:
            coordinates = self.load_coordinates(coords_path, spot_ids)
        logger.info("Loaded %d spots x %d genes from %s", len(spot_ids), len(gene_names), path)
        return RawDataset(counts=counts, spot_ids=spot_ids, gene_names=gene_names, coordinates=coordinates)

    @staticmethod
    def _load_dense(path: Path) -> Tuple[List[str], List[str], np.ndarray]:
        spot_ids, gene_names, counts = read_matrix_csv(path)
        identifiers(spot_ids, 'spot')
        return spot_ids, gene_names, counts

    @staticmethod
    def _load_mtx(path: Path) -> Tuple[List[str], List[str], np.ndarray]:
        genes = _read_names(path.parent / GENES_SIDECAR)
        spots = _read_names(path.parent / SPOTS_SIDECAR)
        try:
            matrix = mmread(str(path))
        except (ValueError, IndexError, OSError) as exc:
            raise DataFormatError(f"invalid Matrix Market file ({exc})", path=str(path)) from None
        counts = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
        counts = np.asarray(counts, dtype=float)
        if counts.shape == (len(spots), len(genes)):
            return spots, genes, counts
        if counts.shape == (len(genes), len(spots)):
            logger.debug("Matrix Market file stored genes x spots, transposing")
            return spots, genes, counts.T
        raise DataFormatError(
            f"matrix shape {counts.shape} matches neither {len(spots)} spots x {len(genes)} genes "
            "nor its transpose",
            path=str(path)
        )

    def read_coordinates(self, path: PathLike) -> Tuple[List[str], np.ndarray]:
        """Lee el CSV spot_id,x,y en el orden del fichero"""
        path = self.require_file(path)
        table = read_table(path)
        if SPOT_ID_COLUMN not in table.columns:
            raise DataFormatError(f"missing column '{SPOT_ID_COLUMN}'", path=str(path), line=1)
        ids = [str(v) for v in table[SPOT_ID_COLUMN].tolist()]
        try:
            identifiers(ids, 'spot')
        except DuplicateIdError as exc:
            raise DuplicateIdError(f"{path}: {exc}", identifier=exc.identifier) from None
        return ids, parse_floats(table, ['x', 'y'], path)

    def load_coordinates(self, path: PathLike, spot_ids: Sequence[str]) -> np.ndarray:
        """
        Lee coordenadas y las ordena como spot_ids. Los spots sobrantes del
        fichero se descartan con un aviso.
        """
        ids, xy = self.read_coordinates(path)
        position = {spot: i for i, spot in enumerate(ids)}
        missing = [s for s in spot_ids if s not in position]
        if missing:
            raise IdMismatchError(
                f"{path}: no coordinates for spot '{missing[0]}'", identifier=missing[0]
            )
        extra = len(ids) - len(spot_ids)
        if extra > 0:
            logger.warning("%s: ignoring %d coordinates of spots without counts", path, extra)
        return xy[[position[s] for s in spot_ids]]

    def save(self, entity: RawDataset, path: PathLike, coords_path: Optional[PathLike] = None, **kwargs) -> None:
        """
        Escribe un dataset en el formato del repositorio (round trip exacto
        con load).
        """
        path = self.ensure_parent(path)
        if self.fmt == DatasetFormat.DENSE_CSV:
            write_matrix_csv(path, entity.spot_ids, entity.gene_names, entity.counts, SPOT_ID_COLUMN)
        else:
            # con un nombre, mmwrite añadiría '.mtx'
            with open(path, 'wb') as handle:
                mmwrite(handle, sp.coo_matrix(entity.counts), precision=17)
            (path.parent / GENES_SIDECAR).write_text(''.join(f'{g}\n' for g in entity.gene_names))
            (path.parent / SPOTS_SIDECAR).write_text(''.join(f'{s}\n' for s in entity.spot_ids))

        if coords_path is not None:
            if entity.coordinates is None:
                raise InvalidInputError("Dataset has no coordinates to save")
            self.save_coordinates(entity.spot_ids, entity.coordinates, coords_path)

    def save_coordinates(self, spot_ids: Sequence[str], coordinates: np.ndarray, path: PathLike) -> None:
        """Escribe el CSV spot_id,x,y"""
        path = self.ensure_parent(path)
        frame = pd.DataFrame({
            SPOT_ID_COLUMN: list(spot_ids),
            'x': [format_float(v) for v in coordinates[:, 0]],
            'y': [format_float(v) for v in coordinates[:, 1]]
        })
        frame.to_csv(path, index=False)

    def load_many(self, paths: Sequence[PathLike], coords_paths: Sequence[Optional[PathLike]],
                  sample_ids: Optional[Sequence[str]] = None) -> RawDataset:
        """
        Une varias muestras en un único dataset. Los spots pasan a llamarse
        '<muestra>:<spot>' y cada uno guarda su muestra en sample_ids.

        Raises:
            IdMismatchError: Si los paneles de genes difieren
        """
        if len(paths) != len(coords_paths):
            raise InvalidInputError("Need one coordinates file per counts file")
        if sample_ids is None:
            stems = [Path(p).stem for p in paths]
            sample_ids = stems if len(set(stems)) == len(stems) else [f'sample{i}' for i in range(len(paths))]
        if len(sample_ids) != len(paths):
            raise InvalidInputError("Need one sample id per counts file")

        datasets = [self.load(p, c) for p, c in zip(paths, coords_paths)]
        genes = datasets[0].gene_names
        for path, data in zip(paths, datasets):
            if data.gene_names != genes:
                differing = sorted(set(genes) ^ set(data.gene_names)) or [genes[0]]
                raise IdMismatchError(
                    f"{path}: gene panel differs from {paths[0]} (e.g. '{differing[0]}')",
                    identifier=differing[0]
                )

        with_coords = all(d.coordinates is not None for d in datasets)
        return RawDataset(
            counts=np.vstack([d.counts for d in datasets]),
            spot_ids=[f'{s}:{spot}' for s, d in zip(sample_ids, datasets) for spot in d.spot_ids],
            gene_names=genes,
            coordinates=np.vstack([d.coordinates for d in datasets]) if with_coords else None,
            sample_ids=[s for s, d in zip(sample_ids, datasets) for _ in range(d.n_spots)]
        )

    def load_freeze(self, path: PathLike, spot_ids: Sequence[str], gene_names: Sequence[str]) -> FreezeMask:
        """
        Lee un CSV spot_id,gene,value con las entradas a congelar.

        Raises:
            IdMismatchError: Spot desconocido
            GeneNotFoundError: Gen desconocido
        """
        path = self.require_file(path)
        table = read_table(path)
        for column in (SPOT_ID_COLUMN, 'gene'):
            if column not in table.columns:
                raise DataFormatError(f"missing column '{column}'", path=str(path), line=1)
        values = parse_floats(table, ['value'], path)[:, 0]
        spot_position = {s: i for i, s in enumerate(spot_ids)}
        gene_position = {g: j for j, g in enumerate(gene_names)}

        shape = (len(spot_ids), len(gene_names))
        frozen = np.zeros(shape, dtype=bool)
        fixed = np.zeros(shape)
        for spot, gene, value in zip(table[SPOT_ID_COLUMN].tolist(), table['gene'].tolist(), values):
            if spot not in spot_position:
                raise IdMismatchError(f"{path}: unknown spot '{spot}'", identifier=str(spot))
            if gene not in gene_position:
                raise GeneNotFoundError(str(gene))
            frozen[spot_position[spot], gene_position[gene]] = True
            fixed[spot_position[spot], gene_position[gene]] = value
        return FreezeMask.from_matrix(frozen, fixed)
