"""
Implementación del patrón Repository.
Abstrae el acceso a disco de datasets, modelos e informes.
"""
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Generic, List, Sequence, Tuple, TypeVar, Union

import numpy as np
import pandas as pd

from spatial_couplings.exceptions import DataFormatError, DuplicateIdError

logger = logging.getLogger(__name__)

T = TypeVar('T')

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """Representación más corta que vuelve a leerse idéntica"""
    return repr(float(value))


def _parse_column(column: pd.Series, path: str, name: str) -> np.ndarray:
    try:
        return np.array(column.to_numpy(dtype=str), dtype=float)
    except ValueError:
        parsed = pd.to_numeric(column, errors='coerce')
        flagged = np.flatnonzero(parsed.isna().to_numpy())
        if flagged.size == 0:
            raise DataFormatError("non-numeric entries", path=path, column=name) from None
        bad = int(flagged[0])
        # cabecera en la línea 1
        raise DataFormatError(
            f"cannot parse '{column.iloc[bad]}' as a number", path=path, line=bad + 2, column=name
        ) from None


def read_header(path: PathLike) -> List[str]:
    """Lee la cabecera sin renombrar columnas duplicadas"""
    try:
        header = pd.read_csv(path, header=None, nrows=1, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataFormatError("file is empty", path=str(path)) from None
    except pd.errors.ParserError as exc:
        raise DataFormatError(str(exc), path=str(path), line=1) from None
    return [str(v).strip() for v in header.iloc[0].tolist()]


def read_table(path: PathLike) -> pd.DataFrame:
    """
    Lee un CSV con cabecera como texto (sin conversión de tipos).

    Raises:
        DataFormatError: Si el fichero está vacío o mal formado
        DuplicateIdError: Si la cabecera repite un nombre
    """
    header = read_header(path)
    seen = set()
    for name in header:
        if name in seen:
            raise DuplicateIdError(f"{path}: duplicate column '{name}'", identifier=name)
        seen.add(name)
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as exc:
        raise DataFormatError(str(exc), path=str(path)) from None


def read_matrix_csv(path: PathLike) -> Tuple[List[str], List[str], np.ndarray]:
    """
    Lee una matriz etiquetada: primera columna = ids de fila, resto de la
    cabecera = nombres de columna.

    Returns:
        (ids de fila, nombres de columna, matriz float)
    """
    table = read_table(path)
    if table.shape[1] < 1:
        raise DataFormatError("missing row identifier column", path=str(path), line=1)
    row_ids = [str(v) for v in table.iloc[:, 0].tolist()]
    columns = [str(c) for c in table.columns[1:]]
    values = np.empty((len(row_ids), len(columns)))
    for j, name in enumerate(columns):
        values[:, j] = _parse_column(table[name], str(path), name)
    return row_ids, columns, values


def write_matrix_csv(path: PathLike, row_ids: Sequence[str], columns: Sequence[str],
                     values: np.ndarray, index_label: str) -> None:
    """Escribe una matriz etiquetada con floats de ida y vuelta exacta"""
    text = [[format_float(v) for v in row] for row in np.asarray(values, dtype=float)]
    frame = pd.DataFrame(text, index=list(row_ids), columns=list(columns), dtype=object)
    frame.to_csv(path, index_label=index_label)


def parse_floats(table: pd.DataFrame, columns: Sequence[str], path: PathLike) -> np.ndarray:
    """Convierte las columnas indicadas de una tabla de texto a float"""
    missing = [c for c in columns if c not in table.columns]
    if missing:
        raise DataFormatError(f"missing column '{missing[0]}'", path=str(path), line=1)
    return np.column_stack([_parse_column(table[c], str(path), c) for c in columns])


class BaseRepository(ABC, Generic[T]):
    """
    Clase base para todos los repositorios.

    Cada repositorio traduce entre ficheros y entidades de dominio; los
    servicios nunca tocan el disco.
    """

    @abstractmethod
    def load(self, path: PathLike, **kwargs) -> T:
        """Lee una entidad de disco"""

    @abstractmethod
    def save(self, entity: T, path: PathLike, **kwargs) -> None:
        """Escribe una entidad en disco"""

    @staticmethod
    def require_file(path: PathLike) -> Path:
        """
        Comprueba que un fichero existe.

        Raises:
            DataFormatError: Si no existe
        """
        path = Path(path)
        if not path.is_file():
            raise DataFormatError("file not found", path=str(path))
        return path

    @staticmethod
    def ensure_parent(path: PathLike) -> Path:
        """Crea el directorio padre si hace falta"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path
