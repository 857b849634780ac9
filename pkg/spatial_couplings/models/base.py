"""
Utilidades compartidas por los modelos de dominio.
"""
from typing import Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import DuplicateIdError, InvalidInputError


def readonly(values, dtype=float) -> np.ndarray:
    """
    Copia un array y lo marca como de solo lectura.

    Args:
        values: Datos de entrada (cualquier cosa que acepte numpy)
        dtype: Tipo de destino

    Returns:
        Array inmutable
    """
    array = np.array(values, dtype=dtype, copy=True)
    array.flags.writeable = False
    return array


def identifiers(values: Sequence, kind: str) -> Tuple[str, ...]:
    """Normaliza una lista de identificadores y rechaza duplicados"""
    ids = tuple(str(v) for v in values)
    seen = set()
    for ident in ids:
        if ident in seen:
            raise DuplicateIdError(f"Duplicate {kind} identifier '{ident}'", identifier=ident)
        seen.add(ident)
    return ids


def require_finite(array: np.ndarray, what: str) -> None:
    """Lanza InvalidInputError si hay NaN o Inf"""
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{what} contains non-finite entries")
