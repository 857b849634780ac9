"""
Modelos de dominio para el grafo espacial entre spots.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.base import readonly, require_finite


class GraphMethod(Enum):
    """Constructores de grafo soportados"""
    RADIUS = "radius"
    KNN = "knn"


def as_adjacency(matrix, n_spots: Optional[int] = None) -> sp.csr_matrix:
    """
    Convierte una matriz densa o dispersa en adyacencia binaria CSR (float64).

    Args:
        matrix: Matriz S×S
        n_spots: Tamaño esperado (opcional)

    Returns:
        Copia CSR con unos en las aristas
    """
    adjacency = sp.csr_matrix(matrix, dtype=float, copy=True)
    adjacency.eliminate_zeros()
    adjacency.data[:] = 1.0
    adjacency.sort_indices()
    rows, cols = adjacency.shape
    if rows != cols:
        raise DimensionMismatchError(f"Adjacency must be square, got {adjacency.shape}")
    if n_spots is not None and rows != n_spots:
        raise DimensionMismatchError(f"Adjacency has {rows} rows, expected {n_spots}")
    return adjacency


def check_symmetric_adjacency(adjacency: sp.csr_matrix, what: str) -> None:
    """Lanza InvalidInputError si no es simétrica o tiene diagonal no nula"""
    if (adjacency != adjacency.T).nnz != 0:
        raise InvalidInputError(f"{what} is not symmetric")
    if np.any(adjacency.diagonal() != 0):
        raise InvalidInputError(f"{what} has self-loops")


@dataclass(frozen=True)
class SpatialGraph:
    """
    Capas (shells) de adyacencia por distancia de grafo entre spots.

    Attributes:
        n_spots: Número de spots S
        shells: K matrices S×S binarias y simétricas; la capa k contiene los
            pares a distancia de grafo exactamente k
        coordinates: Coordenadas S×2 en micrómetros (opcional)
    """
    n_spots: int
    shells: Tuple[sp.csr_matrix, ...]
    coordinates: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.n_spots < 0:
            raise InvalidInputError("n_spots must be >= 0")
        if len(self.shells) == 0:
            raise InvalidInputError("A spatial graph needs at least one shell")

        shells = []
        for k, shell in enumerate(self.shells, start=1):
            adjacency = as_adjacency(shell, self.n_spots)
            check_symmetric_adjacency(adjacency, f"Shell {k}")
            adjacency.data.flags.writeable = False
            shells.append(adjacency)

        for k in range(len(shells)):
            for l in range(k + 1, len(shells)):
                if shells[k].multiply(shells[l]).nnz != 0:
                    raise InvalidInputError(f"Shells {k + 1} and {l + 1} share spot pairs")

        coordinates = None
        if self.coordinates is not None:
            coordinates = readonly(self.coordinates)
            if coordinates.shape != (self.n_spots, 2):
                raise DimensionMismatchError(
                    f"Coordinates shape {coordinates.shape} does not match {self.n_spots} spots"
                )
            require_finite(coordinates, 'Coordinates')

        object.__setattr__(self, 'shells', tuple(shells))
        object.__setattr__(self, 'coordinates', coordinates)

    @property
    def n_shells(self) -> int:
        return len(self.shells)

    @property
    def base(self) -> sp.csr_matrix:
        """Adyacencia base (capa 1)"""
        return self.shells[0]

    def edges(self, shell: int = 1) -> Sequence[Tuple[int, int]]:
        """Aristas {i<j} de una capa, ordenadas"""
        upper = sp.triu(self.shells[shell - 1], k=1).tocoo()
        return sorted(zip(upper.row.tolist(), upper.col.tolist()))


@dataclass(frozen=True)
class GraphConfig:
    """
    Configuración del constructor de grafo.

    Attributes:
        method: RADIUS o KNN
        radius: Radio en micrómetros (modo RADIUS)
        k: Número de vecinos (modo KNN)
        max_shell: Número de capas K
    """
    method: GraphMethod = GraphMethod.RADIUS
    radius: Optional[float] = None
    k: Optional[int] = None
    max_shell: int = 1

    def __post_init__(self):
        method = GraphMethod(self.method)
        object.__setattr__(self, 'method', method)
        if method == GraphMethod.RADIUS:
            if self.radius is None or self.k is not None:
                raise InvalidInputError("Radius graphs take a radius and no k")
            if not self.radius > 0:
                raise InvalidInputError("radius must be positive")
        else:
            if self.k is None or self.radius is not None:
                raise InvalidInputError("kNN graphs take k and no radius")
            if self.k < 1:
                raise InvalidInputError("k must be >= 1")
        if self.max_shell < 1:
            raise InvalidInputError("max_shell must be >= 1")

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'method': self.method.value,
            'radius': self.radius,
            'k': self.k,
            'max_shell': self.max_shell
        }
