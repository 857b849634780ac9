"""
Implementación del patrón Strategy para la construcción del grafo base.
Cada estrategia convierte coordenadas S×2 en una adyacencia binaria simétrica.
"""
import logging
from abc import ABC, abstractmethod

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.base import require_finite

logger = logging.getLogger(__name__)


def check_coordinates(coords) -> np.ndarray:
    """Valida una matriz de coordenadas S×2 finita"""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise DimensionMismatchError(f"Coordinates must be S x 2, got shape {coords.shape}")
    require_finite(coords, 'Coordinates')
    return coords


def _symmetric_adjacency(rows: np.ndarray, cols: np.ndarray, n_spots: int) -> sp.csr_matrix:
    data = np.ones(2 * rows.size)
    adjacency = sp.coo_matrix(
        (data, (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n_spots, n_spots)
    ).tocsr()
    adjacency.data[:] = 1.0
    adjacency.sort_indices()
    return adjacency


class GraphStrategy(ABC):
    """
    Interfaz para los constructores de grafo.
    Define el contrato que todas las estrategias deben cumplir.
    """

    @abstractmethod
    def build(self, coords: np.ndarray) -> sp.csr_matrix:
        """
        Construye la adyacencia base.

        Args:
            coords: Coordenadas S×2

        Returns:
            Adyacencia CSR binaria, simétrica y sin diagonal
        """

    @abstractmethod
    def get_strategy_name(self) -> str:
        """Retorna el nombre de la estrategia"""


class RadiusGraphStrategy(GraphStrategy):
    """
    Une dos spots si 0 < distancia < radio. Los spots coincidentes no se unen.
    """

    def __init__(self, radius: float):
        if radius is None or not radius > 0:
            raise InvalidInputError(f"radius must be positive, got {radius!r}")
        self.radius = float(radius)

    def build(self, coords: np.ndarray) -> sp.csr_matrix:
        coords = check_coordinates(coords)
        n_spots = coords.shape[0]
        if n_spots == 0:
            return sp.csr_matrix((0, 0))
        tree = cKDTree(coords)
        pairs = tree.query_pairs(self.radius, output_type='ndarray')
        if pairs.size:
            dist = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1)
            pairs = pairs[(dist > 0.0) & (dist < self.radius)]
        else:
            pairs = np.zeros((0, 2), dtype=int)
        logger.debug("Radius graph: %d spots, %d edges (r=%g)", n_spots, len(pairs), self.radius)
        return _symmetric_adjacency(pairs[:, 0], pairs[:, 1], n_spots)

    def get_strategy_name(self) -> str:
        return "RadiusGraph"


class KnnGraphStrategy(GraphStrategy):
    """
    k vecinos más cercanos con un cKDTree, simetrizado por unión.
    Los empates de distancia se resuelven por el índice de spot menor.
    """

    def __init__(self, k: int):
        if k is None or int(k) < 1:
            raise InvalidInputError(f"k must be >= 1, got {k!r}")
        self.k = int(k)

    def build(self, coords: np.ndarray) -> sp.csr_matrix:
        coords = check_coordinates(coords)
        n_spots = coords.shape[0]
        if self.k >= n_spots:
            raise InvalidInputError(f"k = {self.k} requires more than {n_spots} spots")

        tree = cKDTree(coords)
        # el propio spot ocupa una de las k + 1 posiciones: la última es el k-ésimo vecino
        distances, _ = tree.query(coords, k=self.k + 1)
        radii = distances[:, self.k] * (1.0 + 1e-9) + 1e-12

        rows, cols = [], []
        for spot, candidates in enumerate(tree.query_ball_point(coords, radii)):
            candidates = np.asarray(candidates, dtype=int)
            candidates = candidates[candidates != spot]
            dist = np.linalg.norm(coords[candidates] - coords[spot], axis=1)
            # a igual distancia gana el índice menor
            nearest = candidates[np.lexsort((candidates, dist))[:self.k]]
            rows.append(np.full(nearest.size, spot))
            cols.append(nearest)
        rows = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
        cols = np.concatenate(cols) if cols else np.zeros(0, dtype=int)
        logger.debug("kNN graph: %d spots, k=%d", n_spots, self.k)
        return _symmetric_adjacency(rows, cols, n_spots)

    def get_strategy_name(self) -> str:
        return "KnnGraph"
