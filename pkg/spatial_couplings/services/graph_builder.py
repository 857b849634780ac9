"""
Construcción de SpatialGraph a partir de coordenadas: grafos de radio y kNN,
capas de k saltos por BFS y grados medios.
"""
import logging
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.factories.strategy_factory import GraphStrategyFactory
from spatial_couplings.models.graph import (
    GraphConfig,
    GraphMethod,
    SpatialGraph,
    as_adjacency,
    check_symmetric_adjacency
)
from spatial_couplings.strategies.graph_strategy import check_coordinates

logger = logging.getLogger(__name__)


def grid_coordinates(side: int, spacing: float = 1.0) -> np.ndarray:
    """
    Retícula cuadrada side×side en orden fila-mayor.

    Returns:
        Coordenadas (side², 2); el spot i está en (i % side, i // side) * spacing
    """
    if side < 1:
        raise InvalidInputError("grid side must be >= 1")
    if not spacing > 0:
        raise InvalidInputError("grid spacing must be positive")
    index = np.arange(side * side)
    return np.column_stack([index % side, index // side]).astype(float) * spacing


def khop_shells(base, max_shell: int, coordinates: Optional[np.ndarray] = None) -> SpatialGraph:
    """
    Capas por distancia de grafo exacta: la capa k contiene {i, j} si el
    camino más corto entre ambos tiene longitud k.

    Args:
        base: Adyacencia base simétrica y sin diagonal
        max_shell: Número de capas K
        coordinates: Coordenadas a adjuntar al grafo (opcional)

    Returns:
        SpatialGraph con K capas disjuntas
    """
    if max_shell < 1:
        raise InvalidInputError("max_shell must be >= 1")
    base = as_adjacency(base)
    check_symmetric_adjacency(base, 'Base adjacency')
    n_spots = base.shape[0]

    shells = [base]
    reached = as_adjacency(sp.identity(n_spots, format='csr') + base, n_spots)
    frontier = base
    for _ in range(2, max_shell + 1):
        walk = as_adjacency(frontier @ base, n_spots)
        fresh = as_adjacency(walk - walk.multiply(reached), n_spots)
        shells.append(fresh)
        reached = as_adjacency(reached + fresh, n_spots)
        frontier = fresh
    return SpatialGraph(n_spots=n_spots, shells=tuple(shells), coordinates=coordinates)


def radius_graph(coords, radius: float, max_shell: int = 1) -> SpatialGraph:
    """
    Grafo de radio: arista {i, j} si 0 < d(i, j) < radius.

    Args:
        coords: Coordenadas S×2 (micrómetros)
        radius: Radio estricto
        max_shell: Número de capas

    Returns:
        SpatialGraph
    """
    coords = check_coordinates(coords)
    if coords.shape[0] < 1:
        raise InvalidInputError("A graph needs at least one spot")
    base = GraphStrategyFactory.create_strategy(GraphMethod.RADIUS, {'radius': radius}).build(coords)
    return khop_shells(base, max_shell, coordinates=coords)


def knn_graph(coords, k: int, max_shell: int = 1) -> SpatialGraph:
    """
    Grafo de k vecinos más cercanos simetrizado por unión.

    Raises:
        InvalidInputError: Si k < 1 o k >= S
    """
    coords = check_coordinates(coords)
    base = GraphStrategyFactory.create_strategy(GraphMethod.KNN, {'k': k}).build(coords)
    return khop_shells(base, max_shell, coordinates=coords)


def build_graph(coords, config: GraphConfig) -> SpatialGraph:
    """Construye el grafo según la configuración (método + capas)"""
    coords = check_coordinates(coords)
    strategy = GraphStrategyFactory.create_strategy(
        config.method, {'radius': config.radius, 'k': config.k}
    )
    logger.info(
        "Building %s graph over %d spots (%d shells)",
        strategy.get_strategy_name(), coords.shape[0], config.max_shell
    )
    return khop_shells(strategy.build(coords), config.max_shell, coordinates=coords)


def mean_degree(shell) -> float:
    """Grado medio Σ_i grado(i) / S (0 para un grafo sin spots)"""
    adjacency = as_adjacency(shell)
    n_spots = adjacency.shape[0]
    if n_spots == 0:
        return 0.0
    return float(adjacency.nnz) / n_spots


def mean_degrees(graph: SpatialGraph) -> tuple:
    """Grado medio de cada capa"""
    return tuple(mean_degree(shell) for shell in graph.shells)


def induced_subgraph(graph: SpatialGraph, indices: Sequence[int]) -> SpatialGraph:
    """
    Subgrafo inducido sobre los spots dados (en ese orden). La capa 1 se
    restringe; las capas superiores se recalculan por BFS sobre ella.
    """
    idx = np.asarray(indices, dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= graph.n_spots):
        raise DimensionMismatchError("Subgraph indices out of range")
    base = graph.base[idx][:, idx]
    coords = None if graph.coordinates is None else graph.coordinates[idx]
    return khop_shells(base, graph.n_shells, coordinates=coords)


def block_diagonal(graphs: Sequence[SpatialGraph]) -> SpatialGraph:
    """
    Unión disjunta de grafos (una muestra por bloque, sin aristas entre muestras).
    """
    graphs = list(graphs)
    if not graphs:
        raise InvalidInputError("block_diagonal needs at least one graph")
    n_shells = graphs[0].n_shells
    if any(g.n_shells != n_shells for g in graphs):
        raise DimensionMismatchError("All graphs must have the same number of shells")

    shells = tuple(
        sp.block_diag([g.shells[k] for g in graphs], format='csr') for k in range(n_shells)
    )
    coordinates = None
    if all(g.coordinates is not None for g in graphs):
        coordinates = np.vstack([g.coordinates for g in graphs])
    return SpatialGraph(
        n_spots=sum(g.n_spots for g in graphs),
        shells=shells,
        coordinates=coordinates
    )
