"""
Estrategias de inicialización de las matrices de acoplamiento.
"""
from abc import ABC, abstractmethod
from typing import List, Tuple

import numpy as np

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.interaction import symmetrize


class InitStrategy(ABC):
    """Contrato de una inicialización de (g', [g^(k)])"""

    @abstractmethod
    def initialize(self, n_genes: int, n_shells: int, seed: int) -> Tuple[np.ndarray, List[np.ndarray]]:
        """
        Genera las matrices iniciales.

        Args:
            n_genes: Número de genes N
            n_shells: Número de capas K
            seed: Semilla

        Returns:
            (g_intra, [g_shell1, ..., g_shellK])
        """

    @abstractmethod
    def get_strategy_name(self) -> str:
        """Retorna el nombre de la estrategia"""


class ZerosInitStrategy(InitStrategy):
    """Todas las matrices a cero"""

    def initialize(self, n_genes, n_shells, seed):
        return np.zeros((n_genes, n_genes)), [np.zeros((n_genes, n_genes)) for _ in range(n_shells)]

    def get_strategy_name(self) -> str:
        return "ZerosInit"


class UniformInitStrategy(InitStrategy):
    """
    Entradas i.i.d. uniformes en (-a, a), simetrizadas como (M + Mᵀ)/2.
    Se sortea primero g' y después cada capa en orden.
    """

    def __init__(self, scale: float = 0.1):
        if scale < 0:
            raise InvalidInputError("init scale must be >= 0")
        self.scale = float(scale)

    def initialize(self, n_genes, n_shells, seed):
        rng = np.random.default_rng(seed)
        shape = (n_genes, n_genes)
        g_intra = symmetrize(rng.uniform(-self.scale, self.scale, size=shape))
        g_shells = [symmetrize(rng.uniform(-self.scale, self.scale, size=shape)) for _ in range(n_shells)]
        return g_intra, g_shells

    def get_strategy_name(self) -> str:
        return "UniformInit"
