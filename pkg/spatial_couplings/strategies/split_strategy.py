"""
Estrategias de partición de spots para el experimento de consistencia.

Cada estrategia devuelve parejas (nombre, índices_a, índices_b); se ajusta
un modelo por parte y se comparan los dos modelos de cada pareja.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError


@dataclass(frozen=True)
class SplitPair:
    """Dos conjuntos de spots a comparar"""
    name: str
    part_a: np.ndarray
    part_b: np.ndarray


class SplitStrategy(ABC):
    """Contrato de una estrategia de partición"""

    @abstractmethod
    def split(self, n_spots: int) -> List[SplitPair]:
        """
        Calcula las parejas de partes.

        Args:
            n_spots: Número total de spots

        Returns:
            Lista de SplitPair
        """

    @abstractmethod
    def get_strategy_name(self) -> str:
        """Retorna el nombre de la estrategia"""


class ParitySplitStrategy(SplitStrategy):
    """Spots de índice par frente a spots de índice impar"""

    def split(self, n_spots: int) -> List[SplitPair]:
        idx = np.arange(n_spots)
        return [SplitPair('even-vs-odd', idx[idx % 2 == 0], idx[idx % 2 == 1])]

    def get_strategy_name(self) -> str:
        return "ParitySplit"


class MaskSplitStrategy(SplitStrategy):
    """Dos máscaras booleanas dadas por el usuario (pueden solaparse)"""

    def __init__(self, mask_a: Sequence[bool], mask_b: Sequence[bool], name: str = 'mask-a-vs-mask-b'):
        self.mask_a = np.asarray(mask_a, dtype=bool)
        self.mask_b = np.asarray(mask_b, dtype=bool)
        self.name = name

    def split(self, n_spots: int) -> List[SplitPair]:
        if self.mask_a.shape != (n_spots,) or self.mask_b.shape != (n_spots,):
            raise DimensionMismatchError(f"Split masks must have length {n_spots}")
        return [SplitPair(self.name, np.flatnonzero(self.mask_a), np.flatnonzero(self.mask_b))]

    def get_strategy_name(self) -> str:
        return "MaskSplit"


class RandomSplitStrategy(SplitStrategy):
    """
    Mitades aleatorias con semilla.

    Con n_repeats > 1 devuelve una pareja por repetición (semilla seed + r);
    split_consistency agrupa todas las parejas en un único Mann-Whitney U.
    """

    def __init__(self, seed: int = 0, n_repeats: int = 1):
        if n_repeats < 1:
            raise InvalidInputError(f"n_repeats must be >= 1, got {n_repeats}")
        self.seed = seed
        self.n_repeats = n_repeats

    def split(self, n_spots: int) -> List[SplitPair]:
        half = n_spots // 2
        pairs = []
        for repeat in range(self.n_repeats):
            order = np.random.default_rng(self.seed + repeat).permutation(n_spots)
            name = 'random-halves' if self.n_repeats == 1 else f'random-halves-{repeat}'
            pairs.append(SplitPair(name, np.sort(order[:half]), np.sort(order[half:])))
        return pairs

    def get_strategy_name(self) -> str:
        return "RandomSplit"


class BySampleSplitStrategy(SplitStrategy):
    """
    Dejar-una-muestra-fuera: el modelo de cada muestra frente al modelo
    entrenado con todas las demás.
    """

    def __init__(self, sample_ids: Optional[Sequence[str]]):
        if sample_ids is None:
            raise InvalidInputError("by-sample splits need a sample id per spot")
        self.sample_ids = np.asarray([str(s) for s in sample_ids])

    def split(self, n_spots: int) -> List[SplitPair]:
        if self.sample_ids.shape != (n_spots,):
            raise DimensionMismatchError(f"Expected {n_spots} sample ids, got {self.sample_ids.size}")
        samples = list(dict.fromkeys(self.sample_ids.tolist()))
        if len(samples) < 2:
            raise InvalidInputError("by-sample splits need at least two samples")
        pairs = []
        for sample in samples:
            inside = self.sample_ids == sample
            pairs.append(SplitPair(f'{sample}-vs-rest', np.flatnonzero(inside), np.flatnonzero(~inside)))
        return pairs

    def get_strategy_name(self) -> str:
        return "BySampleSplit"
