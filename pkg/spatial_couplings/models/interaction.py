"""
Modelos de dominio para las matrices de interacción y sus estadísticos
suficientes.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.base import identifiers, readonly, require_finite

SYMMETRY_TOLERANCE = 1e-12


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """(M + Mᵀ) / 2"""
    matrix = np.asarray(matrix, dtype=float)
    return (matrix + matrix.T) / 2.0


def _square(matrix, n: int, what: str) -> np.ndarray:
    array = np.asarray(matrix, dtype=float)
    if array.shape != (n, n):
        raise DimensionMismatchError(f"{what} has shape {array.shape}, expected ({n}, {n})")
    require_finite(array, what)
    return array


@dataclass(frozen=True)
class InteractionModel:
    """
    Acoplamientos gen-gen intra-celulares (g') e inter-celulares por capa (g^(k)).

    La simetría se impone al construir: cada matriz se guarda como (M + Mᵀ)/2.

    Attributes:
        g_intra: Matriz N×N simétrica g'
        g_shells: K matrices N×N simétricas g^(k)
        q_shells: Grado medio de cada capa (K reales no negativos)
        gene_names: N nombres de gen
    """
    g_intra: np.ndarray
    g_shells: Tuple[np.ndarray, ...]
    q_shells: Tuple[float, ...]
    gene_names: Tuple[str, ...]

    def __post_init__(self):
        gene_names = identifiers(self.gene_names, 'gene')
        n = len(gene_names)

        g_intra = readonly(symmetrize(_square(self.g_intra, n, 'g_intra')))
        g_shells = tuple(
            readonly(symmetrize(_square(g, n, f'g_shell{k}')))
            for k, g in enumerate(self.g_shells, start=1)
        )
        q_shells = tuple(float(q) for q in self.q_shells)

        if len(g_shells) != len(q_shells):
            raise DimensionMismatchError(
                f"{len(g_shells)} shell matrices but {len(q_shells)} mean degrees"
            )
        if len(g_shells) == 0:
            raise InvalidInputError("An interaction model needs at least one shell")
        if any(not np.isfinite(q) or q < 0 for q in q_shells):
            raise InvalidInputError("Mean shell degrees must be finite and nonnegative")

        object.__setattr__(self, 'g_intra', g_intra)
        object.__setattr__(self, 'g_shells', g_shells)
        object.__setattr__(self, 'q_shells', q_shells)
        object.__setattr__(self, 'gene_names', gene_names)

    @property
    def n_genes(self) -> int:
        return len(self.gene_names)

    @property
    def n_shells(self) -> int:
        return len(self.g_shells)

    @staticmethod
    def zeros(gene_names: Sequence[str], q_shells: Sequence[float]) -> 'InteractionModel':
        """Modelo con todos los acoplamientos a cero"""
        n = len(gene_names)
        return InteractionModel(
            g_intra=np.zeros((n, n)),
            g_shells=tuple(np.zeros((n, n)) for _ in q_shells),
            q_shells=tuple(q_shells),
            gene_names=tuple(gene_names)
        )

    def replace(
        self,
        g_intra: Optional[np.ndarray] = None,
        g_shells: Optional[Sequence[np.ndarray]] = None,
        q_shells: Optional[Sequence[float]] = None
    ) -> 'InteractionModel':
        """Copia con los campos indicados sustituidos"""
        return InteractionModel(
            g_intra=self.g_intra if g_intra is None else g_intra,
            g_shells=self.g_shells if g_shells is None else tuple(g_shells),
            q_shells=self.q_shells if q_shells is None else tuple(q_shells),
            gene_names=self.gene_names
        )

    def flatten_shells(self) -> np.ndarray:
        """Triángulo superior (con diagonal) de cada g^(k), concatenado"""
        upper = np.triu_indices(self.n_genes)
        return np.concatenate([g[upper] for g in self.g_shells])

    def flatten_intra(self) -> np.ndarray:
        """Triángulo superior (con diagonal) de g'"""
        return self.g_intra[np.triu_indices(self.n_genes)]

    def is_symmetric(self, tolerance: float = SYMMETRY_TOLERANCE) -> bool:
        """Comprueba la simetría de todas las matrices"""
        return all(
            np.max(np.abs(g - g.T), initial=0.0) <= tolerance
            for g in (self.g_intra,) + self.g_shells
        )


@dataclass(frozen=True)
class SufficientStatistics:
    """
    Estadísticos suficientes de una matriz de expresión sobre un grafo.

    Attributes:
        c_intra: C' = sᵀs (N×N)
        c_shells: C^(k) = sᵀJ^(k)s, una por capa
        m: Media por gen (longitud N)
        n_spots: Número de spots S
    """
    c_intra: np.ndarray
    c_shells: Tuple[np.ndarray, ...]
    m: np.ndarray
    n_spots: int

    def __post_init__(self):
        m = readonly(self.m)
        if m.ndim != 1:
            raise DimensionMismatchError("m must be a vector")
        n = m.shape[0]
        require_finite(m, 'Mean vector')
        c_intra = readonly(_square(self.c_intra, n, 'c_intra'))
        c_shells = tuple(
            readonly(_square(c, n, f'c_shell{k}')) for k, c in enumerate(self.c_shells, start=1)
        )
        if self.n_spots < 1:
            raise InvalidInputError("n_spots must be >= 1")

        object.__setattr__(self, 'c_intra', c_intra)
        object.__setattr__(self, 'c_shells', c_shells)
        object.__setattr__(self, 'm', m)
        object.__setattr__(self, 'n_spots', int(self.n_spots))

    @property
    def n_genes(self) -> int:
        return self.m.shape[0]

    @property
    def n_shells(self) -> int:
        return len(self.c_shells)
