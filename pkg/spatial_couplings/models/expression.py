"""
Modelos de dominio para matrices de expresión génica.
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import (
    DimensionMismatchError,
    GeneNotFoundError,
    IdMismatchError,
    InvalidInputError
)
from spatial_couplings.models.base import identifiers, readonly, require_finite

SPHERE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GeneExpressionMatrix:
    """
    Matriz S×N de expresión (normalizada) con identidades de spot y de gen.

    Attributes:
        values: Matriz S×N de valores finitos
        spot_ids: S identificadores de spot
        gene_names: N nombres de gen
        sphere_normalized: Si cada fila tiene norma L2 unidad
        provenance: Pasos de normalización aplicados, en orden
    """
    values: np.ndarray
    spot_ids: Tuple[str, ...]
    gene_names: Tuple[str, ...]
    sphere_normalized: bool = False
    provenance: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        values = readonly(self.values)
        if values.ndim != 2:
            raise DimensionMismatchError(f"Expression values must be 2-D, got shape {values.shape}")
        require_finite(values, 'Expression matrix')

        spot_ids = identifiers(self.spot_ids, 'spot')
        gene_names = identifiers(self.gene_names, 'gene')
        if values.shape != (len(spot_ids), len(gene_names)):
            raise DimensionMismatchError(
                f"Expression shape {values.shape} does not match "
                f"{len(spot_ids)} spot ids x {len(gene_names)} gene names"
            )

        if self.sphere_normalized and values.shape[0] > 0:
            norms = np.linalg.norm(values, axis=1)
            worst = int(np.argmax(np.abs(norms - 1.0)))
            if abs(norms[worst] - 1.0) > SPHERE_TOLERANCE:
                raise InvalidInputError(
                    f"Spot '{spot_ids[worst]}' has L2 norm {norms[worst]!r}, "
                    "expected 1 for a sphere-normalized matrix"
                )

        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'spot_ids', spot_ids)
        object.__setattr__(self, 'gene_names', gene_names)
        object.__setattr__(self, 'sphere_normalized', bool(self.sphere_normalized))
        object.__setattr__(self, 'provenance', tuple(self.provenance))

    @property
    def n_spots(self) -> int:
        return self.values.shape[0]

    @property
    def n_genes(self) -> int:
        return self.values.shape[1]

    def gene_index(self, gene: str) -> int:
        """
        Devuelve la columna de un gen.

        Raises:
            GeneNotFoundError: Si el gen no está en el panel
        """
        try:
            return self.gene_names.index(gene)
        except ValueError:
            raise GeneNotFoundError(gene) from None

    def spot_index(self, spot_id: str) -> int:
        """Devuelve la fila de un spot"""
        try:
            return self.spot_ids.index(str(spot_id))
        except ValueError:
            raise IdMismatchError(f"Spot '{spot_id}' not found", identifier=str(spot_id)) from None

    def take_spots(self, indices: Sequence[int]) -> 'GeneExpressionMatrix':
        """Submatriz con las filas indicadas (en ese orden)"""
        idx = np.asarray(indices, dtype=int)
        return GeneExpressionMatrix(
            values=self.values[idx],
            spot_ids=[self.spot_ids[i] for i in idx],
            gene_names=self.gene_names,
            sphere_normalized=self.sphere_normalized,
            provenance=self.provenance
        )

    def with_values(self, values: np.ndarray, step: Optional[str] = None,
                    sphere_normalized: Optional[bool] = None) -> 'GeneExpressionMatrix':
        """Copia con otros valores, mismas identidades"""
        provenance = self.provenance + ((step,) if step else ())
        return GeneExpressionMatrix(
            values=values,
            spot_ids=self.spot_ids,
            gene_names=self.gene_names,
            sphere_normalized=self.sphere_normalized if sphere_normalized is None else sphere_normalized,
            provenance=provenance
        )


@dataclass(frozen=True)
class RawDataset:
    """
    Conteos crudos tal como se leen de disco.

    Attributes:
        counts: Matriz S×N no negativa y finita
        spot_ids: S identificadores de spot
        gene_names: N nombres de gen
        coordinates: Coordenadas S×2 en micrómetros (opcional)
        sample_ids: Muestra de origen de cada spot (opcional)
    """
    counts: np.ndarray
    spot_ids: Tuple[str, ...]
    gene_names: Tuple[str, ...]
    coordinates: Optional[np.ndarray] = None
    sample_ids: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        counts = readonly(self.counts)
        if counts.ndim != 2:
            raise DimensionMismatchError(f"Counts must be 2-D, got shape {counts.shape}")
        require_finite(counts, 'Counts matrix')
        if np.any(counts < 0):
            raise InvalidInputError("Counts matrix contains negative entries")

        spot_ids = identifiers(self.spot_ids, 'spot')
        gene_names = identifiers(self.gene_names, 'gene')
        if counts.shape != (len(spot_ids), len(gene_names)):
            raise DimensionMismatchError(
                f"Counts shape {counts.shape} does not match "
                f"{len(spot_ids)} spot ids x {len(gene_names)} gene names"
            )

        coordinates = None
        if self.coordinates is not None:
            coordinates = readonly(self.coordinates)
            if coordinates.shape != (len(spot_ids), 2):
                raise DimensionMismatchError(
                    f"Coordinates shape {coordinates.shape} does not match {len(spot_ids)} spots"
                )
            require_finite(coordinates, 'Coordinates')

        sample_ids = None
        if self.sample_ids is not None:
            sample_ids = tuple(str(s) for s in self.sample_ids)
            if len(sample_ids) != len(spot_ids):
                raise DimensionMismatchError("sample_ids must have one entry per spot")

        object.__setattr__(self, 'counts', counts)
        object.__setattr__(self, 'spot_ids', spot_ids)
        object.__setattr__(self, 'gene_names', gene_names)
        object.__setattr__(self, 'coordinates', coordinates)
        object.__setattr__(self, 'sample_ids', sample_ids)

    @property
    def n_spots(self) -> int:
        return self.counts.shape[0]

    def take_spots(self, mask_or_indices) -> 'RawDataset':
        """Subconjunto de spots (máscara booleana o índices)"""
        idx = np.asarray(mask_or_indices)
        idx = np.flatnonzero(idx) if idx.dtype == bool else idx.astype(int)
        return RawDataset(
            counts=self.counts[idx],
            spot_ids=[self.spot_ids[i] for i in idx],
            gene_names=self.gene_names,
            coordinates=None if self.coordinates is None else self.coordinates[idx],
            sample_ids=None if self.sample_ids is None else [self.sample_ids[i] for i in idx]
        )


@dataclass(frozen=True)
class NormalizationConfig:
    """
    Pasos del pipeline de normalización.

    Attributes:
        cpm: Escalar cada fila a 10^6
        log1p: Transformación log(1+x) en base e
        min_cells_per_gene: Mínimo de spots con detección para conservar un gen
        sphere_project: Dividir cada fila por su norma L2
    """
    cpm: bool = True
    log1p: bool = True
    min_cells_per_gene: int = 100
    sphere_project: bool = True

    def __post_init__(self):
        if self.min_cells_per_gene < 0:
            raise InvalidInputError("min_cells_per_gene must be >= 0")

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'cpm': self.cpm,
            'log1p': self.log1p,
            'min_cells_per_gene': self.min_cells_per_gene,
            'sphere_project': self.sphere_project
        }
