"""
Pipeline de normalización de conteos y filtros de datasets.

Orden fijo: filtro de genes -> CPM -> log1p -> proyección a la esfera.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import GeneNotFoundError, InvalidInputError, ProjectionError
from spatial_couplings.models.expression import GeneExpressionMatrix, NormalizationConfig, RawDataset

logger = logging.getLogger(__name__)

CPM_TARGET = 1e6


def normalize(raw: RawDataset, config: NormalizationConfig = None) -> GeneExpressionMatrix:
    """
    Normaliza un dataset crudo.

    Args:
        raw: Conteos crudos
        config: Pasos a aplicar

    Returns:
        GeneExpressionMatrix con la procedencia de cada paso

    Raises:
        InvalidInputError: Si el filtro elimina todos los genes
        ProjectionError: Si un spot es todo ceros y se proyecta a la esfera
    """
    config = config or NormalizationConfig()
    provenance = []

    detected = np.sum(raw.counts > 0, axis=0)
    keep = detected >= config.min_cells_per_gene
    if not np.any(keep):
        raise InvalidInputError(
            f"All {raw.counts.shape[1]} genes detected in fewer than "
            f"{config.min_cells_per_gene} spots"
        )
    values = np.array(raw.counts[:, keep], dtype=float)
    gene_names = [g for g, k in zip(raw.gene_names, keep) if k]
    dropped = int(np.sum(~keep))
    provenance.append(f'filter_genes(min_cells={config.min_cells_per_gene},dropped={dropped})')
    if dropped:
        logger.info("Dropped %d genes detected in fewer than %d spots", dropped, config.min_cells_per_gene)

    if config.cpm:
        totals = values.sum(axis=1)
        zero_rows = totals == 0
        values = np.divide(values * CPM_TARGET, totals[:, None],
                           out=np.zeros_like(values), where=~zero_rows[:, None])
        provenance.append(f'cpm(target=1e6,zero_spots={int(zero_rows.sum())})')
        if np.any(zero_rows):
            logger.warning("%d spots have no counts after gene filtering", int(zero_rows.sum()))

    if config.log1p:
        values = np.log1p(values)
        provenance.append('log1p')

    if config.sphere_project:
        norms = np.linalg.norm(values, axis=1)
        zero = np.flatnonzero(norms == 0)
        if zero.size:
            spot = raw.spot_ids[zero[0]]
            raise ProjectionError(
                f"Spot '{spot}' is all zeros and cannot be projected to the unit sphere", spot_id=spot
            )
        values = values / norms[:, None]
        provenance.append('sphere')

    return GeneExpressionMatrix(
        values=values,
        spot_ids=raw.spot_ids,
        gene_names=gene_names,
        sphere_normalized=config.sphere_project,
        provenance=tuple(provenance)
    )


def crop(raw: RawDataset, x_range: Tuple[Optional[float], Optional[float]] = (None, None),
         y_range: Tuple[Optional[float], Optional[float]] = (None, None)) -> RawDataset:
    """
    Conserva los spots estrictamente dentro de la caja (límites None = abiertos).

    Raises:
        InvalidInputError: Si el dataset no tiene coordenadas o la caja queda vacía
    """
    if all(v is None for v in tuple(x_range) + tuple(y_range)):
        return raw
    if raw.coordinates is None:
        raise InvalidInputError("Cropping needs spot coordinates")
    x, y = raw.coordinates[:, 0], raw.coordinates[:, 1]
    keep = np.ones(raw.n_spots, dtype=bool)
    for values, (low, high) in ((x, x_range), (y, y_range)):
        if low is not None:
            keep &= values > low
        if high is not None:
            keep &= values < high
    if not np.any(keep):
        raise InvalidInputError("No spots left inside the bounding box")
    logger.info("Cropped %d of %d spots", int(keep.sum()), raw.n_spots)
    return raw.take_spots(keep)


def subset_genes(raw: RawDataset, genes: Sequence[str]) -> RawDataset:
    """
    Restringe el dataset a un panel de genes, en el orden dado.

    Raises:
        GeneNotFoundError: Si falta algún gen
    """
    position = {g: i for i, g in enumerate(raw.gene_names)}
    missing = [g for g in genes if g not in position]
    if missing:
        raise GeneNotFoundError(missing[0])
    idx = [position[g] for g in genes]
    return RawDataset(
        counts=raw.counts[:, idx],
        spot_ids=raw.spot_ids,
        gene_names=list(genes),
        coordinates=raw.coordinates,
        sample_ids=raw.sample_ids
    )


def project_to_sphere(expr: GeneExpressionMatrix) -> GeneExpressionMatrix:
    """Divide cada fila por su norma L2; sobre filas ya unitarias no cambia nada apreciable"""
    norms = np.linalg.norm(expr.values, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        spot = expr.spot_ids[zero[0]]
        raise ProjectionError(
            f"Spot '{spot}' is all zeros and cannot be projected to the unit sphere", spot_id=spot
        )
    return expr.with_values(expr.values / norms[:, None], step='sphere', sphere_normalized=True)
