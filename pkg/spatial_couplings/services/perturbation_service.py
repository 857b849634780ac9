"""
Flujo contrafactual: knockout de un gen en un spot, relajación del tejido
con el motor de generación, clasificación en capas de vecinos, scores de
firma, deltas de expresión y rankings de genes para validación.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from spatial_couplings.exceptions import (
    DegenerateStatisticError,
    DimensionMismatchError,
    IdMismatchError,
    InvalidInputError
)
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import FreezeMask, GenerateConfig
from spatial_couplings.models.graph import SpatialGraph
from spatial_couplings.models.interaction import InteractionModel
from spatial_couplings.models.perturbation import (
    PERTURBED,
    UNPERTURBED,
    GeneRanking,
    PerturbationResult,
    PerturbationSpec,
    ShellClassification,
    neighbor_label
)
from spatial_couplings.models.reports import NullSummary, TestResult
from spatial_couplings.observers.trace_observers import SignatureScoreRecorder
from spatial_couplings.services.generation_service import GenerationService
from spatial_couplings.services.stats import mann_whitney_u, permutation_null, spearman
from spatial_couplings.strategies.graph_strategy import check_coordinates

logger = logging.getLogger(__name__)

DEFAULT_RADII = (15.0, 30.0)
DEFAULT_SIGNATURE_TOP = 25

Groups = Union[str, Sequence[str]]


def neighbor_shells_by_distance(coords, center: int, radii: Sequence[float]) -> ShellClassification:
    """
    Clasifica los spots por distancia euclídea al centro.

    La capa 1 son los spots con distancia en (0, radii[0]); la capa j los de
    [radii[j-1], radii[j]). El centro es 'perturbed' y el resto 'unperturbed'.

    Raises:
        InvalidInputError: Si los radios no son positivos y estrictamente crecientes
    """
    coords = check_coordinates(coords)
    radii = tuple(float(r) for r in radii)
    if not radii or radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidInputError(f"Radii must be positive and strictly increasing, got {radii}")
    if not 0 <= center < coords.shape[0]:
        raise InvalidInputError(f"Center index {center} out of range")

    distance = np.linalg.norm(coords - coords[center], axis=1)
    labels = np.full(coords.shape[0], UNPERTURBED, dtype=object)
    lower = 0.0
    for j, upper in enumerate(radii, start=1):
        inside = (distance >= lower) & (distance < upper) & (distance > 0.0)
        labels[inside] = neighbor_label(j)
        lower = upper
    labels[center] = PERTURBED
    return ShellClassification(labels=tuple(labels.tolist()), center=int(center), radii=radii)


def derive_signature(expr: GeneExpressionMatrix, marker_gene: str, top_n: int = DEFAULT_SIGNATURE_TOP) -> Tuple[str, ...]:
    """
    Genes más asociados a un marcador: media en spots marker-positivos
    (valor > 0) menos media en spots con marcador a cero, orden descendente,
    empates por índice de gen, marcador excluido.

    Raises:
        DegenerateStatisticError: Si no hay spots positivos o no hay spots a cero
    """
    marker = expr.gene_index(marker_gene)
    if not 1 <= top_n < expr.n_genes:
        raise InvalidInputError(f"top_n must lie in [1, {expr.n_genes - 1}], got {top_n}")
    positive = expr.values[:, marker] > 0
    if not np.any(positive):
        raise DegenerateStatisticError(f"No spot expresses the marker '{marker_gene}'")
    if np.all(positive):
        raise DegenerateStatisticError(f"Every spot expresses the marker '{marker_gene}'")

    difference = expr.values[positive].mean(axis=0) - expr.values[~positive].mean(axis=0)
    order = np.lexsort((np.arange(expr.n_genes), -difference))
    genes = [expr.gene_names[i] for i in order if i != marker]
    return tuple(genes[:top_n])


def signature_score(expr: GeneExpressionMatrix, gene_set: Sequence[str]) -> np.ndarray:
    """Media por spot de la expresión de los genes de la firma"""
    if len(gene_set) == 0:
        raise InvalidInputError("Signature gene set is empty")
    idx = [expr.gene_index(g) for g in gene_set]
    return expr.values[:, idx].mean(axis=1)


def select_target(expr: GeneExpressionMatrix, spec: PerturbationSpec) -> int:
    """
    Spot a perturbar: el explícito (que debe expresar el gen) o uno positivo
    elegido al azar con la semilla de la especificación.
    """
    gene = expr.gene_index(spec.gene)
    if spec.target is not None:
        target = expr.spot_index(spec.target)
        if not expr.values[target, gene] > 0:
            raise InvalidInputError(
                f"Spot '{spec.target}' does not express '{spec.gene}' (value {expr.values[target, gene]!r})"
            )
        return target
    positive = np.flatnonzero(expr.values[:, gene] > 0)
    if positive.size == 0:
        raise InvalidInputError(f"No spot expresses '{spec.gene}'")
    return int(positive[np.random.default_rng(spec.seed).integers(positive.size)])


def exclude_near(coords, exclusion_indices: Sequence[int], distance: float) -> np.ndarray:
    """
    Máscara de spots a conservar: se descartan los que quedan estrictamente
    a menos de `distance` de algún spot de la lista de exclusión.
    """
    coords = check_coordinates(coords)
    exclusion = np.asarray(exclusion_indices, dtype=int)
    if exclusion.size == 0:
        return np.ones(coords.shape[0], dtype=bool)
    nearest, _ = cKDTree(coords[exclusion]).query(coords, k=1)
    return ~(nearest < distance)


def _members(shells: ShellClassification, groups: Groups) -> np.ndarray:
    idx = shells.members_of(groups)
    if idx.size == 0:
        raise DegenerateStatisticError(f"Spot group {groups!r} is empty")
    return idx


def _ranking(scores: np.ndarray, gene_names: Sequence[str]) -> GeneRanking:
    order = np.lexsort((np.arange(scores.size), -scores))
    return GeneRanking(genes=[gene_names[i] for i in order], scores=scores[order])


def delta_rankings(result: PerturbationResult, group_a: Groups, group_b: Groups) -> GeneRanking:
    """
    Por gen: media del delta en group_a menos media en group_b, ordenado de
    mayor a menor (empates por índice de gen).
    """
    idx_a = _members(result.shells, group_a)
    idx_b = _members(result.shells, group_b)
    scores = result.delta[idx_a].mean(axis=0) - result.delta[idx_b].mean(axis=0)
    return _ranking(scores, result.after.gene_names)


def observed_ranking(expr: GeneExpressionMatrix, group_a: Sequence[int], group_b: Sequence[int]) -> GeneRanking:
    """Ranking observado: diferencia de medias de expresión entre dos grupos de spots"""
    idx_a = np.asarray(group_a, dtype=int)
    idx_b = np.asarray(group_b, dtype=int)
    if idx_a.size == 0 or idx_b.size == 0:
        raise DegenerateStatisticError("Both spot groups must be nonempty")
    scores = expr.values[idx_a].mean(axis=0) - expr.values[idx_b].mean(axis=0)
    return _ranking(scores, expr.gene_names)


def _rank_vectors(predicted: GeneRanking, observed: GeneRanking) -> Tuple[np.ndarray, np.ndarray]:
    if set(predicted.genes) != set(observed.genes) or len(predicted.genes) != len(observed.genes):
        missing = sorted(set(predicted.genes) ^ set(observed.genes))
        raise IdMismatchError(
            f"Rankings cover different genes (e.g. '{missing[0] if missing else '?'}')",
            identifier=missing[0] if missing else None
        )
    universe = predicted.genes
    return predicted.positions(universe), observed.positions(universe)


def validate_against_observed(predicted: GeneRanking, observed: GeneRanking) -> TestResult:
    """Spearman entre las posiciones de cada gen en ambos rankings"""
    x, y = _rank_vectors(predicted, observed)
    return spearman(x, y)


def ranking_null(predicted: GeneRanking, observed: GeneRanking, n_perm: int = 1000, seed: int = 0) -> NullSummary:
    """Nula por barajado del ranking observado"""
    x, y = _rank_vectors(predicted, observed)
    return permutation_null(x, y, n_perm=n_perm, seed=seed)


def compare_lesions(pairs: Sequence[Tuple[GeneRanking, GeneRanking]], n_perm: int = 1000,
                    seed: int = 0) -> Dict[str, object]:
    """
    Varias lesiones: rho observada por lesión frente a las rho barajadas
    de todas las nulas, comparadas con Mann-Whitney U.
    """
    if not pairs:
        raise InvalidInputError("compare_lesions needs at least one ranking pair")
    observed, nulls = [], []
    for offset, (predicted, actual) in enumerate(pairs):
        summary = ranking_null(predicted, actual, n_perm=n_perm, seed=seed + offset)
        observed.append(summary.observed)
        nulls.append(summary)
    shuffled = np.concatenate([s.samples for s in nulls])
    return {
        'observed': observed,
        'nulls': nulls,
        'comparison': mann_whitney_u(observed, shuffled)
    }


def run_knockout(
    expr: GeneExpressionMatrix,
    graph: SpatialGraph,
    model: InteractionModel,
    spec: PerturbationSpec,
    gen_config: GenerateConfig = None,
    radii: Sequence[float] = DEFAULT_RADII,
    relax_baseline: bool = False
) -> PerturbationResult:
    """
    Knockout en tejido.

    Fija a 0 el gen del spot objetivo, lo congela y relaja el tejido con el
    motor de generación partiendo del campo modificado. Registra el score de
    la firma por capa en cada paso y calcula delta = after - before.

    Args:
        expr: Campo de expresión (genes en el orden del modelo)
        graph: Grafo con coordenadas
        model: Modelo ajustado
        spec: Gen, spot objetivo y firma
        gen_config: Hiperparámetros de la generación
        radii: Radios de las capas de vecinos
        relax_baseline: Relajar primero el tejido sin perturbar y aplicar
            el knockout sobre el campo relajado

    Returns:
        PerturbationResult
    """
    gen_config = gen_config or GenerateConfig()
    if tuple(expr.gene_names) != tuple(model.gene_names):
        raise IdMismatchError("Expression genes do not match the model panel (same order required)")
    if expr.n_spots != graph.n_spots:
        raise DimensionMismatchError(
            f"Expression has {expr.n_spots} spots but the graph has {graph.n_spots}"
        )
    if graph.coordinates is None:
        raise InvalidInputError("Knockout shells need spot coordinates on the graph")

    gene = expr.gene_index(spec.gene)
    target = select_target(expr, spec)
    signature = list(spec.signature) or list(
        derive_signature(expr, spec.gene, min(DEFAULT_SIGNATURE_TOP, expr.n_genes - 1))
    )
    signature_idx = [expr.gene_index(g) for g in signature]

    service = GenerationService()
    before = expr
    if relax_baseline:
        before, _ = service.generate(model, graph, gen_config, initial=expr)
        before = before.with_values(before.values, step='relaxed')

    shells = neighbor_shells_by_distance(graph.coordinates, target, radii)
    recorder = SignatureScoreRecorder(
        signature_idx, {label: shells.members(label) for label in shells.groups}
    )

    start = np.array(before.values, dtype=float)
    start[target, gene] = 0.0
    mask = FreezeMask.knockout(start.shape, target, gene)

    with service.observing(recorder):
        after, trace = service.generate(model, graph, gen_config, mask=mask, initial=start,
                                        spot_ids=before.spot_ids)

    logger.info(
        "Knockout of %s in spot %s finished after %d steps",
        spec.gene, before.spot_ids[target], trace.steps[-1] if trace.steps else 0
    )
    score_trace: Dict[str, List[Optional[float]]] = {'step': [float(s) for s in recorder.steps]}
    score_trace.update(recorder.scores)
    return PerturbationResult(
        before=before,
        after=after.with_values(after.values, step='knockout'),
        delta=after.values - before.values,
        shells=shells,
        score_trace=score_trace,
        generation=trace,
        target=target,
        gene=spec.gene
    )
