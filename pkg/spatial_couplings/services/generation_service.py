"""
Servicio de generación: con el modelo fijo, produce campos de expresión por
ascenso de gradiente proyectado sobre el hamiltoniano, con cada spot en la
esfera unidad y las entradas congeladas intactas.

Publica un GenerationEvent al empezar, uno por paso aceptado y uno al terminar.
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from spatial_couplings.exceptions import DimensionMismatchError, NonFiniteError, ProjectionError
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import FreezeMask, GenerateConfig, GenerationTrace
from spatial_couplings.models.graph import SpatialGraph
from spatial_couplings.models.inference import StopReason
from spatial_couplings.models.interaction import InteractionModel, SufficientStatistics
from spatial_couplings.observers.events import GenerationEvent, Phase
from spatial_couplings.observers.subject import OptimizerSubject
from spatial_couplings.observers.trace_observers import HamiltonianTraceRecorder, ProgressLogger
from spatial_couplings.services import model_core

logger = logging.getLogger(__name__)


def _check_consistency(values: np.ndarray, graph: SpatialGraph, model: InteractionModel) -> None:
    if values.shape[0] != graph.n_spots:
        raise DimensionMismatchError(
            f"Expression has {values.shape[0]} spots but the graph has {graph.n_spots}"
        )
    if values.shape[1] != model.n_genes:
        raise DimensionMismatchError(
            f"Expression has {values.shape[1]} genes but the model has {model.n_genes}"
        )
    if graph.n_shells != model.n_shells:
        raise DimensionMismatchError(
            f"Graph has {graph.n_shells} shells but the model has {model.n_shells}"
        )


def hamiltonian_from_statistics(stats: SufficientStatistics, model: InteractionModel) -> float:
    """ℋ = Tr(g'·C') + Σ_k Tr(g^(k)·C^(k))"""
    value = float(np.sum(model.g_intra * stats.c_intra.T))
    for g, c in zip(model.g_shells, stats.c_shells):
        value += float(np.sum(g * c.T))
    return value


def _hamiltonian_values(values: np.ndarray, graph: SpatialGraph, model: InteractionModel) -> float:
    c_intra, c_shells, m = model_core.moments(values, graph.shells)
    stats = SufficientStatistics(
        c_intra=c_intra, c_shells=tuple(c_shells), m=m, n_spots=max(values.shape[0], 1)
    )
    return hamiltonian_from_statistics(stats, model)


def hamiltonian(expr: GeneExpressionMatrix, graph: SpatialGraph, model: InteractionModel) -> float:
    """
    Evalúa el hamiltoniano vía los estadísticos suficientes.

    Returns:
        ℋ (real finito)
    """
    _check_consistency(expr.values, graph, model)
    return hamiltonian_from_statistics(model_core.sufficient_statistics(expr, graph), model)


def _grad_values(values: np.ndarray, graph: SpatialGraph, model: InteractionModel,
                 mask: Optional[FreezeMask]) -> np.ndarray:
    grad = values @ (model.g_intra + model.g_intra.T)
    for shell, g in zip(graph.shells, model.g_shells):
        grad = grad + np.asarray(shell @ values) @ (g + g.T)
    if mask is not None:
        grad = np.where(mask.frozen, 0.0, grad)
    return grad


def hamiltonian_grad_s(expr: GeneExpressionMatrix, graph: SpatialGraph, model: InteractionModel,
                       mask: Optional[FreezeMask] = None) -> np.ndarray:
    """
    ∂ℋ/∂s = Σ_k J^(k) s (g^(k) + g^(k)ᵀ) + s (g' + g'ᵀ), cero en las entradas
    congeladas.
    """
    _check_consistency(expr.values, graph, model)
    if mask is not None and mask.shape != expr.values.shape:
        raise DimensionMismatchError(f"Mask shape {mask.shape} does not match {expr.values.shape}")
    return _grad_values(np.asarray(expr.values), graph, model, mask)


def project_rows(values: np.ndarray, mask: Optional[FreezeMask] = None,
                 spot_ids: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Lleva cada fila a norma L2 unidad reescalando solo la parte libre; las
    entradas congeladas toman exactamente su valor fijado.

    Raises:
        ProjectionError: Si un spot necesita reescalado y su parte libre es cero
    """
    values = np.array(values, dtype=float, copy=True)
    if mask is None:
        frozen = np.zeros(values.shape, dtype=bool)
        fixed = np.zeros(values.shape)
    else:
        frozen = mask.frozen
        fixed = np.where(frozen, mask.values, 0.0)

    free = np.where(frozen, 0.0, values)
    remaining = np.clip(1.0 - np.sum(fixed * fixed, axis=1), 0.0, None)
    free_norm = np.linalg.norm(free, axis=1)

    bad = np.flatnonzero((free_norm == 0.0) & (remaining > 0.0))
    if bad.size:
        spot = str(spot_ids[bad[0]]) if spot_ids is not None else str(int(bad[0]))
        raise ProjectionError(f"Spot '{spot}' has no free expression to project onto the sphere",
                              spot_id=spot)

    factor = np.divide(np.sqrt(remaining), free_norm, out=np.zeros_like(free_norm), where=free_norm > 0)
    projected = free * factor[:, None]
    return np.where(frozen, fixed, projected)


def noise_initialization(shape: Tuple[int, int], seed: int) -> np.ndarray:
    """Entradas normales estándar con cada fila normalizada (uniforme en la esfera)"""
    values = np.random.default_rng(seed).standard_normal(shape)
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    return values / np.where(norms > 0, norms, 1.0)


class GenerationService(OptimizerSubject):
    """Motor de generación"""

    def generate(
        self,
        model: InteractionModel,
        graph: SpatialGraph,
        config: GenerateConfig = None,
        mask: Optional[FreezeMask] = None,
        initial: Optional[Union[GeneExpressionMatrix, np.ndarray]] = None,
        spot_ids: Optional[Sequence[str]] = None
    ) -> Tuple[GeneExpressionMatrix, GenerationTrace]:
        """
        Maximiza ℋ con cada spot en la esfera unidad.

        Args:
            model: Modelo fijo
            graph: Grafo espacial
            config: Hiperparámetros
            mask: Entradas congeladas (opcional)
            initial: Punto de partida; ruido con semilla si se omite
            spot_ids: Identificadores de spot (por defecto los de initial o s0..)

        Returns:
            (matriz generada con filas unitarias, traza de ℋ)

        Raises:
            ProjectionError: Si un spot no puede proyectarse
        """
        config = config or GenerateConfig()
        shape = (graph.n_spots, model.n_genes)

        if isinstance(initial, GeneExpressionMatrix):
            spot_ids = spot_ids or initial.spot_ids
            start = np.array(initial.values, dtype=float)
        elif initial is not None:
            start = np.array(initial, dtype=float)
        else:
            start = noise_initialization(shape, config.seed)
        if spot_ids is None:
            spot_ids = tuple(f's{i}' for i in range(graph.n_spots))
        _check_consistency(start, graph, model)
        if mask is not None and mask.shape != shape:
            raise DimensionMismatchError(f"Mask shape {mask.shape} does not match {shape}")

        recorder = HamiltonianTraceRecorder()
        progress = ProgressLogger(every=config.log_every, name='generate')
        with self.observing(recorder, progress):
            values = self._ascend(start, graph, model, config, mask, spot_ids)

        expr = GeneExpressionMatrix(
            values=values,
            spot_ids=spot_ids,
            gene_names=model.gene_names,
            sphere_normalized=True,
            provenance=('generated',)
        )
        return expr, recorder.trace

    def _ascend(self, start, graph, model, config, mask, spot_ids) -> np.ndarray:
        values = project_rows(start, mask, spot_ids)
        energy = _hamiltonian_values(values, graph, model)
        if not np.isfinite(energy):
            raise NonFiniteError("Non-finite Hamiltonian at the initial field", epoch=0)
        self.notify(GenerationEvent(Phase.STARTED, 0, energy, values))

        step = 0
        stop_reason = StopReason.MAX_ITERATIONS
        for step in range(1, config.max_steps + 1):
            grad = _grad_values(values, graph, model, mask)
            if not np.any(grad):
                stop_reason = StopReason.STATIONARY
                step -= 1
                break
            if not np.all(np.isfinite(grad)):
                raise NonFiniteError(f"Non-finite gradient at step {step}", epoch=step)

            eta = config.step_size
            candidate = None
            for _ in range(config.max_halvings + 1):
                trial = project_rows(values + eta * grad, mask, spot_ids)
                trial_energy = _hamiltonian_values(trial, graph, model)
                if np.isfinite(trial_energy) and trial_energy >= energy:
                    candidate = trial
                    break
                eta *= 0.5

            if candidate is None:
                stop_reason = StopReason.STALLED
                step -= 1
                break

            change = float(np.max(np.abs(candidate - values), initial=0.0))
            values, energy = candidate, trial_energy
            self.notify(GenerationEvent(Phase.ACCEPTED, step, energy, values, max_change=change))
            if change < config.change_tolerance:
                stop_reason = StopReason.CONVERGED
                break

        self.notify(GenerationEvent(Phase.FINISHED, step, energy, values, stop_reason=stop_reason))
        return values


def generate(
    model: InteractionModel,
    graph: SpatialGraph,
    config: GenerateConfig = None,
    mask: Optional[FreezeMask] = None,
    initial: Optional[Union[GeneExpressionMatrix, np.ndarray]] = None
) -> Tuple[GeneExpressionMatrix, GenerationTrace]:
    """Atajo funcional de GenerationService().generate"""
    return GenerationService().generate(model, graph, config, mask, initial)
