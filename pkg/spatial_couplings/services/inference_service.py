"""
Servicio de inferencia: ajusta un InteractionModel minimizando la
log-verosimilitud negativa por descenso de gradiente con reducción del paso.

Implementa el patrón Observer: publica un FitEvent al empezar, uno por época
aceptada y uno al terminar.
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError, NonFiniteError
from spatial_couplings.factories.strategy_factory import InitStrategyFactory
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.graph import SpatialGraph
from spatial_couplings.models.inference import FitConfig, FitTrace, InitScheme, StopReason
from spatial_couplings.models.interaction import InteractionModel, SufficientStatistics
from spatial_couplings.observers.events import FitEvent, Phase
from spatial_couplings.observers.subject import OptimizerSubject
from spatial_couplings.observers.trace_observers import FitTraceRecorder, ProgressLogger
from spatial_couplings.services import model_core
from spatial_couplings.services.graph_builder import mean_degrees

logger = logging.getLogger(__name__)


def default_gene_names(n_genes: int) -> Tuple[str, ...]:
    """Nombres g0, g1, ... para modelos sin panel"""
    return tuple(f'g{i}' for i in range(n_genes))


def init_model(
    n_genes: int,
    n_shells: int = 1,
    scheme: InitScheme = InitScheme.ZEROS,
    seed: int = 0,
    scale: float = 0.1,
    gene_names: Optional[Sequence[str]] = None,
    q_shells: Optional[Sequence[float]] = None
) -> InteractionModel:
    """
    Crea el modelo inicial.

    Args:
        n_genes: Número de genes N (>= 1)
        n_shells: Número de capas K
        scheme: ZEROS o UNIFORM
        seed: Semilla del esquema uniforme
        scale: Semiancho del esquema uniforme
        gene_names: Panel de genes (por defecto g0..gN-1)
        q_shells: Grados medios (por defecto 0 en cada capa)

    Returns:
        InteractionModel con matrices simétricas
    """
    if n_genes < 1:
        raise InvalidInputError("n_genes must be >= 1")
    if n_shells < 1:
        raise InvalidInputError("n_shells must be >= 1")
    strategy = InitStrategyFactory.create_strategy(scheme, {'scale': scale})
    g_intra, g_shells = strategy.initialize(n_genes, n_shells, seed)
    return InteractionModel(
        g_intra=g_intra,
        g_shells=tuple(g_shells),
        q_shells=tuple(q_shells) if q_shells is not None else (0.0,) * n_shells,
        gene_names=tuple(gene_names) if gene_names is not None else default_gene_names(n_genes)
    )


class InferenceService(OptimizerSubject):
    """
    Motor de inferencia.

    Las estadísticas suficientes y m se calculan una vez y quedan fijas
    durante el ajuste. El paso se aplica a la pérdida por spot L/S.
    """

    def fit(
        self,
        expr: GeneExpressionMatrix,
        graph: SpatialGraph,
        config: FitConfig = None
    ) -> Tuple[InteractionModel, FitTrace]:
        """
        Ajusta un modelo a una matriz de expresión.

        Args:
            expr: Expresión normalizada a la esfera
            graph: Grafo espacial
            config: Hiperparámetros

        Returns:
            (modelo ajustado, traza)

        Raises:
            InvalidInputError: Si la expresión no está en la esfera
            NonFiniteError: Si la pérdida o el gradiente dejan de ser finitos
        """
        config = config or FitConfig()
        if not expr.sphere_normalized:
            raise InvalidInputError("fit expects a sphere-normalized expression matrix")
        stats = model_core.sufficient_statistics(expr, graph)
        return self.fit_statistics(stats, mean_degrees(graph), config, gene_names=expr.gene_names)

    def fit_statistics(
        self,
        stats: SufficientStatistics,
        q_shells: Sequence[float],
        config: FitConfig = None,
        gene_names: Optional[Sequence[str]] = None,
        initial_model: Optional[InteractionModel] = None
    ) -> Tuple[InteractionModel, FitTrace]:
        """
        Bucle de ajuste sobre estadísticos ya calculados.

        Args:
            stats: Estadísticos suficientes (fijos)
            q_shells: Grado medio de cada capa
            config: Hiperparámetros
            gene_names: Panel de genes
            initial_model: Punto de partida (sustituye al esquema de config)

        Returns:
            (modelo ajustado, traza)
        """
        config = config or FitConfig()
        q_shells = tuple(float(q) for q in q_shells)
        if len(q_shells) != stats.n_shells:
            raise DimensionMismatchError(
                f"{len(q_shells)} mean degrees for {stats.n_shells} shell statistics"
            )

        if initial_model is None:
            model = init_model(
                stats.n_genes, stats.n_shells, config.init_scheme, config.seed,
                config.init_scale, gene_names=gene_names, q_shells=q_shells
            )
        else:
            model = initial_model.replace(q_shells=q_shells)

        recorder = FitTraceRecorder()
        progress = ProgressLogger(every=config.log_every, name='fit')
        with self.observing(recorder, progress):
            model = self._descend(stats, model, config)
        return model, recorder.trace

    def _gradient(self, stats: SufficientStatistics, model: InteractionModel, config: FitConfig, epoch: int):
        loss, d_intra, d_shells = model_core.nll_and_grad(stats, model)
        scale = 1.0 / stats.n_spots
        d_intra = d_intra * scale if config.train_intra else np.zeros_like(d_intra)
        d_shells = [d * scale for d in d_shells]
        parts = [np.abs(d_intra).max(initial=0.0)] + [np.abs(d).max(initial=0.0) for d in d_shells]
        grad_norm = float(max(parts))
        if not np.isfinite(loss) or not np.isfinite(grad_norm):
            raise NonFiniteError(f"Non-finite loss or gradient at epoch {epoch}", epoch=epoch)
        return loss, d_intra, d_shells, grad_norm

    def _descend(self, stats: SufficientStatistics, model: InteractionModel, config: FitConfig) -> InteractionModel:
        loss, d_intra, d_shells, grad_norm = self._gradient(stats, model, config, 0)
        self.notify(FitEvent(Phase.STARTED, 0, loss, grad_norm, model))

        epoch = 0
        stop_reason = StopReason.MAX_ITERATIONS
        if grad_norm < config.grad_tolerance:
            stop_reason = StopReason.CONVERGED
        else:
            for epoch in range(1, config.max_epochs + 1):
                step = config.learning_rate
                candidate = None
                for _ in range(config.max_halvings + 1):
                    trial = model.replace(
                        g_intra=model.g_intra - step * d_intra,
                        g_shells=[g - step * d for g, d in zip(model.g_shells, d_shells)]
                    )
                    trial_loss = model_core.nll(stats, trial)
                    if np.isfinite(trial_loss) and trial_loss <= loss:
                        candidate = trial
                        break
                    step *= 0.5

                if candidate is None:
                    stop_reason = StopReason.STALLED
                    epoch -= 1
                    break

                model = candidate
                loss, d_intra, d_shells, grad_norm = self._gradient(stats, model, config, epoch)
                self.notify(FitEvent(Phase.ACCEPTED, epoch, loss, grad_norm, model, step=step))
                if grad_norm < config.grad_tolerance:
                    stop_reason = StopReason.CONVERGED
                    break

        self.notify(FitEvent(Phase.FINISHED, epoch, loss, grad_norm, model, stop_reason=stop_reason))
        return model


def fit(expr: GeneExpressionMatrix, graph: SpatialGraph, config: FitConfig = None) -> Tuple[InteractionModel, FitTrace]:
    """Atajo funcional de InferenceService().fit"""
    return InferenceService().fit(expr, graph, config)


def fit_statistics(
    stats: SufficientStatistics,
    q_shells: Sequence[float],
    config: FitConfig = None,
    gene_names: Optional[Sequence[str]] = None,
    initial_model: Optional[InteractionModel] = None
) -> Tuple[InteractionModel, FitTrace]:
    """Atajo funcional de InferenceService().fit_statistics"""
    return InferenceService().fit_statistics(stats, q_shells, config, gene_names, initial_model)
