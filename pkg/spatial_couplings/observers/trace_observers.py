"""
Observadores concretos de los optimizadores.

InferenceService publica FitEvent y GenerationService publica GenerationEvent;
cada observador ignora los eventos del otro optimizador.
"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from spatial_couplings.models.generation import GenerationTrace
from spatial_couplings.models.inference import FitTrace
from spatial_couplings.observers.events import FitEvent, GenerationEvent, OptimizerEvent, Phase
from spatial_couplings.observers.subject import Observer

logger = logging.getLogger(__name__)


class FitTraceRecorder(Observer):
    """Construye la FitTrace a partir de los eventos del ajuste"""

    def __init__(self):
        self.trace = FitTrace()

    def update(self, event: OptimizerEvent) -> None:
        if not isinstance(event, FitEvent):
            return
        if event.is_state:
            self.trace.record(event.epoch, event.nll, event.grad_norm)
        else:
            self.trace.stop_reason = event.stop_reason


class HamiltonianTraceRecorder(Observer):
    """Construye la GenerationTrace a partir de los eventos de la generación"""

    def __init__(self):
        self.trace = GenerationTrace(steps=[], hamiltonian=[], max_change=[])

    def update(self, event: OptimizerEvent) -> None:
        if not isinstance(event, GenerationEvent):
            return
        if event.is_state:
            self.trace.steps.append(int(event.step))
            self.trace.hamiltonian.append(float(event.hamiltonian))
            self.trace.max_change.append(float(event.max_change))
        else:
            self.trace.stop_reason = event.stop_reason


class ProgressLogger(Observer):
    """
    Escribe el progreso en el log: inicio y fin a nivel INFO, una línea
    DEBUG cada `every` épocas o pasos aceptados.
    """

    def __init__(self, every: int = 100, name: str = 'optimizer'):
        """
        Args:
            every: Frecuencia de las líneas DEBUG (0 o negativo las desactiva)
            name: Etiqueta del optimizador en los mensajes
        """
        self.every = every
        self.name = name

    def _periodic(self, counter: int) -> bool:
        return self.every > 0 and counter % self.every == 0

    def update(self, event: OptimizerEvent) -> None:
        if isinstance(event, FitEvent):
            self._fit(event)
        elif isinstance(event, GenerationEvent):
            self._generation(event)

    def _fit(self, event: FitEvent) -> None:
        if event.phase is Phase.STARTED:
            logger.info("%s: fit started, nll=%.6g", self.name, event.nll)
        elif event.phase is Phase.ACCEPTED:
            if self._periodic(event.epoch):
                logger.debug(
                    "%s: epoch %d nll=%.10g grad=%.3g step=%.3g",
                    self.name, event.epoch, event.nll, event.grad_norm, event.step
                )
        else:
            logger.info(
                "%s: fit finished after %d epochs (%s), nll=%.10g",
                self.name, event.epoch, event.stop_reason.value, event.nll
            )

    def _generation(self, event: GenerationEvent) -> None:
        if event.phase is Phase.STARTED:
            logger.info("%s: generation started, H=%.6g", self.name, event.hamiltonian)
        elif event.phase is Phase.ACCEPTED:
            if self._periodic(event.step):
                logger.debug(
                    "%s: step %d H=%.10g change=%.3g",
                    self.name, event.step, event.hamiltonian, event.max_change
                )
        else:
            logger.info(
                "%s: generation finished after %d steps (%s), H=%.10g",
                self.name, event.step, event.stop_reason.value, event.hamiltonian
            )


class ModelSnapshotRecorder(Observer):
    """
    Guarda las g^(k) aplanadas del modelo en cada época aceptada (época 0
    incluida). Alimenta la curva de rho por época entre dos ajustes.
    """

    def __init__(self):
        self.epochs: List[int] = []
        self.snapshots: List[np.ndarray] = []

    def update(self, event: OptimizerEvent) -> None:
        if isinstance(event, FitEvent) and event.is_state:
            self.epochs.append(int(event.epoch))
            self.snapshots.append(event.model.flatten_shells().copy())

    def at_epoch(self, epoch: int) -> np.ndarray:
        """
        Último snapshot aceptado en o antes de `epoch`.

        Las épocas rechazadas no generan snapshot, así que el modelo vigente
        en una época dada es el del último evento aceptado.
        """
        position = int(np.searchsorted(self.epochs, epoch, side='right')) - 1
        return self.snapshots[max(position, 0)]

    @property
    def last_epoch(self) -> int:
        return self.epochs[-1] if self.epochs else 0


class SignatureScoreRecorder(Observer):
    """
    Score medio de una firma génica por grupo de spots en cada paso de la
    generación.
    """

    def __init__(self, gene_indices: Sequence[int], groups: Mapping[str, Sequence[int]]):
        """
        Args:
            gene_indices: Columnas de los genes de la firma
            groups: Nombre de grupo -> índices de spot
        """
        self.gene_indices = np.asarray(gene_indices, dtype=int)
        self.groups = {name: np.asarray(idx, dtype=int) for name, idx in groups.items()}
        self.steps: List[int] = []
        self.scores: Dict[str, List[Optional[float]]] = {name: [] for name in self.groups}

    def update(self, event: OptimizerEvent) -> None:
        if not (isinstance(event, GenerationEvent) and event.is_state):
            return
        per_spot = np.asarray(event.values)[:, self.gene_indices].mean(axis=1)
        self.steps.append(int(event.step))
        for name, idx in self.groups.items():
            self.scores[name].append(float(per_spot[idx].mean()) if idx.size else None)
