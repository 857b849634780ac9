"""
Eventos de los optimizadores.

Cada ejecución publica un evento STARTED (época o paso 0), uno ACCEPTED por
época o paso aceptado y un FINISHED con el motivo de parada. Las épocas
rechazadas por la reducción del paso no publican nada.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

import numpy as np

from spatial_couplings.models.inference import StopReason
from spatial_couplings.models.interaction import InteractionModel


class Phase(Enum):
    """Momento de la ejecución al que corresponde un evento"""
    STARTED = 'started'
    ACCEPTED = 'accepted'
    FINISHED = 'finished'


@dataclass(frozen=True)
class FitEvent:
    """
    Estado del descenso sobre la NLL.

    Attributes:
        phase: Momento de la ejecución
        epoch: Época (0 = modelo inicial)
        nll: Pérdida por spot del modelo vigente
        grad_norm: max |∂L/∂g| del modelo vigente
        model: Modelo vigente
        step: Paso aceptado tras las reducciones (solo ACCEPTED)
        stop_reason: Motivo de parada (solo FINISHED)
    """
    phase: Phase
    epoch: int
    nll: float
    grad_norm: float
    model: InteractionModel
    step: Optional[float] = None
    stop_reason: Optional[StopReason] = None

    @property
    def is_state(self) -> bool:
        """True si el evento aporta un punto nuevo de la traza"""
        return self.phase is not Phase.FINISHED


@dataclass(frozen=True)
class GenerationEvent:
    """
    Estado del ascenso proyectado sobre ℋ.

    Attributes:
        phase: Momento de la ejecución
        step: Paso (0 = campo inicial proyectado)
        hamiltonian: ℋ del campo vigente
        values: Campo vigente S×N con filas unitarias
        max_change: max |Δs| del último paso aceptado
        stop_reason: Motivo de parada (solo FINISHED)
    """
    phase: Phase
    step: int
    hamiltonian: float
    values: np.ndarray
    max_change: float = 0.0
    stop_reason: Optional[StopReason] = None

    @property
    def is_state(self) -> bool:
        return self.phase is not Phase.FINISHED


OptimizerEvent = Union[FitEvent, GenerationEvent]
