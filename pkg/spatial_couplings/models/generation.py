"""
Configuración de la generación de campos de expresión y máscaras de
congelación para intervenciones.
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.base import readonly, require_finite
from spatial_couplings.models.inference import StopReason

FEASIBILITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GenerateConfig:
    """
    Hiperparámetros del ascenso de gradiente proyectado.

    Attributes:
        step_size: Paso base
        max_steps: Número máximo de pasos
        change_tolerance: Parada cuando el máximo cambio por entrada cae por
            debajo de este valor
        seed: Semilla de la inicialización con ruido
        max_halvings: Reducciones del paso antes de declarar estancamiento
        log_every: Frecuencia del log de progreso (pasos)
    """
    step_size: float = 1e-2
    max_steps: int = 500
    change_tolerance: float = 1e-7
    seed: int = 0
    max_halvings: int = 30
    log_every: int = 100

    def __post_init__(self):
        if not self.step_size > 0:
            raise InvalidInputError("step_size must be positive")
        if not self.change_tolerance > 0:
            raise InvalidInputError("change_tolerance must be positive")
        if self.max_steps < 0:
            raise InvalidInputError("max_steps must be >= 0")
        if self.max_halvings < 0:
            raise InvalidInputError("max_halvings must be >= 0")

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'step_size': self.step_size,
            'max_steps': self.max_steps,
            'change_tolerance': self.change_tolerance,
            'seed': self.seed,
            'max_halvings': self.max_halvings,
            'log_every': self.log_every
        }


@dataclass(frozen=True)
class FreezeMask:
    """
    Entradas S×N congeladas con su valor fijo.

    La norma L2 de la parte congelada de cada spot no puede superar 1; si no,
    la fila no podría volver a la esfera unidad reescalando la parte libre.

    Attributes:
        frozen: Matriz booleana S×N
        values: Valores fijados (solo se leen las entradas congeladas)
    """
    frozen: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        frozen = readonly(self.frozen, dtype=bool)
        values = readonly(self.values)
        if frozen.ndim != 2 or frozen.shape != values.shape:
            raise DimensionMismatchError(
                f"Freeze mask shape {frozen.shape} does not match values shape {values.shape}"
            )
        require_finite(values[frozen], 'Frozen values')
        frozen_sq = np.where(frozen, values, 0.0) ** 2
        norms = frozen_sq.sum(axis=1)
        bad = np.flatnonzero(norms > 1.0 + FEASIBILITY_TOLERANCE)
        if bad.size:
            raise InvalidInputError(
                f"Frozen entries of spot {int(bad[0])} have L2 norm {np.sqrt(norms[bad[0]])!r} > 1"
            )
        object.__setattr__(self, 'frozen', frozen)
        object.__setattr__(self, 'values', values)

    @property
    def shape(self):
        return self.frozen.shape

    @staticmethod
    def from_matrix(frozen: np.ndarray, values: np.ndarray) -> 'FreezeMask':
        """Congela las entradas indicadas con los valores de la matriz dada"""
        return FreezeMask(frozen=frozen, values=values)

    @staticmethod
    def knockout(shape, spot: int, gene: int) -> 'FreezeMask':
        """Máscara que fija a cero un único gen de un único spot"""
        frozen = np.zeros(shape, dtype=bool)
        frozen[spot, gene] = True
        return FreezeMask(frozen=frozen, values=np.zeros(shape))

    @staticmethod
    def empty(shape) -> 'FreezeMask':
        """Máscara sin entradas congeladas"""
        return FreezeMask(frozen=np.zeros(shape, dtype=bool), values=np.zeros(shape))


@dataclass
class GenerationTrace:
    """
    Traza del hamiltoniano por paso aceptado (paso 0 = inicialización proyectada).

    Attributes:
        steps: Índices de paso
        hamiltonian: ℋ en cada paso
        max_change: Máximo cambio por entrada en cada paso (0 en el paso 0)
        stop_reason: Motivo de parada
    """
    steps: List[int]
    hamiltonian: List[float]
    max_change: List[float]
    stop_reason: Optional[StopReason] = None

    def is_monotone(self) -> bool:
        """True si ℋ nunca baja entre pasos aceptados"""
        return bool(np.all(np.diff(np.asarray(self.hamiltonian)) >= 0.0))

    def to_dict(self) -> dict:
        """Convierte la traza a diccionario"""
        return {
            'steps': list(self.steps),
            'hamiltonian': list(self.hamiltonian),
            'max_change': list(self.max_change),
            'stop_reason': self.stop_reason.value if self.stop_reason else None
        }
