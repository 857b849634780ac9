"""
Configuración y traza del ajuste de modelos de interacción.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from spatial_couplings.exceptions import InvalidInputError


class InitScheme(Enum):
    """Esquemas de inicialización soportados"""
    ZEROS = "zeros"
    UNIFORM = "uniform"


class StopReason(Enum):
    """Motivos de parada de un optimizador"""
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    STALLED = "stalled"
    STATIONARY = "stationary"


@dataclass(frozen=True)
class FitConfig:
    """
    Hiperparámetros del descenso de gradiente.

    Attributes:
        learning_rate: Paso base sobre la pérdida por spot
        max_epochs: Número máximo de épocas
        grad_tolerance: Parada cuando la norma infinito del gradiente por spot
            cae por debajo de este valor
        init_scheme: ZEROS o UNIFORM
        init_scale: Semiancho a de la inicialización uniforme(-a, a)
        seed: Semilla de la inicialización
        train_intra: Si g' se actualiza (si no, se queda en su valor inicial)
        max_halvings: Reducciones del paso antes de declarar estancamiento
        log_every: Frecuencia del log de progreso (épocas)
    """
    learning_rate: float = 1e-2
    max_epochs: int = 1000
    grad_tolerance: float = 1e-6
    init_scheme: InitScheme = InitScheme.ZEROS
    init_scale: float = 0.1
    seed: int = 0
    train_intra: bool = True
    max_halvings: int = 30
    log_every: int = 100

    def __post_init__(self):
        object.__setattr__(self, 'init_scheme', InitScheme(self.init_scheme))
        if not self.learning_rate > 0:
            raise InvalidInputError("learning_rate must be positive")
        if not self.grad_tolerance > 0:
            raise InvalidInputError("grad_tolerance must be positive")
        if self.max_epochs < 0:
            raise InvalidInputError("max_epochs must be >= 0")
        if self.init_scale < 0:
            raise InvalidInputError("init_scale must be >= 0")
        if self.max_halvings < 0:
            raise InvalidInputError("max_halvings must be >= 0")

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'learning_rate': self.learning_rate,
            'max_epochs': self.max_epochs,
            'grad_tolerance': self.grad_tolerance,
            'init_scheme': self.init_scheme.value,
            'init_scale': self.init_scale,
            'seed': self.seed,
            'train_intra': self.train_intra,
            'max_halvings': self.max_halvings,
            'log_every': self.log_every
        }

    @staticmethod
    def from_dict(data: dict) -> 'FitConfig':
        """Crea una configuración desde un diccionario"""
        defaults = FitConfig()
        return FitConfig(
            learning_rate=data.get('learning_rate', defaults.learning_rate),
            max_epochs=data.get('max_epochs', defaults.max_epochs),
            grad_tolerance=data.get('grad_tolerance', defaults.grad_tolerance),
            init_scheme=InitScheme(data.get('init_scheme', defaults.init_scheme.value)),
            init_scale=data.get('init_scale', defaults.init_scale),
            seed=data.get('seed', defaults.seed),
            train_intra=data.get('train_intra', defaults.train_intra),
            max_halvings=data.get('max_halvings', defaults.max_halvings),
            log_every=data.get('log_every', defaults.log_every)
        )


@dataclass
class FitTrace:
    """
    Registro por época aceptada de un ajuste.

    Attributes:
        epochs: Índices de época (estrictamente crecientes; 0 = modelo inicial)
        nll: Pérdida L tras cada época
        grad_norm: Norma infinito del gradiente por spot en el nuevo punto
        stop_reason: Motivo de parada (None mientras el ajuste sigue)
    """
    epochs: List[int] = field(default_factory=list)
    nll: List[float] = field(default_factory=list)
    grad_norm: List[float] = field(default_factory=list)
    stop_reason: Optional[StopReason] = None

    def record(self, epoch: int, nll: float, grad_norm: float) -> None:
        """Añade una época; rechaza índices no crecientes"""
        if self.epochs and epoch <= self.epochs[-1]:
            raise InvalidInputError(
                f"Trace epochs must be strictly increasing ({epoch} after {self.epochs[-1]})"
            )
        self.epochs.append(int(epoch))
        self.nll.append(float(nll))
        self.grad_norm.append(float(grad_norm))

    def __len__(self) -> int:
        return len(self.epochs)

    def is_monotone(self) -> bool:
        """True si la pérdida nunca sube entre épocas aceptadas"""
        return bool(np.all(np.diff(np.asarray(self.nll)) <= 0.0))

    def to_dict(self) -> dict:
        """Convierte la traza a diccionario"""
        return {
            'epochs': list(self.epochs),
            'nll': list(self.nll),
            'grad_norm': list(self.grad_norm),
            'stop_reason': self.stop_reason.value if self.stop_reason else None
        }
