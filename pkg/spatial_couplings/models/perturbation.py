"""
Modelos de dominio del laboratorio de perturbaciones.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.generation import GenerationTrace

PERTURBED = 'perturbed'
UNPERTURBED = 'unperturbed'


def neighbor_label(shell: int) -> str:
    """Etiqueta de la capa de vecinos j (1, 2, ...)"""
    return f'neighbor{shell}'


@dataclass(frozen=True)
class PerturbationSpec:
    """
    Descripción de un knockout.

    Attributes:
        gene: Gen a anular
        target: Spot explícito, o None para elegir uno positivo al azar
        seed: Semilla para la elección aleatoria
        signature: Genes de la firma cuyo score se sigue (opcional)
    """
    gene: str
    target: Optional[str] = None
    seed: int = 0
    signature: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'signature', tuple(self.signature))

    @property
    def mode(self) -> str:
        return 'knockout'

    def to_dict(self) -> dict:
        """Convierte la especificación a diccionario"""
        return {
            'gene': self.gene,
            'target': self.target if self.target is not None else 'random',
            'seed': self.seed,
            'mode': self.mode,
            'signature': list(self.signature)
        }


@dataclass(frozen=True)
class ShellClassification:
    """
    Clasificación de cada spot respecto a un centro.

    Attributes:
        labels: Etiqueta por spot (perturbed, neighbor1, ..., unperturbed)
        center: Índice del spot central
        radii: Radios usados (estrictamente crecientes)
    """
    labels: Tuple[str, ...]
    center: int
    radii: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(self.labels))
        object.__setattr__(self, 'radii', tuple(float(r) for r in self.radii))

    @property
    def groups(self) -> List[str]:
        """Todas las clases posibles, en orden"""
        return [PERTURBED] + [neighbor_label(j) for j in range(1, len(self.radii) + 1)] + [UNPERTURBED]

    def members(self, label: str) -> np.ndarray:
        """Índices de los spots de una clase"""
        if label not in self.groups:
            raise InvalidInputError(f"Unknown shell class '{label}'")
        return np.array([i for i, lab in enumerate(self.labels) if lab == label], dtype=int)

    def members_of(self, labels: Sequence[str]) -> np.ndarray:
        """Índices de los spots de varias clases"""
        if isinstance(labels, str):
            labels = [labels]
        return np.sort(np.concatenate([self.members(lab) for lab in labels]))

    def counts(self) -> Dict[str, int]:
        """Número de spots por clase"""
        return {label: int(self.members(label).size) for label in self.groups}


@dataclass(frozen=True)
class GeneRanking:
    """
    Genes ordenados por puntuación descendente (empates por índice de gen).

    Attributes:
        genes: Genes en orden
        scores: Puntuación de cada gen en el mismo orden
    """
    genes: Tuple[str, ...]
    scores: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'genes', tuple(self.genes))
        object.__setattr__(self, 'scores', tuple(float(s) for s in self.scores))

    def positions(self, universe: Sequence[str]) -> np.ndarray:
        """Posición (1 = primero) de cada gen del universo en este ranking"""
        where = {gene: i + 1 for i, gene in enumerate(self.genes)}
        return np.array([where[g] for g in universe], dtype=float)

    def to_dict(self) -> dict:
        """Convierte el ranking a diccionario"""
        return {'genes': list(self.genes), 'scores': list(self.scores)}


@dataclass
class PerturbationResult:
    """
    Resultado de un knockout en tejido.

    Attributes:
        before: Campo de expresión antes de la intervención
        after: Campo de expresión relajado tras la intervención
        delta: after - before
        shells: Clasificación de spots respecto al spot perturbado
        score_trace: Score medio de la firma por clase y por paso
        generation: Traza del hamiltoniano
        target: Índice del spot perturbado
        gene: Gen anulado
    """
    before: GeneExpressionMatrix
    after: GeneExpressionMatrix
    delta: np.ndarray
    shells: ShellClassification
    score_trace: Dict[str, List[float]]
    generation: GenerationTrace
    target: int
    gene: str

    @property
    def target_id(self) -> str:
        return self.before.spot_ids[self.target]
