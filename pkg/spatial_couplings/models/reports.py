"""
Resultados de tests estadísticos e informes de validación.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.interaction import InteractionModel


class TestMethod(Enum):
    """Camino de cálculo del p-valor"""
    __test__ = False

    EXACT = "exact"
    APPROXIMATE = "approximate"


@dataclass(frozen=True)
class TestResult:
    """
    Resultado de un test estadístico.

    Attributes:
        statistic: Valor del estadístico (rho, U, ...)
        p_value: p-valor en [0, 1]
        method: EXACT o APPROXIMATE
        n: Tamaños muestrales
    """
    __test__ = False

    statistic: float
    p_value: float
    method: TestMethod
    n: Tuple[int, ...]

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise InvalidInputError(f"p_value must lie in [0, 1], got {self.p_value!r}")
        object.__setattr__(self, 'method', TestMethod(self.method))
        object.__setattr__(self, 'n', tuple(int(v) for v in self.n))

    def to_dict(self) -> dict:
        """Convierte el resultado a diccionario"""
        return {
            'statistic': self.statistic,
            'p_value': self.p_value,
            'method': self.method.value,
            'n': list(self.n)
        }


@dataclass(frozen=True)
class NullSummary:
    """
    Resumen de una distribución nula por permutaciones.

    Attributes:
        observed: Estadístico observado
        mean: Media de la nula
        std: Desviación típica de la nula
        lower: Percentil 2.5
        upper: Percentil 97.5
        p95: Percentil 95
        p_value: p empírico bilateral (1 + #{|nulo| >= |obs|}) / (n_perm + 1)
        n_perm: Número de permutaciones
        samples: Valores de la nula
    """
    observed: float
    mean: float
    std: float
    lower: float
    upper: float
    p95: float
    p_value: float
    n_perm: int
    samples: np.ndarray = field(repr=False)

    def to_dict(self, include_samples: bool = False) -> dict:
        """Convierte el resumen a diccionario"""
        data = {
            'observed': self.observed,
            'mean': self.mean,
            'std': self.std,
            'lower': self.lower,
            'upper': self.upper,
            'p95': self.p95,
            'p_value': self.p_value,
            'n_perm': self.n_perm
        }
        if include_samples:
            data['samples'] = [float(v) for v in self.samples]
        return data


@dataclass
class RepeatOutcome:
    """
    Resultado de una repetición del experimento de auto-consistencia.

    Attributes:
        repeat: Índice de la repetición
        fitted: Test Spearman (verdad vs modelo ajustado a datos generados)
        raw: Test Spearman (verdad vs modelo ajustado al ruido inicial)
        fitted_null: Nula por permutaciones del ajustado
        raw_null: Nula por permutaciones del baseline
        intra: Test Spearman de g' (verdad vs ajustado), informativo
        degenerate: True si la verdad es constante y rho no está definido
        models: Modelos verdad, ajustado y baseline (claves truth, fitted, raw)
    """
    repeat: int
    fitted: Optional[TestResult] = None
    raw: Optional[TestResult] = None
    fitted_null: Optional[NullSummary] = None
    raw_null: Optional[NullSummary] = None
    intra: Optional[TestResult] = None
    degenerate: bool = False
    models: Dict[str, InteractionModel] = field(default_factory=dict, repr=False)


@dataclass
class ConsistencyReport:
    """
    Informe del experimento simular-y-luego-inferir.

    Attributes:
        repeats: Un resultado por repetición, en orden
        config: Configuración resuelta
        warnings: Avisos (casos degenerados, ...)
    """
    repeats: List[RepeatOutcome]
    config: dict
    warnings: List[str] = field(default_factory=list)

    def _values(self, attr: str, what: str) -> List[Optional[float]]:
        values = []
        for outcome in self.repeats:
            result = getattr(outcome, attr)
            values.append(None if result is None else getattr(result, what))
        return values

    @property
    def rho_fitted(self) -> List[Optional[float]]:
        return self._values('fitted', 'statistic')

    @property
    def rho_raw(self) -> List[Optional[float]]:
        return self._values('raw', 'statistic')

    @property
    def p_fitted(self) -> List[Optional[float]]:
        return self._values('fitted', 'p_value')

    @property
    def p_raw(self) -> List[Optional[float]]:
        return self._values('raw', 'p_value')

    @staticmethod
    def _median(values: List[Optional[float]]) -> Optional[float]:
        defined = [v for v in values if v is not None]
        return float(np.median(defined)) if defined else None

    def median_rho_fitted(self) -> Optional[float]:
        return self._median(self.rho_fitted)

    def median_rho_raw(self) -> Optional[float]:
        return self._median(self.rho_raw)

    def to_dict(self) -> dict:
        """Convierte el informe a diccionario (bloque results)"""
        def null(summary: Optional[NullSummary]):
            return None if summary is None else summary.to_dict()

        return {
            'rho_fitted': self.rho_fitted,
            'p_fitted': self.p_fitted,
            'rho_raw': self.rho_raw,
            'p_raw': self.p_raw,
            'rho_intra': self._values('intra', 'statistic'),
            'null_fitted': [null(o.fitted_null) for o in self.repeats],
            'null_raw': [null(o.raw_null) for o in self.repeats],
            'degenerate': [o.degenerate for o in self.repeats],
            'median_rho_fitted': self.median_rho_fitted(),
            'median_rho_raw': self.median_rho_raw()
        }


@dataclass
class SplitPairOutcome:
    """
    Comparación entre los dos modelos de una partición.

    Attributes:
        name: Nombre de la pareja (p. ej. 'even-vs-odd', 'sample1-vs-rest')
        sizes: Spots de cada parte
        final: Spearman entre las g aplanadas tras la última época
        curve: rho por época (None donde no está definido)
        null: Nula por barajado de las g aplanadas
    """
    name: str
    sizes: Tuple[int, int]
    final: Optional[TestResult]
    curve: List[Optional[float]]
    null: Optional[NullSummary]


@dataclass
class SplitConsistencyReport:
    """
    Informe de consistencia entre particiones.

    Attributes:
        pairs: Un resultado por pareja de modelos
        comparison: Mann-Whitney U (rhos observados vs barajados)
        config: Configuración resuelta
        warnings: Avisos
    """
    pairs: List[SplitPairOutcome]
    comparison: Optional[TestResult]
    config: dict
    warnings: List[str] = field(default_factory=list)

    @property
    def observed_rhos(self) -> List[float]:
        return [p.final.statistic for p in self.pairs if p.final is not None]

    def to_dict(self) -> dict:
        """Convierte el informe a diccionario (bloque results)"""
        pairs: List[Dict] = []
        for pair in self.pairs:
            pairs.append({
                'name': pair.name,
                'sizes': list(pair.sizes),
                'final': None if pair.final is None else pair.final.to_dict(),
                'curve': pair.curve,
                'null': None if pair.null is None else pair.null.to_dict()
            })
        return {
            'pairs': pairs,
            'observed_rhos': self.observed_rhos,
            'comparison': None if self.comparison is None else self.comparison.to_dict()
        }
