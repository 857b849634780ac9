"""
Configuración del experimento de auto-consistencia (simular y luego inferir).
"""
from dataclasses import dataclass, field

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.generation import GenerateConfig
from spatial_couplings.models.inference import FitConfig

# paso·pasos ≈ 0.3 con 500 pasos (régimen de respuesta lineal del campo generado)
HARNESS_STEP_SIZE = 6e-4


@dataclass(frozen=True)
class SelfConsistencyConfig:
    """
    Parámetros del experimento de auto-consistencia.

    Attributes:
        n_genes: Genes del modelo verdad (>= 2)
        grid_side: Lado de la rejilla cuadrada (>= 3)
        coupling_scale: Semiancho a de la verdad ~ uniforme(-a, a)
        generation: Configuración de la generación (pasos, paso, ...)
        fit: Configuración de los ajustes
        n_repeats: Repeticiones independientes
        seed: Semilla maestra
        n_perm: Permutaciones de cada nula
        grid_radius: Radio del grafo sobre la rejilla (espaciado unidad)
        n_workers: Hilos para repartir las repeticiones
    """
    n_genes: int = 4
    grid_side: int = 20
    coupling_scale: float = 0.1
    generation: GenerateConfig = field(
        default_factory=lambda: GenerateConfig(step_size=HARNESS_STEP_SIZE, max_steps=500)
    )
    fit: FitConfig = field(default_factory=FitConfig)
    n_repeats: int = 10
    seed: int = 0
    n_perm: int = 1000
    grid_radius: float = 1.5
    n_workers: int = 1

    def __post_init__(self):
        if self.n_genes < 2:
            raise InvalidInputError("n_genes must be >= 2")
        if self.grid_side < 3:
            raise InvalidInputError("grid_side must be >= 3")
        if self.coupling_scale < 0:
            raise InvalidInputError("coupling_scale must be >= 0")
        if self.n_repeats < 1:
            raise InvalidInputError("n_repeats must be >= 1")
        if self.n_perm < 1:
            raise InvalidInputError("n_perm must be >= 1")
        if not self.grid_radius > 0:
            raise InvalidInputError("grid_radius must be positive")
        if self.n_workers < 1:
            raise InvalidInputError("n_workers must be >= 1")

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'n_genes': self.n_genes,
            'grid_side': self.grid_side,
            'coupling_scale': self.coupling_scale,
            'generation': self.generation.to_dict(),
            'fit': self.fit.to_dict(),
            'n_repeats': self.n_repeats,
            'seed': self.seed,
            'n_perm': self.n_perm,
            'grid_radius': self.grid_radius,
            'n_workers': self.n_workers
        }
