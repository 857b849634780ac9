"""
Matemática cerrada del modelo: estadísticos suficientes, función de
partición en campo medio, log-verosimilitud negativa, gradiente analítico y
fórmulas de diagnóstico para un solo gen.

Convención de signo: se minimiza
    L = log Z - Tr(g'·C') - Σ_k Tr(g^(k)·C^(k))
que es convexa en el problema de un gen.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln

from spatial_couplings.exceptions import DimensionMismatchError, InvalidInputError
from spatial_couplings.models.expression import GeneExpressionMatrix
from spatial_couplings.models.graph import SpatialGraph
from spatial_couplings.models.interaction import InteractionModel, SufficientStatistics, symmetrize

logger = logging.getLogger(__name__)

# Umbrales de las ramas de φ(x) = log(2 sinh(x/2) / (x/2))
SERIES_THRESHOLD = 1e-3
LOG_SPACE_THRESHOLD = 30.0
# Umbral de la serie de ψ(x) = φ'(x) / x
RATIO_SERIES_THRESHOLD = 1e-2
# Umbral de las series de un gen (argumento q|m|g)
ONE_GENE_SERIES_THRESHOLD = 1e-2


# ---------------------------------------------------------------------------
# Estadísticos suficientes
# ---------------------------------------------------------------------------

def moments(values: np.ndarray, shells: Sequence) -> Tuple[np.ndarray, List[np.ndarray], np.ndarray]:
    """
    C' = sᵀs, C^(k) = sᵀJ^(k)s y medias por gen de una matriz S×N.

    Returns:
        (c_intra, c_shells, m)
    """
    s = np.asarray(values, dtype=float)
    c_intra = symmetrize(s.T @ s)
    c_shells = [symmetrize(s.T @ np.asarray(shell @ s)) for shell in shells]
    m = s.mean(axis=0) if s.shape[0] else np.zeros(s.shape[1])
    return c_intra, c_shells, m


def sufficient_statistics(expr: GeneExpressionMatrix, graph: SpatialGraph) -> SufficientStatistics:
    """
    Calcula los estadísticos suficientes de una matriz de expresión.

    Args:
        expr: Matriz de expresión S×N
        graph: Grafo espacial con S spots

    Returns:
        SufficientStatistics

    Raises:
        DimensionMismatchError: Si el número de spots no coincide
    """
    if expr.n_spots != graph.n_spots:
        raise DimensionMismatchError(
            f"Expression has {expr.n_spots} spots but the graph has {graph.n_spots}"
        )
    c_intra, c_shells, m = moments(expr.values, graph.shells)
    return SufficientStatistics(c_intra=c_intra, c_shells=tuple(c_shells), m=m, n_spots=expr.n_spots)


# ---------------------------------------------------------------------------
# Función de partición en campo medio
# ---------------------------------------------------------------------------

def sphere_log_volume(n: int) -> float:
    """
    log del área de la esfera unidad 𝕊^{n-1}: log(2 π^{n/2} / Γ(n/2)).

    Raises:
        InvalidInputError: Si n < 1
    """
    if int(n) != n or n < 1:
        raise InvalidInputError(f"Sphere dimension must be a positive integer, got {n!r}")
    return float(np.log(2.0) + 0.5 * n * np.log(np.pi) - gammaln(0.5 * n))


def log_sinhc(x: float) -> float:
    """
    φ(x) = log(2 sinh(x/2) / (x/2)) para x >= 0, sin desbordamiento.

    Serie de Taylor cerca de 0 y forma logarítmica para x grande.
    """
    x = abs(float(x))
    if x < SERIES_THRESHOLD:
        x2 = x * x
        return float(np.log(2.0) + x2 / 24.0 - x2 * x2 / 2880.0 + x2 * x2 * x2 / 181440.0)
    if x > LOG_SPACE_THRESHOLD:
        return float(0.5 * x - np.log(0.5 * x) + np.log1p(-np.exp(-x)))
    return float(np.log(2.0 * np.sinh(0.5 * x) / (0.5 * x)))


def log_sinhc_ratio(x: float) -> float:
    """ψ(x) = φ'(x) / x, con su límite 1/12 en x = 0"""
    x = abs(float(x))
    if x < RATIO_SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 / 12.0 - x2 / 720.0 + x2 * x2 / 30240.0
    return float((0.5 / np.tanh(0.5 * x) - 1.0 / x) / x)


def _check_arrays(g_intra, g_shells, q_shells, m) -> Tuple[np.ndarray, List[np.ndarray], np.ndarray, np.ndarray]:
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    g_intra = np.asarray(g_intra, dtype=float)
    g_shells = [np.asarray(g, dtype=float) for g in g_shells]
    q_shells = np.asarray(q_shells, dtype=float)
    if g_intra.shape != (n, n) or any(g.shape != (n, n) for g in g_shells):
        raise DimensionMismatchError(f"Coupling matrices do not match {n} genes")
    if len(g_shells) != q_shells.shape[0]:
        raise DimensionMismatchError(
            f"{len(g_shells)} shell matrices but {q_shells.shape[0]} mean degrees"
        )
    return g_intra, g_shells, q_shells, m


def _field_arrays(g_intra, g_shells, q_shells) -> np.ndarray:
    field = 2.0 * (g_intra + g_intra.T)
    for q, g in zip(q_shells, g_shells):
        field = field + q * (g + g.T)
    return field


def _quadratic_arrays(g_intra, g_shells, q_shells) -> np.ndarray:
    quadratic = g_intra.copy()
    for q, g in zip(q_shells, g_shells):
        quadratic = quadratic + 0.5 * q * g
    return quadratic


def effective_field(model: InteractionModel, m: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Campo efectivo H' = 2(g' + g'ᵀ) + Σ_k q_k (g^(k) + g^(k)ᵀ) y la norma de H'·m.

    Args:
        model: Modelo de interacción
        m: Vector de medias por gen

    Returns:
        (matriz de campo N×N, norma L2 de campo·m)
    """
    g_intra, g_shells, q_shells, m = _check_arrays(model.g_intra, model.g_shells, model.q_shells, m)
    field = _field_arrays(g_intra, g_shells, q_shells)
    return field, float(np.linalg.norm(field @ m))


def log_partition_arrays(g_intra, g_shells, q_shells, m, n_spots: int) -> float:
    """
    log Z en campo medio sobre matrices sin simetrizar.

    El valor solo depende de la parte simétrica de cada matriz.
    """
    if n_spots < 1:
        raise InvalidInputError("n_spots must be >= 1")
    g_intra, g_shells, q_shells, m = _check_arrays(g_intra, g_shells, q_shells, m)
    field = _field_arrays(g_intra, g_shells, q_shells)
    field_norm = float(np.linalg.norm(field @ m))
    quadratic = float(m @ _quadratic_arrays(g_intra, g_shells, q_shells) @ m)
    return (
        -n_spots * quadratic
        + sphere_log_volume(m.shape[0])
        + n_spots * log_sinhc(field_norm)
    )


def log_partition(model: InteractionModel, m: np.ndarray, n_spots: int) -> float:
    """
    log Z = -S Σ (g' + Σ_k (q_k/2) g^(k))_{αβ} m^α m^β + log V(𝕊^{N-1})
            + S log(2 sinh(H'/2) / (H'/2))

    Args:
        model: Modelo de interacción
        m: Vector de medias por gen
        n_spots: Número de spots S

    Returns:
        log Z (finito para cualquier H')
    """
    return log_partition_arrays(model.g_intra, model.g_shells, model.q_shells, m, n_spots)


def _trace_term(g: np.ndarray, c: np.ndarray) -> float:
    return float(np.sum(g * c.T))


def nll_arrays(g_intra, g_shells, q_shells, c_intra, c_shells, m, n_spots: int) -> float:
    """L sobre matrices sin simetrizar"""
    if len(c_shells) != len(g_shells):
        raise DimensionMismatchError(
            f"{len(c_shells)} shell statistics but {len(g_shells)} shell matrices"
        )
    value = log_partition_arrays(g_intra, g_shells, q_shells, m, n_spots)
    value -= _trace_term(np.asarray(g_intra, dtype=float), np.asarray(c_intra, dtype=float))
    for g, c in zip(g_shells, c_shells):
        value -= _trace_term(np.asarray(g, dtype=float), np.asarray(c, dtype=float))
    return float(value)


def _check_pair(stats: SufficientStatistics, model: InteractionModel) -> None:
    if stats.n_genes != model.n_genes:
        raise DimensionMismatchError(
            f"Statistics cover {stats.n_genes} genes but the model has {model.n_genes}"
        )
    if stats.n_shells != model.n_shells:
        raise DimensionMismatchError(
            f"Statistics cover {stats.n_shells} shells but the model has {model.n_shells}"
        )


def nll(stats: SufficientStatistics, model: InteractionModel) -> float:
    """
    Log-verosimilitud negativa L = log Z - Tr(g'C') - Σ_k Tr(g^(k) C^(k)).

    Raises:
        DimensionMismatchError: Si genes o capas no coinciden
    """
    _check_pair(stats, model)
    return nll_arrays(
        model.g_intra, model.g_shells, model.q_shells,
        stats.c_intra, stats.c_shells, stats.m, stats.n_spots
    )


def nll_grad(stats: SufficientStatistics, model: InteractionModel) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Gradiente de L restringido al subespacio de matrices simétricas.

    Cada salida es la proyección (U + Uᵀ)/2 de las parciales entrada a
    entrada U; a lo largo de una perturbación simétrica δ el cambio de L es
    Σ_{αβ} D_{αβ} δ_{αβ}.

    Returns:
        (dL/dg', [dL/dg^(k)])
    """
    _check_pair(stats, model)
    m = stats.m
    n_spots = stats.n_spots
    field = _field_arrays(model.g_intra, model.g_shells, np.asarray(model.q_shells))
    v = field @ m
    field_norm = float(np.linalg.norm(v))
    ratio = log_sinhc_ratio(field_norm)
    outer_mm = np.outer(m, m)
    outer_vm = np.outer(v, m) + np.outer(m, v)

    d_intra = -n_spots * outer_mm + 2.0 * n_spots * ratio * outer_vm - stats.c_intra.T
    d_shells = []
    for q, c in zip(model.q_shells, stats.c_shells):
        d_k = -n_spots * 0.5 * q * outer_mm + q * n_spots * ratio * outer_vm - c.T
        d_shells.append(symmetrize(d_k))
    return symmetrize(d_intra), d_shells


def nll_and_grad(stats: SufficientStatistics, model: InteractionModel) -> Tuple[float, np.ndarray, List[np.ndarray]]:
    """L y su gradiente en una sola llamada"""
    d_intra, d_shells = nll_grad(stats, model)
    return nll(stats, model), d_intra, d_shells


# ---------------------------------------------------------------------------
# Diagnóstico de un solo gen (K = 1, g' = 0)
# ---------------------------------------------------------------------------

def _coth_minus_inverse(x: float) -> float:
    """coth(x) - 1/x, impar y acotada en [-1, 1]"""
    if abs(x) < ONE_GENE_SERIES_THRESHOLD:
        x2 = x * x
        return x / 3.0 - x * x2 / 45.0 + 2.0 * x * x2 * x2 / 945.0
    return 1.0 / np.tanh(x) - 1.0 / x


def _inverse_square_gap(x: float) -> float:
    """1/x² - 1/sinh²(x), con límite 1/3 en x = 0"""
    if abs(x) < ONE_GENE_SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 / 3.0 - x2 / 15.0 + 2.0 * x2 * x2 / 189.0
    ax = abs(x)
    decay = np.exp(-2.0 * ax)
    inverse_sinh2 = 4.0 * decay / np.expm1(-2.0 * ax) ** 2
    return 1.0 / (x * x) - inverse_sinh2


def one_gene_derivatives(g11: float, m: float, q: float, n_spots: int, c_exp: float) -> Tuple[float, float, float]:
    """
    ⟨log P⟩ de un gen y sus dos primeras derivadas respecto a g11, con el
    signo original (⟨log P⟩ = -L).

    logp = (q/2) S g m² - log V - S log(2 sinh(a g)/(a g)) + g C,  a = q|m|
    d1   = (q/2) S m² - S (a coth(a g) - 1/g) + C
    d2   = -S (1/g² - a²/sinh²(a g))

    En g11 = 0 se usan los límites d1 = (q/2) S m² + C y d2 = -S a²/3.

    Returns:
        (logp, d1, d2)
    """
    if not q > 0:
        raise InvalidInputError("q must be positive")
    if n_spots < 1:
        raise InvalidInputError("n_spots must be >= 1")
    g = float(g11)
    a = q * abs(float(m))
    x = a * g
    base = 0.5 * q * n_spots * m * m

    logp = base * g - sphere_log_volume(1) - n_spots * log_sinhc(2.0 * x) + g * c_exp
    d1 = base + c_exp - n_spots * a * _coth_minus_inverse(x)
    d2 = -n_spots * a * a * _inverse_square_gap(x)
    return float(logp), float(d1), float(d2)


def one_gene_root_exists(m: float, q: float, n_spots: int, c_exp: float) -> bool:
    """
    d1 cambia de signo exactamente una vez si |C + (q/2) S m²| < S q |m|
    (límites de d1 en g → ±∞).
    """
    return abs(c_exp + 0.5 * q * n_spots * m * m) < n_spots * q * abs(m)


def one_gene_root(m: float, q: float, n_spots: int, c_exp: float, bracket: float = 1.0,
                  max_widenings: int = 200) -> float:
    """
    Raíz única de d1 por bisección, ensanchando el intervalo hasta que d1
    cambie de signo.

    Raises:
        InvalidInputError: Si la condición de existencia no se cumple
    """
    if not one_gene_root_exists(m, q, n_spots, c_exp):
        raise InvalidInputError(
            "d1 has no sign change: |C + (q/2) S m^2| must be < S q |m|"
        )

    def d1(g: float) -> float:
        return one_gene_derivatives(g, m, q, n_spots, c_exp)[1]

    low, high = -abs(bracket), abs(bracket)
    for _ in range(max_widenings):
        if d1(low) > 0 > d1(high):
            break
        low, high = 2.0 * low, 2.0 * high
    else:
        raise InvalidInputError("Could not bracket the one-gene root")
    return float(bisect(d1, low, high, xtol=1e-14, maxiter=500))
