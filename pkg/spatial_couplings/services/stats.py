"""
Primitivas estadísticas: correlación de Spearman, U de Mann-Whitney y nulas
por permutaciones. Contraste bilateral por defecto.
"""
import logging
from itertools import combinations, permutations
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm, rankdata, t as student_t

from spatial_couplings.exceptions import (
    DegenerateStatisticError,
    DimensionMismatchError,
    InvalidInputError
)
from spatial_couplings.models.reports import NullSummary, TestMethod, TestResult

logger = logging.getLogger(__name__)

SPEARMAN_EXACT_MAX_N = 8
MANN_WHITNEY_EXACT_MAX_N = 12
ALTERNATIVES = ('two-sided', 'greater', 'less')
# Tolerancia al comparar estadísticos permutados con el observado
TIE_TOLERANCE = 1e-12


def _vector(values, what: str) -> np.ndarray:
    array = np.asarray(values, dtype=float).ravel()
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{what} contains non-finite entries")
    return array


def _rank_correlation(rx: np.ndarray, ry: np.ndarray) -> np.ndarray:
    """Pearson entre rx y cada fila de ry (ry puede ser 1-D o 2-D)"""
    dx = rx - rx.mean()
    dy = ry - ry.mean(axis=-1, keepdims=True)
    numerator = dy @ dx
    denominator = np.sqrt(np.dot(dx, dx) * np.sum(dy * dy, axis=-1))
    return np.clip(numerator / denominator, -1.0, 1.0)


def spearman_rho(x, y) -> float:
    """
    rho de Spearman (Pearson de rangos medios).

    Raises:
        DegenerateStatisticError: Si algún vector es constante
    """
    x = _vector(x, 'x')
    y = _vector(y, 'y')
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Vectors differ in length: {x.size} vs {y.size}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise DegenerateStatisticError("Spearman rho is undefined for a constant vector")
    return float(_rank_correlation(rankdata(x), rankdata(y)))


def spearman(x, y) -> TestResult:
    """
    Correlación de Spearman con p-valor bilateral.

    p exacto por enumeración de permutaciones si n <= 8; si no,
    aproximación t = rho·sqrt((n-2)/(1-rho²)) con n-2 grados de libertad.

    Args:
        x: Primer vector
        y: Segundo vector (misma longitud, >= 3)

    Returns:
        TestResult con statistic = rho

    Raises:
        DegenerateStatisticError: Si algún vector es constante
    """
    x = _vector(x, 'x')
    y = _vector(y, 'y')
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Vectors differ in length: {x.size} vs {y.size}")
    n = x.size
    if n < 3:
        raise InvalidInputError("Spearman correlation needs at least 3 observations")
    rho = spearman_rho(x, y)
    rx, ry = rankdata(x), rankdata(y)

    if n <= SPEARMAN_EXACT_MAX_N:
        orders = np.array(list(permutations(range(n))))
        null = _rank_correlation(rx, ry[orders])
        p_value = float(np.mean(np.abs(null) >= abs(rho) - TIE_TOLERANCE))
        return TestResult(statistic=rho, p_value=min(p_value, 1.0), method=TestMethod.EXACT, n=(n,))

    if abs(rho) >= 1.0:
        p_value = 0.0
    else:
        t_stat = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
        p_value = float(min(1.0, 2.0 * student_t.sf(abs(t_stat), n - 2)))
    return TestResult(statistic=rho, p_value=p_value, method=TestMethod.APPROXIMATE, n=(n,))


def _exact_u_distribution(n_a: int, n: int) -> np.ndarray:
    """U de todas las asignaciones de n_a rangos (1..n) al primer grupo"""
    offset = n_a * (n_a + 1) / 2.0
    return np.array([sum(c) + len(c) - offset for c in combinations(range(n), n_a)], dtype=float)


def mann_whitney_u(a, b, alternative: str = 'two-sided') -> TestResult:
    """
    Test U de Mann-Whitney para el grupo a frente al b.

    U = R_a - n_a(n_a+1)/2 con rangos medios. p exacto por enumeración si
    n_a + n_b <= 12 y no hay empates; si no, aproximación normal con
    corrección por empates y de continuidad.

    Args:
        a: Primer grupo (>= 1 observación)
        b: Segundo grupo (>= 1 observación)
        alternative: 'two-sided', 'greater' (a tiende a ser mayor) o 'less'

    Returns:
        TestResult con statistic = U de a
    """
    if alternative not in ALTERNATIVES:
        raise InvalidInputError(f"alternative must be one of {ALTERNATIVES}, got {alternative!r}")
    a = _vector(a, 'a')
    b = _vector(b, 'b')
    n_a, n_b = a.size, b.size
    if n_a < 1 or n_b < 1:
        raise InvalidInputError("Mann-Whitney U needs at least one observation per group")
    n = n_a + n_b
    combined = np.concatenate([a, b])
    ranks = rankdata(combined)
    u_stat = float(ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)
    has_ties = np.unique(combined).size < n

    if n <= MANN_WHITNEY_EXACT_MAX_N and not has_ties:
        null = _exact_u_distribution(n_a, n)
        upper = float(np.mean(null >= u_stat - TIE_TOLERANCE))
        lower = float(np.mean(null <= u_stat + TIE_TOLERANCE))
        method = TestMethod.EXACT
    else:
        mean_u = n_a * n_b / 2.0
        _, tie_counts = np.unique(combined, return_counts=True)
        tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / (n * (n - 1)) if n > 1 else 0.0
        sigma = np.sqrt(n_a * n_b / 12.0 * ((n + 1) - tie_term))
        method = TestMethod.APPROXIMATE
        if sigma == 0.0:
            return TestResult(statistic=u_stat, p_value=1.0, method=method, n=(n_a, n_b))
        upper = float(norm.sf((u_stat - mean_u - 0.5) / sigma))
        lower = float(norm.cdf((u_stat - mean_u + 0.5) / sigma))

    if alternative == 'greater':
        p_value = upper
    elif alternative == 'less':
        p_value = lower
    else:
        p_value = 2.0 * min(upper, lower)
    return TestResult(statistic=u_stat, p_value=float(min(1.0, p_value)), method=method, n=(n_a, n_b))


def permutation_null(
    x,
    y,
    n_perm: int = 1000,
    seed: int = 0,
    statistic: Optional[Callable] = None
) -> NullSummary:
    """
    Distribución nula de un estadístico barajando y con semilla.

    Args:
        x: Primer vector
        y: Segundo vector (se baraja)
        n_perm: Número de permutaciones
        seed: Semilla
        statistic: f(x, y) -> float; por defecto la rho de Spearman

    Returns:
        NullSummary con p empírico (1 + #{|nulo| >= |obs|}) / (n_perm + 1)
    """
    if n_perm < 1:
        raise InvalidInputError("n_perm must be >= 1")
    statistic = statistic or spearman_rho
    x = _vector(x, 'x')
    y = _vector(y, 'y')
    observed = float(statistic(x, y))

    rng = np.random.default_rng(seed)
    samples = np.array([statistic(x, rng.permutation(y)) for _ in range(n_perm)], dtype=float)
    exceed = int(np.sum(np.abs(samples) >= abs(observed) - TIE_TOLERANCE))
    return NullSummary(
        observed=observed,
        mean=float(samples.mean()),
        std=float(samples.std()),
        lower=float(np.percentile(samples, 2.5)),
        upper=float(np.percentile(samples, 97.5)),
        p95=float(np.percentile(samples, 95.0)),
        p_value=(1.0 + exceed) / (n_perm + 1.0),
        n_perm=int(n_perm),
        samples=samples
    )
