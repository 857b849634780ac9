"""
Módulo de modelos de dominio
"""
from .expression import GeneExpressionMatrix, RawDataset, NormalizationConfig
from .graph import SpatialGraph, GraphConfig, GraphMethod
from .interaction import InteractionModel, SufficientStatistics
from .inference import FitConfig, FitTrace, InitScheme, StopReason
from .generation import GenerateConfig, FreezeMask, GenerationTrace
from .perturbation import PerturbationSpec, PerturbationResult, ShellClassification, GeneRanking
from .validation import SelfConsistencyConfig
from .reports import (
    TestResult,
    TestMethod,
    NullSummary,
    RepeatOutcome,
    ConsistencyReport,
    SplitPairOutcome,
    SplitConsistencyReport
)

__all__ = [
    'GeneExpressionMatrix', 'RawDataset', 'NormalizationConfig',
    'SpatialGraph', 'GraphConfig', 'GraphMethod',
    'InteractionModel', 'SufficientStatistics',
    'FitConfig', 'FitTrace', 'InitScheme', 'StopReason',
    'GenerateConfig', 'FreezeMask', 'GenerationTrace',
    'PerturbationSpec', 'PerturbationResult', 'ShellClassification', 'GeneRanking',
    'TestResult', 'TestMethod', 'NullSummary', 'RepeatOutcome',
    'ConsistencyReport', 'SplitPairOutcome', 'SplitConsistencyReport',
    'SelfConsistencyConfig'
]
