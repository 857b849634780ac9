"""
Módulo de estrategias (patrón Strategy)
"""
from .graph_strategy import GraphStrategy, RadiusGraphStrategy, KnnGraphStrategy
from .init_strategy import InitStrategy, ZerosInitStrategy, UniformInitStrategy
from .split_strategy import (
    SplitPair,
    SplitStrategy,
    ParitySplitStrategy,
    MaskSplitStrategy,
    RandomSplitStrategy,
    BySampleSplitStrategy
)

__all__ = [
    'GraphStrategy', 'RadiusGraphStrategy', 'KnnGraphStrategy',
    'InitStrategy', 'ZerosInitStrategy', 'UniformInitStrategy',
    'SplitPair', 'SplitStrategy', 'ParitySplitStrategy', 'MaskSplitStrategy',
    'RandomSplitStrategy', 'BySampleSplitStrategy'
]
