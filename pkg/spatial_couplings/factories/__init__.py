"""
Módulo de factories (patrón Factory)
"""
from .strategy_factory import GraphStrategyFactory, InitStrategyFactory, SplitStrategyFactory

__all__ = ['GraphStrategyFactory', 'InitStrategyFactory', 'SplitStrategyFactory']
