"""
Módulo de observadores (patrón Observer)
"""
from .events import FitEvent, GenerationEvent, OptimizerEvent, Phase
from .subject import Observer, OptimizerSubject
from .trace_observers import (
    FitTraceRecorder,
    HamiltonianTraceRecorder,
    ProgressLogger,
    ModelSnapshotRecorder,
    SignatureScoreRecorder
)

__all__ = [
    'FitEvent', 'GenerationEvent', 'OptimizerEvent', 'Phase',
    'Observer', 'OptimizerSubject',
    'FitTraceRecorder', 'HamiltonianTraceRecorder', 'ProgressLogger',
    'ModelSnapshotRecorder', 'SignatureScoreRecorder'
]
