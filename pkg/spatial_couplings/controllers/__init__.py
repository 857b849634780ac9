"""
Módulo de controllers (capa de presentación)
"""
from .cli_controller import CliController, run

__all__ = ['CliController', 'run']
