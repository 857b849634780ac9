"""
Módulo de servicios (lógica de negocio)
"""
from .inference_service import InferenceService, fit, fit_statistics, init_model
from .generation_service import GenerationService, generate, hamiltonian, hamiltonian_grad_s
from .normalization_service import normalize, crop, subset_genes
from .perturbation_service import run_knockout, delta_rankings, validate_against_observed
from .validation_service import self_consistency, split_consistency, exact_oracle_nll

__all__ = [
    'InferenceService', 'fit', 'fit_statistics', 'init_model',
    'GenerationService', 'generate', 'hamiltonian', 'hamiltonian_grad_s',
    'normalize', 'crop', 'subset_genes',
    'run_knockout', 'delta_rankings', 'validate_against_observed',
    'self_consistency', 'split_consistency', 'exact_oracle_nll'
]
