"""
Módulo de repositorios (patrón Repository)
"""
from .base_repository import BaseRepository
from .dataset_repository import DatasetRepository, DatasetFormat
from .model_repository import ModelRepository
from .report_repository import ReportRepository

__all__ = ['BaseRepository', 'DatasetRepository', 'DatasetFormat', 'ModelRepository', 'ReportRepository']
