"""
Jerarquía de excepciones del paquete.

Todas heredan de SpatialCouplingsError y, además, de la excepción estándar
más cercana (ValueError, KeyError, ...) para que el código cliente pueda
capturarlas de cualquiera de las dos formas.
"""
from typing import Optional


class SpatialCouplingsError(Exception):
    """Raíz de todos los errores del dominio"""


class DimensionMismatchError(SpatialCouplingsError, ValueError):
    """Dimensiones incompatibles entre expresión, grafo, modelo o estadísticos"""


class InvalidInputError(SpatialCouplingsError, ValueError):
    """Precondición o invariante de tipo violado"""


class NonFiniteError(SpatialCouplingsError, ArithmeticError):
    """Pérdida o gradiente no finito durante una optimización"""

    def __init__(self, message: str, epoch: Optional[int] = None):
        super().__init__(message)
        self.epoch = epoch


class ProjectionError(SpatialCouplingsError, ValueError):
    """Un spot no puede proyectarse a la esfera unidad"""

    def __init__(self, message: str, spot_id: Optional[str] = None):
        super().__init__(message)
        self.spot_id = spot_id


class DataFormatError(SpatialCouplingsError, ValueError):
    """Fallo de parseo de un fichero de entrada"""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[str] = None
    ):
        location = path or '<input>'
        if line is not None:
            location += f':{line}'
        if column is not None:
            location += f' (column {column})'
        super().__init__(f'{location}: {message}')
        self.path = path
        self.line = line
        self.column = column


class DuplicateIdError(SpatialCouplingsError, ValueError):
    """Identificadores de spot o de gen duplicados"""

    def __init__(self, message: str, identifier: Optional[str] = None):
        super().__init__(message)
        self.identifier = identifier


class IdMismatchError(SpatialCouplingsError, KeyError):
    """Identificadores que no coinciden entre ficheros o artefactos"""

    def __init__(self, message: str, identifier: Optional[str] = None):
        super().__init__(message)
        self.identifier = identifier

    def __str__(self) -> str:
        return str(self.args[0])


class GeneNotFoundError(SpatialCouplingsError, KeyError):
    """Nombre de gen desconocido"""

    def __init__(self, gene: str):
        super().__init__(f"Gene '{gene}' not found in the panel")
        self.gene = gene

    def __str__(self) -> str:
        return str(self.args[0])


class DegenerateStatisticError(SpatialCouplingsError, ValueError):
    """Estadístico no definido para la entrada dada"""
