"""
Implementación del patrón Singleton para la configuración del proceso.
Lee las variables de entorno (opcionalmente desde un fichero .env) una sola
vez y las expone a toda la aplicación.
"""
import logging
import os
import threading
from typing import Optional

from dotenv import load_dotenv

from spatial_couplings.exceptions import InvalidInputError


ENV_PREFIX = 'SPATIAL_COUPLINGS_'

_LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


class Settings:
    """
    Singleton con la configuración de proceso.

    Attributes:
        log_level: Nivel de logging por defecto
        seed: Semilla por defecto de todos los subcomandos
        workers: Hilos para repeticiones/ajustes independientes
    """

    _instance: Optional['Settings'] = None
    _lock: threading.Lock = threading.Lock()
    _initialized: bool = False

    def __new__(cls, *args, **kwargs):
        if cls._instance is None:
            with cls._lock:
                # Double-check locking
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, env_file: Optional[str] = None):
        """
        Carga la configuración (solo una vez).

        Args:
            env_file: Ruta a un fichero .env; por defecto se busca uno en
                el directorio de trabajo
        """
        if self._initialized:
            return

        load_dotenv(dotenv_path=env_file, override=False)
        self.log_level = self._read_log_level()
        self.seed = self._read_int('SEED', 0, minimum=0)
        self.workers = self._read_int('WORKERS', 1, minimum=1)
        self._initialized = True
        logging.getLogger(__name__).debug(
            "Settings loaded: log_level=%s seed=%d workers=%d",
            self.log_level, self.seed, self.workers
        )

    @staticmethod
    def _read_log_level() -> str:
        level = os.getenv(ENV_PREFIX + 'LOG_LEVEL', 'WARNING').upper()
        if level not in _LOG_LEVELS:
            raise InvalidInputError(
                f"{ENV_PREFIX}LOG_LEVEL must be one of {', '.join(_LOG_LEVELS)}, got '{level}'"
            )
        return level

    @staticmethod
    def _read_int(name: str, default: int, minimum: int) -> int:
        raw = os.getenv(ENV_PREFIX + name)
        if raw is None or raw.strip() == '':
            return default
        try:
            value = int(raw)
        except ValueError as exc:
            raise InvalidInputError(f"{ENV_PREFIX}{name} must be an integer, got '{raw}'") from exc
        if value < minimum:
            raise InvalidInputError(f"{ENV_PREFIX}{name} must be >= {minimum}, got {value}")
        return value

    def to_dict(self) -> dict:
        """Convierte la configuración a diccionario"""
        return {
            'log_level': self.log_level,
            'seed': self.seed,
            'workers': self.workers
        }

    @classmethod
    def reset_instance(cls):
        """
        Resetea la instancia del Singleton.
        Útil para testing.
        """
        with cls._lock:
            cls._instance = None
            cls._initialized = False
