"""
Implementación del patrón Factory para crear estrategias a partir de
configuraciones. Cada factory mantiene un registro extensible.
"""
import logging
from typing import Any, Dict

from spatial_couplings.exceptions import InvalidInputError
from spatial_couplings.models.graph import GraphMethod
from spatial_couplings.models.inference import InitScheme
from spatial_couplings.strategies.graph_strategy import (
    GraphStrategy,
    KnnGraphStrategy,
    RadiusGraphStrategy
)
from spatial_couplings.strategies.init_strategy import (
    InitStrategy,
    UniformInitStrategy,
    ZerosInitStrategy
)
from spatial_couplings.strategies.split_strategy import (
    BySampleSplitStrategy,
    MaskSplitStrategy,
    ParitySplitStrategy,
    RandomSplitStrategy,
    SplitStrategy
)

logger = logging.getLogger(__name__)


class GraphStrategyFactory:
    """Factory de constructores de grafo"""

    # Registro de estrategias disponibles
    _strategies: Dict[GraphMethod, type] = {
        GraphMethod.RADIUS: RadiusGraphStrategy,
        GraphMethod.KNN: KnnGraphStrategy,
    }

    @classmethod
    def create_strategy(cls, method: GraphMethod, config: Dict[str, Any] = None) -> GraphStrategy:
        """
        Crea un constructor de grafo.

        Args:
            method: Método de construcción
            config: Parámetros ('radius' o 'k')

        Returns:
            GraphStrategy configurada

        Raises:
            InvalidInputError: Si el método no está registrado
        """
        config = config or {}
        try:
            method = GraphMethod(method)
        except ValueError:
            raise InvalidInputError(f"Graph method {method!r} not supported") from None
        if method not in cls._strategies:
            raise InvalidInputError(f"Graph method {method.value} not supported")

        strategy_class = cls._strategies[method]
        if method == GraphMethod.RADIUS:
            return strategy_class(radius=config.get('radius'))
        if method == GraphMethod.KNN:
            return strategy_class(k=config.get('k'))
        return strategy_class(**config)

    @classmethod
    def register_strategy(cls, method: GraphMethod, strategy_class: type) -> None:
        """Registra (o sustituye) un constructor de grafo"""
        cls._strategies[method] = strategy_class
        logger.debug("Registered graph strategy: %s -> %s", method.value, strategy_class.__name__)

    @classmethod
    def get_supported_types(cls) -> list:
        """Retorna la lista de métodos soportados"""
        return list(cls._strategies.keys())


class InitStrategyFactory:
    """Factory de esquemas de inicialización"""

    _strategies: Dict[InitScheme, type] = {
        InitScheme.ZEROS: ZerosInitStrategy,
        InitScheme.UNIFORM: UniformInitStrategy,
    }

    @classmethod
    def create_strategy(cls, scheme: InitScheme, config: Dict[str, Any] = None) -> InitStrategy:
        """
        Crea una inicialización.

        Args:
            scheme: Esquema de inicialización
            config: Parámetros ('scale' para el uniforme)

        Returns:
            InitStrategy configurada
        """
        config = config or {}
        try:
            scheme = InitScheme(scheme)
        except ValueError:
            raise InvalidInputError(f"Init scheme {scheme!r} not supported") from None
        if scheme not in cls._strategies:
            raise InvalidInputError(f"Init scheme {scheme.value} not supported")

        strategy_class = cls._strategies[scheme]
        if scheme == InitScheme.UNIFORM:
            return strategy_class(scale=config.get('scale', 0.1))
        return strategy_class()

    @classmethod
    def register_strategy(cls, scheme: InitScheme, strategy_class: type) -> None:
        """Registra (o sustituye) una inicialización"""
        cls._strategies[scheme] = strategy_class
        logger.debug("Registered init strategy: %s -> %s", scheme.value, strategy_class.__name__)

    @classmethod
    def get_supported_types(cls) -> list:
        """Retorna la lista de esquemas soportados"""
        return list(cls._strategies.keys())


class SplitStrategyFactory:
    """Factory de estrategias de partición, indexadas por nombre"""

    _strategies: Dict[str, type] = {
        'parity': ParitySplitStrategy,
        'masks': MaskSplitStrategy,
        'random': RandomSplitStrategy,
        'by-sample': BySampleSplitStrategy,
    }

    @classmethod
    def create_strategy(cls, name: str, config: Dict[str, Any] = None) -> SplitStrategy:
        """
        Crea una estrategia de partición.

        Args:
            name: 'parity', 'masks', 'random' o 'by-sample'
            config: 'mask_a'/'mask_b', 'seed' y 'n_repeats' o 'sample_ids' según el caso

        Returns:
            SplitStrategy configurada
        """
        config = config or {}
        if name not in cls._strategies:
            raise InvalidInputError(f"Split strategy '{name}' not supported")

        strategy_class = cls._strategies[name]
        if name == 'masks':
            return strategy_class(mask_a=config['mask_a'], mask_b=config['mask_b'])
        if name == 'random':
            return strategy_class(seed=config.get('seed', 0), n_repeats=config.get('n_repeats', 1))
        if name == 'by-sample':
            return strategy_class(sample_ids=config.get('sample_ids'))
        return strategy_class()

    @classmethod
    def register_strategy(cls, name: str, strategy_class: type) -> None:
        """Registra (o sustituye) una estrategia de partición"""
        cls._strategies[name] = strategy_class
        logger.debug("Registered split strategy: %s -> %s", name, strategy_class.__name__)

    @classmethod
    def get_supported_types(cls) -> list:
        """Retorna la lista de nombres soportados"""
        return list(cls._strategies.keys())
