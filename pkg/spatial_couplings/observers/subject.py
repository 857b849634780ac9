"""
Publicación de eventos de los optimizadores (patrón Observer).

InferenceService y GenerationService heredan de OptimizerSubject. Los
registros internos de cada ejecución se suscriben con `observing`, que los
desuscribe al salir aunque el optimizador lance una excepción.
"""
import logging
from abc import ABC, abstractmethod
from contextlib import contextmanager
from typing import Iterator, List

from spatial_couplings.observers.events import OptimizerEvent

logger = logging.getLogger(__name__)


class Observer(ABC):
    """Receptor de FitEvent o GenerationEvent"""

    @abstractmethod
    def update(self, event: OptimizerEvent) -> None:
        """
        Recibe un evento del optimizador.

        Args:
            event: FitEvent o GenerationEvent
        """


class OptimizerSubject:
    """Optimizador que publica sus eventos a los observadores suscritos"""

    def __init__(self):
        self._observers: List[Observer] = []

    def attach(self, observer: Observer) -> None:
        """Suscribe un observador; suscribirlo dos veces no duplica eventos"""
        if observer not in self._observers:
            self._observers.append(observer)
            logger.debug("%s observes %s", observer.__class__.__name__, self.__class__.__name__)

    def detach(self, observer: Observer) -> None:
        if observer in self._observers:
            self._observers.remove(observer)

    @contextmanager
    def observing(self, *observers: Observer) -> Iterator[None]:
        """Suscribe `observers` mientras dura el bloque"""
        for observer in observers:
            self.attach(observer)
        try:
            yield
        finally:
            for observer in observers:
                self.detach(observer)

    def notify(self, event: OptimizerEvent) -> None:
        for observer in list(self._observers):
            observer.update(event)
