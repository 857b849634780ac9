"""
Configuración del logging de la aplicación.
"""
import logging

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'

_HANDLER_NAME = 'spatial_couplings'


def configure_logging(level: str = 'WARNING') -> logging.Logger:
    """
    Instala un único handler de consola en el logger raíz del paquete.

    Llamarla varias veces solo actualiza el nivel.

    Args:
        level: Nombre del nivel (DEBUG, INFO, ...)

    Returns:
        El logger raíz del paquete
    """
    logger = logging.getLogger('spatial_couplings')
    logger.setLevel(level.upper())

    if not any(h.get_name() == _HANDLER_NAME for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.set_name(_HANDLER_NAME)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)

    return logger
