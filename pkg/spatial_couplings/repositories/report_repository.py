"""
Repository de informes JSON con esquema estable
{version, config, results, warnings, timestamp}.
"""
import json
import logging
import math
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict

import numpy as np

from spatial_couplings import __version__
from spatial_couplings.exceptions import DataFormatError, InvalidInputError
from spatial_couplings.repositories.base_repository import BaseRepository, PathLike

logger = logging.getLogger(__name__)

REPORT_KEYS = ('config', 'results', 'warnings')


def to_jsonable(value: Any) -> Any:
    """Convierte numpy, enums y NaN/Inf (-> null) a tipos JSON"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


class ReportRepository(BaseRepository[Dict[str, Any]]):
    """
    Repository para informes de los subcomandos.
    """

    @staticmethod
    def build(config: Dict[str, Any], results: Dict[str, Any], warnings=None) -> Dict[str, Any]:
        """Arma el payload con la versión; el timestamp se añade al guardar"""
        return {
            'version': __version__,
            'config': config,
            'results': results,
            'warnings': list(warnings or [])
        }

    @staticmethod
    def dumps(payload: Dict[str, Any]) -> str:
        """Serialización determinista (claves ordenadas)"""
        return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)

    def save(self, entity: Dict[str, Any], path: PathLike, **kwargs) -> None:
        """
        Escribe el informe añadiendo versión (si falta) y timestamp UTC.
        """
        missing = [k for k in REPORT_KEYS if k not in entity]
        if missing:
            raise InvalidInputError(f"Report payload lacks '{missing[0]}'")
        payload = dict(entity)
        payload.setdefault('version', __version__)
        payload['timestamp'] = datetime.now(timezone.utc).isoformat()
        path = self.ensure_parent(path)
        path.write_text(self.dumps(payload) + '\n')
        logger.info("Wrote report %s", path)

    def load(self, path: PathLike, **kwargs) -> Dict[str, Any]:
        """Lee un informe"""
        path = self.require_file(path)
        try:
            return json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(exc.msg, path=str(path), line=exc.lineno) from None
