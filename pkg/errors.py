# errors.py - Jerarquía de errores compartida por todos los módulos
from __future__ import annotations
from typing import Optional


class SimConvError(Exception):
    """Error base del toolkit"""


class ParseError(SimConvError, ValueError):
    """Línea mal formada en un fichero de texto (RTTM, listas de segmentos, estadísticas)"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"línea {line_number}: {message}"
        super().__init__(message)


class ValidationError(SimConvError, ValueError):
    """Datos que violan un invariante del dominio"""


class ConfigError(SimConvError):
    """Configuración inválida o incompleta"""


class StatisticsError(SimConvError):
    """Estadísticas de turnos indefinidas"""


class SimulationError(SimConvError):
    """Fallo al planificar o renderizar una conversación"""


class ScoringError(SimConvError):
    """DER indefinido o entradas de evaluación inconsistentes"""
