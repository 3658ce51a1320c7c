"""Asignación de coste mínimo (algoritmo húngaro, variante Jonker-Volgenant de SciPy)"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from errors import ValidationError


@dataclass(frozen=True)
class Assignment:
    """permutation[i] = índice de referencia asignado al hablante predicho i"""
    permutation: Tuple[int, ...]
    cost: float
    rows: Tuple[int, ...] = ()

    def as_dict(self) -> Dict[int, int]:
        rows = self.rows or tuple(range(len(self.permutation)))
        return dict(zip(rows, self.permutation))


def hungarian(cost: np.ndarray, maximize: bool = False) -> Assignment:
    """
    Biyección sobre min(filas, columnas) índices que minimiza (o maximiza) el coste total,
    en tiempo cúbico. El coste devuelto es la suma de las entradas de la asignación.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValidationError(f"la matriz de costes debe ser 2D, forma {cost.shape}")
    if np.any(np.isnan(cost)):
        raise ValidationError("la matriz de costes contiene NaN")
    if not np.all(np.isfinite(cost)):
        raise ValidationError("la matriz de costes contiene valores infinitos")

    rows, cols = linear_sum_assignment(cost, maximize=maximize)
    total = float(cost[rows, cols].sum())
    return Assignment(tuple(int(c) for c in cols), total, tuple(int(r) for r in rows))
