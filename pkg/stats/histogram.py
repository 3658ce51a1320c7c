# stats/histogram.py - histogramas de duraciones (segundos) con muestreo reproducible
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from errors import ValidationError


def bin_index(value: float, bin_width: float) -> int:
    # el redondeo evita que 0.5/0.01 = 49.999... caiga en el bin anterior
    return int(math.floor(round(value / bin_width, 9)))


@dataclass(frozen=True)
class Histogram:
    """counts[k] cuenta observaciones en [k·bin_width, (k+1)·bin_width)"""
    bin_width: float
    counts: Tuple[int, ...] = ()

    def __post_init__(self):
        if not self.bin_width > 0:
            raise ValidationError(f"bin_width debe ser positivo: {self.bin_width}")
        if any(c < 0 for c in self.counts):
            raise ValidationError("conteos negativos en el histograma")

    @classmethod
    def from_observations(cls, values: Iterable[float], bin_width: float) -> "Histogram":
        indices = [bin_index(v, bin_width) for v in values]
        if any(i < 0 for i in indices):
            raise ValidationError("observaciones negativas en el histograma")
        if not indices:
            return cls(bin_width, ())
        counts = np.bincount(indices)
        return cls(bin_width, tuple(int(c) for c in counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def is_empty(self) -> bool:
        return self.total == 0

    def probabilities(self) -> np.ndarray:
        counts = np.asarray(self.counts, dtype=np.float64)
        return counts / counts.sum()

    def support(self) -> Tuple[float, float]:
        """[borde inferior del primer bin observado, borde superior del último]"""
        nonzero = np.flatnonzero(self.counts)
        return nonzero[0] * self.bin_width, (nonzero[-1] + 1) * self.bin_width

    def mean(self) -> float:
        """Media de la distribución muestreada (uniforme dentro de cada bin)"""
        centers = (np.arange(len(self.counts)) + 0.5) * self.bin_width
        return float(np.dot(self.probabilities(), centers))

    def sample(self, rng: np.random.Generator) -> float:
        """Elige un bin con probabilidad proporcional a su conteo y luego un valor uniforme en él"""
        if self.is_empty:
            raise ValidationError("no se puede muestrear un histograma vacío")
        k = rng.choice(len(self.counts), p=self.probabilities())
        return float((k + rng.random()) * self.bin_width)
