"""
VAD por energía para grabaciones de un solo hablante y estimación de SNR por deciles.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from corpus.audio import frame_signal
from errors import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_FRAME_MS = 25.0
DEFAULT_HOP_MS = 10.0
DEFAULT_THRESHOLD_DB = 35.0
DEFAULT_MIN_SPEECH_S = 0.3
DEFAULT_MIN_GAP_S = 0.2
SNR_CEILING_DB = 60.0


@dataclass(frozen=True)
class SnrEstimate:
    db: float
    clipped: bool = False


def _frame_energies(samples: np.ndarray, frame_len: int, hop: int, pad: bool = True) -> np.ndarray:
    frames = frame_signal(samples, frame_len, hop, pad)
    return np.mean(frames ** 2, axis=1)


def _runs(active: np.ndarray) -> List[Tuple[int, int]]:
    """Rachas [inicio, fin) de valores verdaderos"""
    padded = np.concatenate(([False], active, [False])).astype(np.int8)
    edges = np.diff(padded)
    return list(zip(np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)))


def energy_vad(samples: np.ndarray, sample_rate: int,
               frame_ms: float = DEFAULT_FRAME_MS,
               threshold_db_below_peak: float = DEFAULT_THRESHOLD_DB,
               min_speech_s: float = DEFAULT_MIN_SPEECH_S,
               min_gap_s: float = DEFAULT_MIN_GAP_S,
               hop_ms: float = DEFAULT_HOP_MS) -> List[Tuple[float, float]]:
    """
    Intervalos (onset, duración) cuya energía por trama supera (pico - umbral) dB.
    Cada trama representa el tramo de un hop centrado en su centro; los huecos
    menores que min_gap_s se puentean y los intervalos menores que min_speech_s se descartan.
    """
    if frame_ms <= 0 or hop_ms <= 0:
        raise ValidationError("frame_ms y hop_ms deben ser positivos")
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ValidationError("energy_vad requiere audio mono")
    if len(samples) == 0:
        return []

    frame_len = max(1, int(round(frame_ms * sample_rate / 1000)))
    hop = max(1, int(round(hop_ms * sample_rate / 1000)))
    energies = _frame_energies(samples, frame_len, hop)
    if not np.any(energies > 0):
        return []

    with np.errstate(divide="ignore"):
        log_energy = 10 * np.log10(energies)
    active = log_energy > log_energy.max() - threshold_db_below_peak

    total = len(samples) / sample_rate
    intervals: List[List[float]] = []
    for first, last in _runs(active):
        start = (first * hop + frame_len / 2 - hop / 2) / sample_rate
        end = ((last - 1) * hop + frame_len / 2 + hop / 2) / sample_rate
        start, end = max(0.0, start), min(total, end)
        if intervals and start - intervals[-1][1] < min_gap_s:
            intervals[-1][1] = end
        else:
            intervals.append([start, end])

    return [(start, end - start) for start, end in intervals if end - start >= min_speech_s]


def estimate_snr(samples: np.ndarray, sample_rate: int, frame_ms: float = DEFAULT_FRAME_MS,
                 ceiling_db: float = SNR_CEILING_DB) -> SnrEstimate:
    """
    SNR = 10·log10(energía media del decil superior / energía media del decil inferior),
    con tramas completas no solapadas (la cola parcial se descarta).
    Un suelo de ruido exactamente nulo devuelve el techo.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) < sample_rate:
        raise ValidationError("estimate_snr requiere al menos 1 s de audio")

    frame_len = max(1, int(round(frame_ms * sample_rate / 1000)))
    energies = np.sort(_frame_energies(samples, frame_len, frame_len, pad=False))
    k = max(1, len(energies) // 10)
    bottom = float(np.mean(energies[:k]))
    top = float(np.mean(energies[-k:]))

    if bottom == 0.0:
        return SnrEstimate(ceiling_db, clipped=True)
    db = 10 * np.log10(top / bottom)
    if db > ceiling_db:
        return SnrEstimate(ceiling_db, clipped=True)
    return SnrEstimate(float(db))
