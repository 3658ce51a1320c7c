"""Renderizado de un plan: suma de los segmentos fuente en un acumulador float64"""
from __future__ import annotations
import logging
import math

import numpy as np

from corpus.audio import AudioStore, to_samples
from errors import ValidationError
from simulate.plan import ConversationPlan

logger = logging.getLogger(__name__)

PEAK_DBFS = -1.0


def plan_length(plan: ConversationPlan, sample_rate: int) -> int:
    # el redondeo previo evita que 10.0 * 16000 se convierta en 160001
    return int(math.ceil(round(plan.duration * sample_rate, 6)))


def render(plan: ConversationPlan, store: AudioStore, sample_rate: int,
           normalize_peak: bool = False) -> np.ndarray:
    """
    Mezcla lineal de todas las colocaciones. La normalización de pico (a -1 dBFS) es
    opcional y se aplica de forma uniforme a toda la mezcla, nunca por hablante.
    """
    if store.sample_rate != sample_rate:
        raise ValidationError(f"el almacén de audio trabaja a {store.sample_rate} Hz, no a {sample_rate} Hz")

    buffer = np.zeros(plan_length(plan, sample_rate), dtype=np.float64)
    gains = [10 ** (g / 20) for g in plan.speaker_gains_db]
    for placement in plan.placements:
        samples = store.segment(placement.segment)
        start = to_samples(placement.onset, sample_rate)
        stop = min(start + len(samples), len(buffer))
        chunk = samples[:stop - start]
        if gains:
            chunk = chunk * gains[placement.speaker]
        buffer[start:stop] += chunk

    if normalize_peak:
        peak = float(np.max(np.abs(buffer))) if len(buffer) else 0.0
        if peak > 0:
            buffer *= 10 ** (PEAK_DBFS / 20) / peak
    return buffer


def speech_mask(plan: ConversationPlan, sample_rate: int, length: int) -> np.ndarray:
    """Muestras cubiertas por alguna colocación"""
    mask = np.zeros(length, dtype=bool)
    for placement in plan.placements:
        start = to_samples(placement.onset, sample_rate)
        stop = min(start + to_samples(placement.segment.duration, sample_rate), length)
        mask[start:stop] = True
    return mask
