"""
Subconjuntos de dos hablantes a partir de grabaciones con más hablantes (tipo AMI):
por cada par se anula en el audio todo lo que dijo cualquier otro hablante.
"""
from __future__ import annotations
import itertools
import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from corpus.segments import ReferenceAnnotation, Turn, merge_intervals, subtract_intervals
from errors import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSubset:
    pair_id: str
    samples: np.ndarray
    annotation: ReferenceAnnotation


def _sample_span(start: float, end: float, sample_rate: int, length: int) -> slice:
    # se redondea hacia fuera para no dejar restos del hablante eliminado
    return slice(max(0, int(np.floor(start * sample_rate))), min(length, int(np.ceil(end * sample_rate))))


def derive_two_speaker_subset(annotation: ReferenceAnnotation, audio: np.ndarray,
                              sample_rate: int) -> List[PairSubset]:
    """Un resultado por par no ordenado de hablantes: 4 hablantes dan 6 pares"""
    speakers = annotation.speakers
    if len(speakers) < 2:
        raise ValidationError(f"{annotation.recording_id}: hacen falta al menos 2 hablantes")
    intervals = annotation.intervals()

    subsets = []
    for first, second in itertools.combinations(speakers, 2):
        removed = merge_intervals(iv for spk, ivs in intervals.items() if spk not in (first, second) for iv in ivs)
        samples = np.array(audio, dtype=np.float64, copy=True)
        for start, end in removed:
            samples[_sample_span(start, end, sample_rate, len(samples))] = 0.0

        # las etiquetas no marcan voz que ya no está en la forma de onda
        turns = [
            Turn(spk, start, end - start)
            for spk in (first, second)
            for start, end in subtract_intervals(intervals[spk], removed)
        ]
        pair_id = f"{annotation.recording_id}_{first}_{second}"
        subsets.append(PairSubset(pair_id, samples, ReferenceAnnotation.from_turns(pair_id, turns)))

    logger.info(f"{annotation.recording_id}: {len(subsets)} pares derivados de {len(speakers)} hablantes")
    return subsets
