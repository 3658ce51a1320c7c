"""Medidas de actividad de una anotación: voz por hablante, solape y silencio"""
from __future__ import annotations
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Optional

from pyannote.core import Timeline

from corpus.segments import ReferenceAnnotation


@dataclass(frozen=True)
class ActivitySummary:
    duration: float
    speech_per_speaker: Dict[str, float]
    speech: float      # tiempo con al menos un hablante
    overlap: float     # tiempo con dos o más hablantes
    silence: float

    @property
    def overlap_fraction(self) -> float:
        return self.overlap / self.speech if self.speech > 0 else 0.0


def activity_summary(annotation: ReferenceAnnotation, duration: Optional[float] = None) -> ActivitySummary:
    regions = annotation.to_pyannote()
    timelines = {speaker: regions.label_timeline(speaker).support() for speaker in regions.labels()}
    speech_per_speaker = {speaker: float(timeline.duration()) for speaker, timeline in timelines.items()}
    speech = float(regions.get_timeline().support().duration())

    # solape = unión de las intersecciones entre cada par de hablantes
    overlapped = Timeline()
    for first, second in combinations(sorted(timelines), 2):
        for segment in timelines[first].crop(timelines[second], mode="intersection"):
            overlapped.add(segment)
    overlap = float(overlapped.support().duration())

    total = annotation.end if duration is None else max(duration, annotation.end)
    return ActivitySummary(total, speech_per_speaker, speech, overlap, max(0.0, total - speech))
