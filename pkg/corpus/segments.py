"""
Tipos del corpus: segmentos de voz, pools por hablante y anotaciones de referencia.
La aritmética de intervalos (unión y diferencia) se apoya en pyannote.core.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from pyannote.core import Annotation, Segment, Timeline

from errors import ValidationError

Interval = Tuple[float, float]  # (inicio, fin) en segundos

SAMPLE_RATES = (8000, 16000)


def to_timeline(intervals: Iterable[Interval]) -> Timeline:
    return Timeline([Segment(start, end) for start, end in intervals])


def from_timeline(timeline: Timeline) -> List[Interval]:
    return [(segment.start, segment.end) for segment in timeline]


def merge_intervals(intervals: Iterable[Interval]) -> List[Interval]:
    """Unión de intervalos: fusiona los que se solapan o se tocan"""
    return from_timeline(to_timeline(intervals).support())


def subtract_intervals(intervals: Iterable[Interval], removed: Iterable[Interval]) -> List[Interval]:
    """Diferencia de conjuntos: intervals menos removed"""
    timeline = to_timeline(intervals).support()
    cuts = to_timeline(removed).support()
    if not timeline or not cuts:
        return from_timeline(timeline)
    return from_timeline(timeline.extrude(cuts, mode="intersection"))


@dataclass(frozen=True)
class SpeechSegment:
    """Fragmento de voz de un hablante dentro de un audio fuente"""
    source_audio: str
    onset: float
    duration: float
    speaker: str

    def __post_init__(self):
        if self.onset < 0:
            raise ValidationError(f"onset negativo en {self.source_audio}: {self.onset}")
        if not self.duration > 0:
            raise ValidationError(f"duración no positiva en {self.source_audio}: {self.duration}")

    @property
    def end(self) -> float:
        return self.onset + self.duration


@dataclass(frozen=True)
class SegmentPool:
    """Catálogo de segmentos agrupados por hablante; inmutable tras su construcción"""
    segments: Dict[str, Tuple[SpeechSegment, ...]]
    sample_rate: int
    warnings: Tuple[str, ...] = ()
    audio_dir: Optional[str] = None

    def __post_init__(self):
        if self.sample_rate not in SAMPLE_RATES:
            raise ValidationError(f"frecuencia de muestreo no soportada: {self.sample_rate}")
        for speaker, segs in self.segments.items():
            if not segs:
                raise ValidationError(f"el hablante {speaker} no tiene segmentos")
            if any(seg.speaker != speaker for seg in segs):
                raise ValidationError(f"segmento asignado a un hablante distinto de {speaker}")

    @property
    def speakers(self) -> List[str]:
        return sorted(self.segments)

    @property
    def num_segments(self) -> int:
        return sum(len(segs) for segs in self.segments.values())

    def recordings(self) -> List[str]:
        return sorted({seg.source_audio for segs in self.segments.values() for seg in segs})


class Turn(NamedTuple):
    speaker: str
    onset: float
    duration: float

    @property
    def end(self) -> float:
        return self.onset + self.duration


def merge_turns(turns: Iterable[Turn]) -> List[Turn]:
    """
    Fusiona los turnos solapados o contiguos de un mismo hablante.
    Los turnos que no se fusionan se conservan tal cual (sin recalcular la duración).
    """
    by_speaker: Dict[str, List[Turn]] = {}
    for turn in turns:
        by_speaker.setdefault(turn.speaker, []).append(turn)

    merged: List[Turn] = []
    for speaker, items in by_speaker.items():
        items.sort(key=lambda t: (t.onset, t.duration))
        current = items[0]
        current_end = current.end
        for turn in items[1:]:
            if turn.onset <= current_end:
                if turn.end > current_end:
                    current_end = turn.end
                    current = Turn(speaker, current.onset, current_end - current.onset)
            else:
                merged.append(current)
                current, current_end = turn, turn.end
        merged.append(current)

    merged.sort(key=lambda t: (t.onset, t.speaker))
    return merged


@dataclass(frozen=True)
class ReferenceAnnotation:
    """Anotación de una grabación: quién habla y cuándo"""
    recording_id: str
    turns: Tuple[Turn, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for turn in self.turns:
            if not turn.duration > 0:
                raise ValidationError(
                    f"{self.recording_id}: duración no positiva para {turn.speaker} en {turn.onset}")
            if turn.onset < 0:
                raise ValidationError(f"{self.recording_id}: onset negativo para {turn.speaker}")

    @classmethod
    def from_turns(cls, recording_id: str, turns: Iterable[Turn]) -> "ReferenceAnnotation":
        """Construye la anotación fusionando los turnos de un mismo hablante"""
        return cls(recording_id, tuple(merge_turns(turns)))

    @property
    def speakers(self) -> List[str]:
        return sorted({t.speaker for t in self.turns})

    @property
    def end(self) -> float:
        return max((t.end for t in self.turns), default=0.0)

    def to_pyannote(self) -> Annotation:
        """Una pista por turno, para que dos hablantes puedan compartir segmento"""
        annotation = Annotation(uri=self.recording_id)
        for index, turn in enumerate(self.turns):
            annotation[Segment(turn.onset, turn.end), index] = turn.speaker
        return annotation

    def intervals(self) -> Dict[str, List[Interval]]:
        annotation = self.to_pyannote()
        return {speaker: from_timeline(annotation.label_timeline(speaker, copy=False).support())
                for speaker in annotation.labels()}

    def normalized(self, precision: int = 2) -> "ReferenceAnnotation":
        """Cuantiza onsets y duraciones a la precisión de salida y vuelve a fusionar"""
        quantized = []
        for turn in self.turns:
            onset = round(turn.onset, precision)
            duration = round(turn.end - onset, precision)
            if duration > 0:
                quantized.append(Turn(turn.speaker, onset, duration))
        merged = merge_turns(quantized)
        # la fusión puede reintroducir decimales espurios en la duración; se repite hasta un punto fijo
        while True:
            rounded = [Turn(t.speaker, t.onset, round(t.duration, precision)) for t in merged]
            merged = merge_turns(rounded)
            if len(merged) == len(rounded):
                return ReferenceAnnotation(self.recording_id, tuple(merged))

    def shifted(self, offset: float) -> "ReferenceAnnotation":
        return ReferenceAnnotation(
            self.recording_id, tuple(Turn(t.speaker, t.onset + offset, t.duration) for t in self.turns))
