"""
Estadísticas de toma de turnos estimadas sobre conversaciones reales:
pausas del mismo hablante, pausas y solapes en los cambios de hablante.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

import numpy as np

from corpus.segments import ReferenceAnnotation, Turn, merge_turns
from errors import StatisticsError, ValidationError
from stats.histogram import Histogram

logger = logging.getLogger(__name__)

DEFAULT_BIN_WIDTH_S = 0.01

SAME = "same"
PAUSE = "pause"
OVERLAP = "overlap"


@dataclass(frozen=True)
class TurnStatistics:
    same_speaker_pause: Histogram
    cross_speaker_pause: Histogram
    cross_speaker_overlap: Histogram
    p_same_speaker: float
    p_overlap_given_change: float

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("p_same_speaker", "p_overlap_given_change"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} fuera de [0, 1]: {value}")
        # un histograma vacío sólo es válido si nunca se va a muestrear
        needed = {
            "same_speaker_pause": self.p_same_speaker > 0,
            "cross_speaker_pause": self.p_same_speaker < 1 and self.p_overlap_given_change < 1,
            "cross_speaker_overlap": self.p_same_speaker < 1 and self.p_overlap_given_change > 0,
        }
        for name, sampled in needed.items():
            if sampled and getattr(self, name).is_empty:
                raise ValidationError(f"histograma {name} vacío pero con probabilidad de uso > 0")

    @property
    def transitions(self) -> int:
        return self.same_speaker_pause.total + self.cross_speaker_pause.total + self.cross_speaker_overlap.total


@dataclass
class _Transitions:
    same: List[float] = field(default_factory=list)
    pause: List[float] = field(default_factory=list)
    overlap: List[float] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.same) + len(self.pause) + len(self.overlap)

    def as_pairs(self) -> List[Tuple[str, float]]:
        return ([(SAME, v) for v in self.same] + [(PAUSE, v) for v in self.pause]
                + [(OVERLAP, v) for v in self.overlap])


def classify_transition(previous: Turn, following: Turn) -> Tuple[str, float]:
    """Tipo de transición y su duración (pausa u solape, siempre >= 0)"""
    gap = following.onset - previous.end
    if following.speaker == previous.speaker:
        return SAME, max(gap, 0.0)
    if gap >= 0:
        return PAUSE, gap
    # un turno contenido en el anterior cuenta como solape de su propia longitud
    return OVERLAP, min(-gap, following.duration)


def collect_transitions(annotations: List[ReferenceAnnotation]) -> _Transitions:
    transitions = _Transitions()
    for annotation in annotations:
        turns = sorted(merge_turns(annotation.turns), key=lambda t: (t.onset, t.end, t.speaker))
        if len(turns) < 2:
            logger.warning(f"{annotation.recording_id}: menos de 2 turnos, no aporta transiciones")
            continue
        for previous, following in zip(turns, turns[1:]):
            kind, value = classify_transition(previous, following)
            getattr(transitions, kind).append(value)
    return transitions


def _from_transitions(transitions: _Transitions, bin_width_s: float) -> TurnStatistics:
    if transitions.total == 0:
        raise StatisticsError("no hay transiciones: estadísticas indefinidas")
    changes = len(transitions.pause) + len(transitions.overlap)
    return TurnStatistics(
        same_speaker_pause=Histogram.from_observations(transitions.same, bin_width_s),
        cross_speaker_pause=Histogram.from_observations(transitions.pause, bin_width_s),
        cross_speaker_overlap=Histogram.from_observations(transitions.overlap, bin_width_s),
        p_same_speaker=len(transitions.same) / transitions.total,
        p_overlap_given_change=len(transitions.overlap) / changes if changes else 0.0,
    )


def estimate_turn_statistics(annotations: List[ReferenceAnnotation],
                             bin_width_s: float = DEFAULT_BIN_WIDTH_S) -> TurnStatistics:
    """Agrega todas las transiciones con el mismo peso (no por conversación)"""
    transitions = collect_transitions(annotations)
    stats = _from_transitions(transitions, bin_width_s)
    logger.info(
        f"Estadísticas sobre {transitions.total} transiciones: p_same={stats.p_same_speaker:.3f}, "
        f"p_overlap|cambio={stats.p_overlap_given_change:.3f}")
    return stats


def estimate_pooled_statistics(sources: Mapping[str, List[ReferenceAnnotation]],
                               bin_width_s: float = DEFAULT_BIN_WIDTH_S,
                               equalize: bool = False,
                               seed: int = 0) -> TurnStatistics:
    """
    Estadísticas sobre varios dominios. Con equalize, las transiciones de cada fuente
    se remuestrean (con reemplazo) hasta el número de la fuente más grande.
    """
    per_source: Dict[str, _Transitions] = {name: collect_transitions(anns) for name, anns in sources.items()}
    if not equalize:
        pooled = _Transitions()
        for name in sorted(per_source):
            pooled.same += per_source[name].same
            pooled.pause += per_source[name].pause
            pooled.overlap += per_source[name].overlap
        return _from_transitions(pooled, bin_width_s)

    target = max((t.total for t in per_source.values()), default=0)
    rng = np.random.default_rng(seed)
    pooled = _Transitions()
    for name in sorted(per_source):
        pairs = per_source[name].as_pairs()
        if not pairs:
            logger.warning(f"Fuente {name} sin transiciones, se ignora al igualar")
            continue
        for index in rng.integers(len(pairs), size=target):
            kind, value = pairs[index]
            getattr(pooled, kind).append(value)
        logger.info(f"Fuente {name}: {len(pairs)} transiciones remuestreadas a {target}")
    return _from_transitions(pooled, bin_width_s)
