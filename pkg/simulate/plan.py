# simulate/plan.py - colocación de segmentos fuente sobre una línea temporal
from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from corpus.segments import ReferenceAnnotation, SegmentPool, SpeechSegment, Turn
from errors import SimulationError, ValidationError


@dataclass(frozen=True)
class Placement:
    speaker: int
    segment: SpeechSegment
    onset: float

    @property
    def end(self) -> float:
        return self.onset + self.segment.duration


@dataclass(frozen=True)
class ConversationPlan:
    placements: Tuple[Placement, ...]
    num_speakers: int
    duration: float
    seed: int = 0
    speakers: Tuple[str, ...] = ()
    speaker_gains_db: Tuple[float, ...] = ()
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        onsets = [p.onset for p in self.placements]
        if onsets != sorted(onsets):
            raise ValidationError("las colocaciones deben estar ordenadas por onset")
        if any(not 0 <= p.speaker < self.num_speakers for p in self.placements):
            raise ValidationError("índice de hablante fuera de rango")
        if self.placements and self.duration < max(p.end for p in self.placements) - 1e-9:
            raise ValidationError("la duración del plan no cubre todas las colocaciones")

    def speaker_name(self, index: int) -> str:
        return self.speakers[index] if self.speakers else f"spk{index}"


def build_plan(placements: Sequence[Placement], num_speakers: int, seed: int,
               speakers: Sequence[str], gains_db: Sequence[float] = (),
               warnings: Sequence[str] = ()) -> ConversationPlan:
    ordered = tuple(sorted(placements, key=lambda p: (p.onset, p.speaker)))
    duration = max((p.end for p in ordered), default=0.0)
    return ConversationPlan(ordered, num_speakers, duration, seed, tuple(speakers),
                            tuple(gains_db), tuple(warnings))


def choose_speakers(pool: SegmentPool, count: int, rng: np.random.Generator) -> List[str]:
    """Hablantes distintos elegidos sin reemplazo"""
    available = pool.speakers
    if len(available) < count:
        raise SimulationError(f"se piden {count} hablantes y el pool sólo tiene {len(available)}")
    return [available[i] for i in rng.choice(len(available), size=count, replace=False)]


def draw_gains_db(count: int, level_db: float, rng: np.random.Generator) -> List[float]:
    """Nivelado opcional de energía entre hablantes (uniforme en ±level_db)"""
    if level_db <= 0:
        return []
    return [float(g) for g in rng.uniform(-level_db, level_db, size=count)]


def plan_to_annotation(plan: ConversationPlan, recording_id: str = "") -> ReferenceAnnotation:
    """Un intervalo por colocación; se fusionan las del mismo hablante sintético"""
    turns = [Turn(plan.speaker_name(p.speaker), p.onset, p.segment.duration) for p in plan.placements]
    return ReferenceAnnotation.from_turns(recording_id, turns)
