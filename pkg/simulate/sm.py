"""
Mezclas simuladas (SM): cada hablante se coloca en su propio canal de forma independiente,
con pausas exponenciales entre sus segmentos, y los canales se suman.
"""
from __future__ import annotations
import logging
from typing import Iterator, List, Sequence

import numpy as np

from corpus.segments import SegmentPool, SpeechSegment
from errors import SimulationError
from simulate.plan import ConversationPlan, Placement, build_plan, choose_speakers, draw_gains_db
from simulate.spec import STOP_ON_DURATION, MixSpec

logger = logging.getLogger(__name__)


def _segment_stream(segments: Sequence[SpeechSegment], spec: MixSpec,
                    rng: np.random.Generator) -> Iterator[SpeechSegment]:
    if spec.sm_allow_replacement:
        while True:
            yield segments[int(rng.integers(len(segments)))]
    for index in rng.permutation(len(segments)):
        yield segments[index]


def _channel(segments: Sequence[SpeechSegment], spec: MixSpec, rng: np.random.Generator,
             speaker_index: int, warnings: List[str]) -> List[Placement]:
    by_duration = spec.stop_on == STOP_ON_DURATION
    if not by_duration and not spec.sm_allow_replacement and spec.utterances_per_speaker > len(segments):
        raise SimulationError(
            f"{segments[0].speaker}: se piden {spec.utterances_per_speaker} enunciados y sólo tiene "
            f"{len(segments)} (usa sm_allow_replacement)")

    placements: List[Placement] = []
    t = 0.0
    for segment in _segment_stream(segments, spec, rng):
        placements.append(Placement(speaker_index, segment, t))
        end = t + segment.duration
        if by_duration and end >= spec.target_duration_s:
            break
        if not by_duration and len(placements) == spec.utterances_per_speaker:
            break
        pause = rng.exponential(spec.sm_pause_mean_s) if spec.sm_pause_mean_s > 0 else 0.0
        t = end + pause
    else:
        message = f"{segments[0].speaker}: segmentos agotados antes de {spec.target_duration_s} s"
        logger.warning(message)
        warnings.append(message)
    return placements


def plan_sm(pool: SegmentPool, spec: MixSpec, rng: np.random.Generator,
            seed: int = 0) -> ConversationPlan:
    count = spec.choose_speaker_count(rng)
    speakers = choose_speakers(pool, count, rng)
    gains = draw_gains_db(count, spec.level_speakers_db, rng)

    placements: List[Placement] = []
    warnings: List[str] = []
    for index, speaker in enumerate(speakers):
        # todos los canales empiezan en 0
        placements.extend(_channel(pool.segments[speaker], spec, rng, index, warnings))
    return build_plan(placements, count, seed, speakers, gains, warnings)
